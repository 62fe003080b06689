#include <iostream>

#include "advtext/cli.hpp"

int main(int argc, char** argv) {
  return advtext::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
