// Serves a checkpoint over the line protocol on stdin/stdout, so it can
// stand in for a third-party classifier in black-box runs.

#include <iostream>

#include "advtext/external.hpp"
#include "advtext/store.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: line_oracle CHECKPOINT\n";
    return 2;
  }
  try {
    auto model = advtext::load_checkpoint(argv[1]);
    advtext::serve_line_protocol(*model, std::cin, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "line_oracle: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
