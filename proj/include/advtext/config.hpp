#pragma once

// INI-style defaults file and the resolved run settings.
//
//   [section]
//   key = value      ; comments start with ';' or '#'

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advtext/common.hpp"

namespace advtext {

class IniFile {
 public:
  static IniFile parse(const std::string& text, const std::string& origin = "<config>");
  static IniFile load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  /// section -> key -> value
  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return values_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

struct Settings {
  std::size_t char_length = 256;
  std::size_t word_length = 64;
  std::size_t word_dim = 32;
  std::size_t char_top_k = 50;
  std::size_t min_hot_chars = 3;
  std::size_t word_top_k = 5;
  std::size_t black_top_k = 3;
  std::size_t htp_top_n = 10;
  std::size_t budget = 5;
  std::size_t cap = 50;
  double min_gain = 1e-4;
  int year = 1996;
  std::filesystem::path lexicon_dir;
  std::vector<std::string> classes;
  std::size_t epochs = 10;
  double learning_rate = 0.05;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

/// Overrides `settings` with every key present in `ini`. Unknown sections
/// or keys and unparsable values throw InvalidArgument naming them.
void apply_ini(Settings& settings, const IniFile& ini);

/// The settings as an INI document, in a fixed key order.
std::string describe(const Settings& settings);

}  // namespace advtext
