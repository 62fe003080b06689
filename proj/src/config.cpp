#include "advtext/config.hpp"

#include <charconv>
#include <sstream>

#include "advtext/store.hpp"

namespace advtext {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw InvalidArgument("config key '" + key + "': '" + v + "' is not a nonnegative integer");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw InvalidArgument("config key '" + key + "': '" + v + "' is not a number");
  return d;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream s(v);
  std::string item;
  while (std::getline(s, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

IniFile IniFile::parse(const std::string& text, const std::string& origin) {
  IniFile ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(origin + ":" + std::to_string(n) + ": unclosed section header");
      section = trim(line.substr(1, line.size() - 2));
      ini.values_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(origin + ":" + std::to_string(n) + ": expected key = value");
    if (section.empty()) throw InvalidArgument(origin + ":" + std::to_string(n) + ": key outside any section");
    ini.values_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

void apply_ini(Settings& st, const IniFile& ini) {
  for (const auto& [section, keys] : ini.sections()) {
    for (const auto& [key, v] : keys) {
      const std::string name = section + "." + key;
      if (name == "codec.char_length") {
        st.char_length = to_size(name, v);
      } else if (name == "codec.word_length") {
        st.word_length = to_size(name, v);
      } else if (name == "codec.word_dim") {
        st.word_dim = to_size(name, v);
      } else if (name == "saliency.char_top_k") {
        st.char_top_k = to_size(name, v);
      } else if (name == "saliency.min_hot_chars") {
        st.min_hot_chars = to_size(name, v);
      } else if (name == "saliency.word_top_k") {
        st.word_top_k = to_size(name, v);
      } else if (name == "saliency.black_top_k") {
        st.black_top_k = to_size(name, v);
      } else if (name == "saliency.htp_top_n") {
        st.htp_top_n = to_size(name, v);
      } else if (name == "attack.budget") {
        st.budget = to_size(name, v);
      } else if (name == "attack.cap") {
        st.cap = to_size(name, v);
      } else if (name == "attack.min_gain") {
        st.min_gain = to_double(name, v);
      } else if (name == "attack.year") {
        st.year = static_cast<int>(to_size(name, v));
      } else if (name == "lexicons.dir") {
        st.lexicon_dir = v;
      } else if (name == "model.classes") {
        st.classes = split_list(v);
      } else if (name == "train.epochs") {
        st.epochs = to_size(name, v);
      } else if (name == "train.learning_rate") {
        st.learning_rate = to_double(name, v);
      } else if (name == "train.batch_size") {
        st.batch_size = to_size(name, v);
      } else if (name == "train.seed") {
        st.seed = to_size(name, v);
      } else if (name == "run.jobs") {
        st.jobs = to_size(name, v);
      } else {
        throw InvalidArgument("unknown config key '" + name + "'");
      }
    }
  }
}

std::string describe(const Settings& st) {
  std::ostringstream o;
  std::string classes;
  for (const auto& c : st.classes) classes += (classes.empty() ? "" : ",") + c;
  o << "[codec]\nchar_length = " << st.char_length << "\nword_length = " << st.word_length
    << "\nword_dim = " << st.word_dim << "\n[saliency]\nchar_top_k = " << st.char_top_k
    << "\nmin_hot_chars = " << st.min_hot_chars << "\nword_top_k = " << st.word_top_k
    << "\nblack_top_k = " << st.black_top_k << "\nhtp_top_n = " << st.htp_top_n << "\n[attack]\nbudget = " << st.budget
    << "\ncap = " << st.cap << "\nmin_gain = " << st.min_gain << "\nyear = " << st.year
    << "\n[lexicons]\ndir = " << st.lexicon_dir.string() << "\n[model]\nclasses = " << classes
    << "\n[train]\nepochs = " << st.epochs << "\nlearning_rate = " << st.learning_rate
    << "\nbatch_size = " << st.batch_size << "\nseed = " << st.seed << "\n[run]\njobs = " << st.jobs << "\n";
  return o.str();
}

}  // namespace advtext
