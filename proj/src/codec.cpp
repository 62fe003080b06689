#include "advtext/codec.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "advtext/utf8.hpp"

namespace advtext {

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::is_space(text[i])) ++i;
    if (i >= text.size()) break;
    const std::size_t start = i;
    while (i < text.size() && !utf8::is_space(text[i])) ++i;
    tokens.push_back({std::string(text.substr(start, i - start)), start, i});
  }
  return tokens;
}

Doc Doc::make(std::string id, std::string text, std::optional<std::string> label) {
  Doc d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.label = std::move(label);
  d.tokens = tokenize(d.text);
  return d;
}

Alphabet::Alphabet(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  if (chars_.empty()) throw InvalidArgument("alphabet is empty");
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    if (chars_[i] == U' ') throw InvalidArgument("alphabet must not contain the space character");
    if (!index_.emplace(chars_[i], i).second) {
      throw InvalidArgument("duplicate alphabet character '" + utf8::encode(chars_[i]) + "'");
    }
  }
}

Alphabet Alphabet::standard() {
  std::u32string chars = U"abcdefghijklmnopqrstuvwxyz0123456789";
  chars += U"-,;.!?:'\"/\\|_@#$%^&*~`+=<>()[]{}";
  chars += U'’';
  return Alphabet(std::vector<char32_t>(chars.begin(), chars.end()));
}

Alphabet Alphabet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open alphabet file " + path.string());
  std::vector<char32_t> chars;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cps = utf8::decode(line);
    if (cps.size() != 1) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected exactly one character");
    }
    chars.push_back(cps[0].value);
  }
  return Alphabet(std::move(chars));
}

void Alphabet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write alphabet file " + path.string());
  for (char32_t c : chars_) out << utf8::encode(c) << '\n';
}

std::optional<std::size_t> Alphabet::index_of(char32_t c) const {
  auto it = index_.find(utf8::to_lower_ascii(c));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

CharGrid encode_chars(std::string_view text, const Alphabet& alphabet, std::size_t length) {
  if (length == 0) throw InvalidArgument("input length must be positive");
  CharGrid out;
  out.grid = nn::Tensor({length, alphabet.size()});
  out.row_offset.assign(length, -1);
  const auto cps = utf8::decode(text);
  const std::size_t rows = std::min(cps.size(), length);
  for (std::size_t r = 0; r < rows; ++r) {
    out.row_offset[r] = static_cast<std::ptrdiff_t>(cps[r].offset);
    if (auto idx = alphabet.index_of(cps[r].value)) out.grid.at(r, *idx) = 1.0;
  }
  out.used_rows = rows;
  return out;
}

std::string decode_chars(const nn::Tensor& grid, const Alphabet& alphabet) {
  if (grid.rank() != 2 || grid.dim(1) != alphabet.size()) {
    throw nn::ShapeError("grid " + nn::to_string(grid.shape) + " does not match an alphabet of " +
                         std::to_string(alphabet.size()));
  }
  std::string out;
  for (std::size_t r = 0; r < grid.dim(0); ++r) {
    const auto row = grid.row(r);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    out += row[best] > 0.5 ? utf8::encode(alphabet.at(best)) : std::string(" ");
  }
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{"<unk>"}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.empty()) words_.push_back("<unk>");
  for (std::size_t i = 1; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw InvalidArgument("duplicate vocabulary word '" + words_[i] + "'");
  }
}

Vocabulary Vocabulary::build(const std::vector<Doc>& docs, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d.tokens) ++counts[utf8::to_lower_ascii(t.word)];
  }
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words{"<unk>"};
  for (const auto& [w, c] : sorted) {
    if (c >= min_count) words.push_back(w);
  }
  return Vocabulary(std::move(words));
}

std::size_t Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(utf8::to_lower_ascii(word));
  return it == index_.end() ? unknown : it->second;
}

std::size_t import_word_vectors(const std::filesystem::path& path, const Vocabulary& vocab, nn::Tensor& table) {
  if (table.rank() != 2 || table.dim(0) != vocab.size()) {
    throw nn::ShapeError("embedding table " + nn::to_string(table.shape) + " does not match a vocabulary of " +
                         std::to_string(vocab.size()));
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open word-vector file " + path.string());
  const std::size_t dim = table.dim(1);
  std::size_t imported = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    std::vector<double> values;
    double v;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
    // word2vec text files start with a "<count> <dim>" header line.
    if (lineno == 1 && values.size() == 1) continue;
    if (values.size() != dim) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                            " values, got " + std::to_string(values.size()));
    }
    const std::size_t idx = vocab.index_of(word);
    if (idx == Vocabulary::unknown) continue;
    std::copy(values.begin(), values.end(), table.row(idx).begin());
    ++imported;
  }
  return imported;
}

WordSeq encode_words(const Doc& doc, const Vocabulary& vocab, std::size_t length) {
  if (length == 0) throw InvalidArgument("input length must be positive");
  WordSeq out;
  out.indices = nn::Tensor({length});
  out.row_token.assign(length, -1);
  const std::size_t rows = std::min(doc.tokens.size(), length);
  for (std::size_t r = 0; r < rows; ++r) {
    out.indices[r] = static_cast<double>(vocab.index_of(doc.tokens[r].word));
    out.row_token[r] = static_cast<std::ptrdiff_t>(r);
  }
  return out;
}

}  // namespace advtext
