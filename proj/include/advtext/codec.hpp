#pragma once

// Text representation for both model families: one-hot character grids for
// the character model, vocabulary indices for the word model. All offsets
// into a text are byte offsets into its UTF-8 encoding.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "advtext/tensor.hpp"

namespace advtext {

struct Token {
  std::string word;
  std::size_t begin = 0;  // byte offset of the first byte
  std::size_t end = 0;    // one past the last byte

  bool operator==(const Token&) const = default;
};

/// Maximal runs of non-whitespace bytes, in order.
std::vector<Token> tokenize(std::string_view text);

struct Doc {
  std::string id;
  std::string text;
  std::optional<std::string> label;
  std::vector<Token> tokens;

  static Doc make(std::string id, std::string text, std::optional<std::string> label = std::nullopt);
  bool operator==(const Doc&) const = default;
};

class Alphabet {
 public:
  explicit Alphabet(std::vector<char32_t> chars);

  /// 26 letters, 10 digits and 33 punctuation characters.
  static Alphabet standard();
  /// One character per line, UTF-8.
  static Alphabet load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return chars_.size(); }
  const std::vector<char32_t>& chars() const { return chars_; }
  char32_t at(std::size_t index) const { return chars_.at(index); }
  /// Index of `c` after ASCII case folding, if it belongs to the alphabet.
  std::optional<std::size_t> index_of(char32_t c) const;

  bool operator==(const Alphabet& other) const { return chars_ == other.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::size_t> index_;
};

/// One-hot grid [L x |A|] plus the byte offset each row came from.
struct CharGrid {
  nn::Tensor grid;
  std::vector<std::ptrdiff_t> row_offset;  // -1 for padding rows
  std::size_t used_rows = 0;               // rows holding text characters
};

CharGrid encode_chars(std::string_view text, const Alphabet& alphabet, std::size_t length);

/// Per row: the argmax character when the row maximum exceeds 0.5,
/// otherwise a space. Returns exactly one character per row.
std::string decode_chars(const nn::Tensor& grid, const Alphabet& alphabet);

class Vocabulary {
 public:
  static constexpr std::size_t unknown = 0;

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> words);

  /// Lowercased words seen at least `min_count` times, by descending count
  /// then alphabetically.
  static Vocabulary build(const std::vector<Doc>& docs, std::size_t min_count = 1);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  /// Index of the lowercased word, or `unknown`.
  std::size_t index_of(std::string_view word) const;

  bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;  // words_[0] is the unknown marker
  std::unordered_map<std::string, std::size_t> index_;
};

/// Overwrites rows of `table` [|V| x D] with vectors from a word-vector text
/// file (a word followed by D floats per line). Words absent from the file
/// keep their rows. Returns the number of rows imported.
std::size_t import_word_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                nn::Tensor& table);

/// Index sequence [T] plus the token each row came from.
struct WordSeq {
  nn::Tensor indices;
  std::vector<std::ptrdiff_t> row_token;  // -1 for padding rows
};

WordSeq encode_words(const Doc& doc, const Vocabulary& vocab, std::size_t length);

}  // namespace advtext
