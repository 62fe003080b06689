#pragma once

// File formats: datasets (CSV), checkpoints (JSON manifest + raw float
// blocks), HTP tables and attack traces (JSON), perturbation lexicons (TSV
// and plain lists).

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "advtext/attack.hpp"
#include "advtext/models.hpp"

namespace advtext {

/// A file could not be read or did not have the expected structure.
class FormatError : public Error {
 public:
  using Error::Error;
};

enum class CheckpointErrorKind { version_mismatch, shape_mismatch, truncated, malformed };

class CheckpointError : public FormatError {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what);
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

std::string to_string(CheckpointErrorKind kind);

// Datasets.

/// CSV with header `label,text`. Doc ids are data row numbers from 1.
std::vector<Doc> read_dataset(std::istream& in, const std::string& origin = "<stream>");
std::vector<Doc> load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const std::vector<Doc>& docs);
void save_dataset(const std::filesystem::path& path, const std::vector<Doc>& docs);

// Checkpoints.

inline constexpr std::uint32_t checkpoint_version = 1;

void save_checkpoint(const std::filesystem::path& path, const NeuralClassifier& model);
std::shared_ptr<NeuralClassifier> load_checkpoint(const std::filesystem::path& path);
/// Byte-level variants used by the file functions.
std::string checkpoint_bytes(const NeuralClassifier& model);
std::shared_ptr<NeuralClassifier> checkpoint_from_bytes(const std::string& bytes);

// HTP tables.

std::string htp_table_json(const HtpTable& table);
HtpTable htp_table_from_json(const std::string& text);
void save_htp_table(const std::filesystem::path& path, const HtpTable& table);
HtpTable load_htp_table(const std::filesystem::path& path);

/// One line per sample: id<TAB>class<TAB>phrase|phrase|...
void write_phrase_dump(std::ostream& out, const std::vector<PhraseDump>& dump);
std::vector<PhraseDump> read_phrase_dump(std::istream& in);

// Attack traces.

std::string trace_json(const AttackTrace& trace);
AttackTrace trace_from_json(const std::string& text);
void save_trace(const std::filesystem::path& path, const AttackTrace& trace);
AttackTrace load_trace(const std::filesystem::path& path);

// Lexicons.

struct LexiconPaths {
  std::filesystem::path misspellings;
  std::filesystem::path homoglyphs;
  std::filesystem::path paraphrases;
  std::filesystem::path dispensable;
  std::filesystem::path templates;

  /// The conventional file names inside `dir`.
  static LexiconPaths in(const std::filesystem::path& dir);
};

/// Lines starting with '#' and blank lines are skipped.
PerturbLexicons load_lexicons(const LexiconPaths& paths, int year = 1996);
void save_lexicons(const LexiconPaths& paths, const PerturbLexicons& lex);

/// Directory holding the shipped lexicons and alphabet.
std::filesystem::path default_data_dir();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace advtext
