#include "advtext/store.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "advtext/utf8.hpp"

#ifndef ADVTEXT_DATA_DIR
#define ADVTEXT_DATA_DIR "data"
#endif

namespace advtext {

using nlohmann::json;

namespace {

const char checkpoint_magic[8] = {'A', 'D', 'V', 'T', 'X', 'T', 'C', 'K'};

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos && !s.empty() && s.front() != ' ' && s.back() != ' ') {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits RFC 4180 records. Quoted fields may hold commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& origin) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  bool after_quote = false;
  std::size_t i = 0;
  if (text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    rows.push_back(std::move(row));
    row.clear();
    field_started = false;
    after_quote = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = false;
      after_quote = false;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      end_row();
    } else {
      if (after_quote) {
        throw FormatError(origin + ": row " + std::to_string(rows.size()) + ": text after a closing quote");
      }
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw FormatError(origin + ": row " + std::to_string(rows.size()) + ": unterminated quote");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}
std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

json spec_json(const nn::LayerSpec& s) {
  json j{{"kind", nn::to_string(s.kind)}, {"kernel", s.kernel}, {"stride", s.stride}, {"channels", s.channels},
         {"units", s.units},             {"vocab", s.vocab},   {"dim", s.dim},       {"drop", s.drop}};
  json branches = json::array();
  for (const auto& b : s.branches) {
    json layers = json::array();
    for (const auto& l : b) layers.push_back(spec_json(l));
    branches.push_back(std::move(layers));
  }
  j["branches"] = std::move(branches);
  return j;
}

nn::LayerSpec spec_from_json(const json& j) {
  nn::LayerSpec s;
  s.kind = nn::parse_layer_kind(j.at("kind").get<std::string>());
  s.kernel = j.at("kernel").get<std::size_t>();
  s.stride = j.at("stride").get<std::size_t>();
  s.channels = j.at("channels").get<std::size_t>();
  s.units = j.at("units").get<std::size_t>();
  s.vocab = j.at("vocab").get<std::size_t>();
  s.dim = j.at("dim").get<std::size_t>();
  s.drop = j.at("drop").get<double>();
  for (const auto& b : j.at("branches")) {
    std::vector<nn::LayerSpec> layers;
    for (const auto& l : b) layers.push_back(spec_from_json(l));
    s.branches.push_back(std::move(layers));
  }
  return s;
}

json doc_json(const Doc& d) {
  return {{"id", d.id}, {"text", d.text}, {"label", d.label ? json(*d.label) : json(nullptr)}};
}

Doc doc_from_json(const json& j) {
  std::optional<std::string> label;
  if (!j.at("label").is_null()) label = j.at("label").get<std::string>();
  return Doc::make(j.at("id").get<std::string>(), j.at("text").get<std::string>(), label);
}

json perturbation_json(const Perturbation& p) {
  return {{"kind", to_string(p.kind)},
          {"method", to_string(p.method)},
          {"start", p.start},
          {"removed", p.removed},
          {"inserted", p.inserted},
          {"token_begin", p.token_begin},
          {"token_end", p.token_end},
          {"provenance", p.provenance},
          {"base", p.base}};
}

Perturbation perturbation_from_json(const json& j) {
  Perturbation p;
  p.kind = parse_perturb_kind(j.at("kind").get<std::string>());
  p.method = parse_perturb_method(j.at("method").get<std::string>());
  p.start = j.at("start").get<std::size_t>();
  p.removed = j.at("removed").get<std::string>();
  p.inserted = j.at("inserted").get<std::string>();
  p.token_begin = j.at("token_begin").get<std::size_t>();
  p.token_end = j.at("token_end").get<std::size_t>();
  p.provenance = j.at("provenance").get<std::string>();
  p.base = j.at("base").get<std::string>();
  return p;
}

json span_json(const HotSpan& s) {
  return {{"begin", s.begin},
          {"end", s.end},
          {"surface", s.surface},
          {"score", s.score},
          {"kind", s.kind == SpanKind::word ? "word" : "phrase"}};
}

HotSpan span_from_json(const json& j) {
  HotSpan s;
  s.begin = j.at("begin").get<std::size_t>();
  s.end = j.at("end").get<std::size_t>();
  s.surface = j.at("surface").get<std::string>();
  s.score = j.at("score").get<double>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "word" && kind != "phrase") throw FormatError("unknown span kind '" + kind + "'");
  s.kind = kind == "word" ? SpanKind::word : SpanKind::phrase;
  return s;
}

json candidate_json(const CandidateScore& c) {
  return {{"perturbation", perturbation_json(c.perturbation)},
          {"before", c.before},
          {"after", c.after},
          {"gain", c.gain}};
}

CandidateScore candidate_from_json(const json& j) {
  return {perturbation_from_json(j.at("perturbation")), j.at("before").get<ConfVector>(),
          j.at("after").get<ConfVector>(), j.at("gain").get<double>()};
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw FormatError("cannot open '" + path.string() + "': " + std::strerror(errno));
  return in;
}

// Non-comment, non-blank lines, CR stripped.
std::vector<std::string> content_lines(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::pair<std::string, std::string> split_tab(const std::string& line, const std::filesystem::path& path) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos) throw FormatError(path.string() + ": line without a tab: '" + line + "'");
  return {line.substr(0, tab), line.substr(tab + 1)};
}

char32_t single_char(const std::string& s, const std::filesystem::path& path) {
  const auto cps = utf8::decode(s);
  if (cps.size() != 1) throw FormatError(path.string() + ": '" + s + "' is not a single character");
  return cps[0].value;
}

}  // namespace

CheckpointError::CheckpointError(CheckpointErrorKind kind, const std::string& what)
    : FormatError(to_string(kind) + ": " + what), kind_(kind) {}

std::string to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case CheckpointErrorKind::version_mismatch:
      return "version mismatch";
    case CheckpointErrorKind::shape_mismatch:
      return "shape mismatch";
    case CheckpointErrorKind::truncated:
      return "truncated";
    case CheckpointErrorKind::malformed:
      break;
  }
  return "malformed";
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "': " + std::strerror(errno));
  out << bytes;
  if (!out.flush()) throw FormatError("write to '" + path.string() + "' failed");
}

std::vector<Doc> read_dataset(std::istream& in, const std::string& origin) {
  std::ostringstream s;
  s << in.rdbuf();
  const auto rows = parse_csv(s.str(), origin);
  if (rows.empty()) throw FormatError(origin + ": missing header `label,text`");
  if (rows[0] != std::vector<std::string>{"label", "text"}) {
    throw FormatError(origin + ": header must be `label,text`");
  }
  std::vector<Doc> docs;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() == 1 && rows[r][0].empty() && r + 1 == rows.size()) break;
    if (rows[r].size() != 2) {
      throw FormatError(origin + ": row " + std::to_string(r) + ": expected 2 fields, found " +
                        std::to_string(rows[r].size()));
    }
    if (rows[r][0].empty()) throw FormatError(origin + ": row " + std::to_string(r) + ": empty label");
    docs.push_back(Doc::make(std::to_string(r), rows[r][1], rows[r][0]));
  }
  return docs;
}

std::vector<Doc> load_dataset(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  return read_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const std::vector<Doc>& docs) {
  out << "label,text\n";
  for (const auto& d : docs) {
    if (!d.label || d.label->empty()) throw InvalidArgument("doc '" + d.id + "' has no label");
    out << csv_quote(*d.label) << ',' << csv_quote(d.text) << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const std::vector<Doc>& docs) {
  std::ostringstream s;
  write_dataset(s, docs);
  write_file(path, s.str());
}

std::string checkpoint_bytes(const NeuralClassifier& model) {
  json m;
  m["format_version"] = checkpoint_version;
  m["model_kind"] = to_string(model.kind());
  m["id"] = model.id();
  m["classes"] = model.classes();
  if (const auto* c = dynamic_cast<const CharCnn*>(&model)) {
    json chars = json::array();
    for (char32_t ch : c->alphabet().chars()) chars.push_back(utf8::encode(ch));
    m["codec"] = {{"alphabet", chars}, {"length", c->length()}};
  } else if (const auto* w = dynamic_cast<const WordCnn*>(&model)) {
    m["codec"] = {{"vocabulary", w->vocabulary().words()}, {"length", w->length()}};
  } else {
    throw InvalidArgument("only character and word models can be checkpointed");
  }
  m["input_shape"] = model.network().input_shape();
  json layers = json::array();
  for (const auto& s : model.network().specs()) layers.push_back(spec_json(s));
  m["layers"] = std::move(layers);
  const auto params = model.network().parameters();
  json shapes = json::array();
  for (const auto* p : params) shapes.push_back(p->shape);
  m["parameter_shapes"] = std::move(shapes);

  const std::string manifest = m.dump();
  std::string out(checkpoint_magic, 8);
  put_u32(out, checkpoint_version);
  put_u64(out, manifest.size());
  out += manifest;
  for (const auto* p : params) {
    for (double v : p->data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_u64(out, bits);
    }
  }
  return out;
}

std::shared_ptr<NeuralClassifier> checkpoint_from_bytes(const std::string& bytes) {
  using K = CheckpointErrorKind;
  if (bytes.size() < 8) throw CheckpointError(K::truncated, "file ends inside the header");
  if (bytes.compare(0, 8, checkpoint_magic, 8) != 0) throw CheckpointError(K::malformed, "not a checkpoint file");
  if (bytes.size() < 20) throw CheckpointError(K::truncated, "file ends inside the header");
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  if (version != checkpoint_version) {
    throw CheckpointError(K::version_mismatch, "file has format version " + std::to_string(version) +
                                                   ", this build reads version " +
                                                   std::to_string(checkpoint_version));
  }
  const std::uint64_t mlen = get_le(bytes, 12, 8);
  if (bytes.size() - 20 < mlen) throw CheckpointError(K::truncated, "file ends inside the manifest");
  std::shared_ptr<NeuralClassifier> model;
  std::vector<nn::Shape> declared;
  try {
    const json m = json::parse(bytes.substr(20, mlen));
    if (m.at("format_version").get<std::uint32_t>() != version) {
      throw CheckpointError(K::version_mismatch, "manifest version differs from the header");
    }
    const ModelKind kind = parse_model_kind(m.at("model_kind").get<std::string>());
    auto id = m.at("id").get<std::string>();
    auto classes = m.at("classes").get<std::vector<std::string>>();
    std::vector<nn::LayerSpec> specs;
    for (const auto& l : m.at("layers")) specs.push_back(spec_from_json(l));
    const auto input_shape = m.at("input_shape").get<nn::Shape>();
    for (const auto& s : m.at("parameter_shapes")) declared.push_back(s.get<nn::Shape>());
    const auto& codec = m.at("codec");
    const std::size_t length = codec.at("length").get<std::size_t>();
    nn::Network net(input_shape, specs, 0);
    if (kind == ModelKind::char_cnn) {
      std::vector<char32_t> chars;
      for (const auto& c : codec.at("alphabet")) {
        const auto cps = utf8::decode(c.get<std::string>());
        if (cps.size() != 1) throw CheckpointError(K::malformed, "alphabet entry is not one character");
        chars.push_back(cps[0].value);
      }
      model = std::make_shared<CharCnn>(std::move(id), std::move(classes), Alphabet(std::move(chars)), length,
                                        std::move(net));
    } else if (kind == ModelKind::word_cnn) {
      Vocabulary vocab(codec.at("vocabulary").get<std::vector<std::string>>());
      model = std::make_shared<WordCnn>(std::move(id), std::move(classes), std::move(vocab), length, std::move(net));
    } else {
      throw CheckpointError(K::malformed, "external models have no checkpoint");
    }
  } catch (const json::exception& e) {
    throw CheckpointError(K::malformed, std::string("bad manifest: ") + e.what());
  } catch (const nn::ShapeError& e) {
    throw CheckpointError(K::shape_mismatch, e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw CheckpointError(K::malformed, e.what());
  }
  auto params = model->network().parameters();
  if (params.size() != declared.size()) {
    throw CheckpointError(K::shape_mismatch, "manifest declares " + std::to_string(declared.size()) +
                                                 " parameter tensors, the layers need " +
                                                 std::to_string(params.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape != declared[i]) {
      throw CheckpointError(K::shape_mismatch, "parameter " + std::to_string(i) + " declared " +
                                                   nn::to_string(declared[i]) + ", layers need " +
                                                   nn::to_string(params[i]->shape));
    }
    total += params[i]->size();
  }
  std::size_t pos = 20 + mlen;
  const std::size_t need = total * 8;
  if (bytes.size() - pos < need) {
    throw CheckpointError(K::truncated, "parameter blocks hold " + std::to_string((bytes.size() - pos) / 8) +
                                            " of " + std::to_string(total) + " values");
  }
  if (bytes.size() - pos > need) throw CheckpointError(K::malformed, "trailing bytes after the parameter blocks");
  for (auto* p : params) {
    for (double& v : p->data) {
      const std::uint64_t bits = get_le(bytes, pos, 8);
      std::memcpy(&v, &bits, sizeof v);
      pos += 8;
    }
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const NeuralClassifier& model) {
  write_file(path, checkpoint_bytes(model));
}

std::shared_ptr<NeuralClassifier> load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_bytes(read_file(path));
  } catch (const CheckpointError& e) {
    throw CheckpointError(e.kind(), path.string() + ": " + std::string(e.what()).substr(to_string(e.kind()).size() + 2));
  }
}

std::string htp_table_json(const HtpTable& table) {
  json classes = json::array();
  for (const auto& c : table.classes) {
    json phrases = json::array();
    for (const auto& e : c.entries) phrases.push_back({{"phrase", e.phrase}, {"frequency", e.frequency}});
    classes.push_back({{"class", c.cls}, {"phrases", std::move(phrases)}});
  }
  return json{{"classes", std::move(classes)}}.dump(2) + "\n";
}

HtpTable htp_table_from_json(const std::string& text) {
  HtpTable table;
  try {
    const json j = json::parse(text);
    for (const auto& c : j.at("classes")) {
      ClassHtps row;
      row.cls = c.at("class").get<std::string>();
      for (const auto& p : c.at("phrases")) {
        HtpEntry e{p.at("phrase").get<std::string>(), row.cls, p.at("frequency").get<std::size_t>(),
                   row.entries.size() + 1};
        if (!row.entries.empty() && e.frequency > row.entries.back().frequency) {
          throw FormatError("HTP table: frequencies of class '" + row.cls + "' increase at rank " +
                            std::to_string(e.rank));
        }
        row.entries.push_back(std::move(e));
      }
      if (table.find(row.cls)) throw FormatError("HTP table: class '" + row.cls + "' appears twice");
      table.classes.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("HTP table: ") + e.what());
  }
  return table;
}

void save_htp_table(const std::filesystem::path& path, const HtpTable& table) {
  write_file(path, htp_table_json(table));
}

HtpTable load_htp_table(const std::filesystem::path& path) {
  try {
    return htp_table_from_json(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_phrase_dump(std::ostream& out, const std::vector<PhraseDump>& dump) {
  for (const auto& d : dump) {
    out << d.sample_id << '\t' << d.cls;
    for (const auto& p : d.phrases) out << '\t' << normalize_phrase(p);
    out << '\n';
  }
}

std::vector<PhraseDump> read_phrase_dump(std::istream& in) {
  std::vector<PhraseDump> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream s(line);
    std::string item;
    while (std::getline(s, item, '\t')) f.push_back(item);
    if (f.size() < 2) throw FormatError("phrase dump line " + std::to_string(n) + ": expected id and class");
    out.push_back({f[0], f[1], std::vector<std::string>(f.begin() + 2, f.end())});
  }
  return out;
}

std::string trace_json(const AttackTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json hs = json::array();
    for (const auto& h : s.hsps) hs.push_back(span_json(h));
    json pool = json::array();
    for (const auto& c : s.pool) pool.push_back(candidate_json(c));
    json dir = nullptr;
    if (s.direction) {
      json changes = json::array();
      for (const auto& c : s.direction->changes) changes.push_back({c.row, c.column, c.delta});
      dir = {{"source", s.direction->source},
             {"target", s.direction->target},
             {"passes", s.direction->passes},
             {"changes", std::move(changes)}};
    }
    steps.push_back({{"perturbation", perturbation_json(s.perturbation)},
                     {"before", s.before},
                     {"after", s.after},
                     {"gain", s.gain},
                     {"hsps", std::move(hs)},
                     {"direction", std::move(dir)},
                     {"payload_tokens", s.payload_tokens},
                     {"pool", std::move(pool)}});
  }
  json j{{"original", doc_json(t.original)},
         {"source", t.source},
         {"target", t.target},
         {"target_index", t.target_index},
         {"knowledge", to_string(t.knowledge)},
         {"steps", std::move(steps)},
         {"outcome", to_string(t.outcome)},
         {"final_text", t.final_text},
         {"initial_conf", t.initial_conf},
         {"final_conf", t.final_conf},
         {"inserted", t.inserted},
         {"modified", t.modified},
         {"removed", t.removed},
         {"oracle_calls", t.oracle_calls}};
  return j.dump(2) + "\n";
}

AttackTrace trace_from_json(const std::string& text) {
  AttackTrace t;
  try {
    const json j = json::parse(text);
    t.original = doc_from_json(j.at("original"));
    t.source = j.at("source").get<std::string>();
    t.target = j.at("target").get<std::string>();
    t.target_index = j.at("target_index").get<std::size_t>();
    t.knowledge = parse_knowledge(j.at("knowledge").get<std::string>());
    for (const auto& s : j.at("steps")) {
      AttackStep step;
      step.perturbation = perturbation_from_json(s.at("perturbation"));
      step.before = s.at("before").get<ConfVector>();
      step.after = s.at("after").get<ConfVector>();
      step.gain = s.at("gain").get<double>();
      for (const auto& h : s.at("hsps")) step.hsps.push_back(span_from_json(h));
      if (!s.at("direction").is_null()) {
        const auto& d = s.at("direction");
        DirectionCheck dc;
        dc.source = d.at("source").get<double>();
        dc.target = d.at("target").get<double>();
        dc.passes = d.at("passes").get<bool>();
        for (const auto& c : d.at("changes")) {
          dc.changes.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>(), c.at(2).get<double>()});
        }
        step.direction = std::move(dc);
      }
      step.payload_tokens = s.at("payload_tokens").get<std::size_t>();
      for (const auto& c : s.at("pool")) step.pool.push_back(candidate_from_json(c));
      t.steps.push_back(std::move(step));
    }
    t.outcome = parse_outcome(j.at("outcome").get<std::string>());
    t.final_text = j.at("final_text").get<std::string>();
    t.initial_conf = j.at("initial_conf").get<ConfVector>();
    t.final_conf = j.at("final_conf").get<ConfVector>();
    t.inserted = j.at("inserted").get<std::size_t>();
    t.modified = j.at("modified").get<std::size_t>();
    t.removed = j.at("removed").get<std::size_t>();
    t.oracle_calls = j.at("oracle_calls").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("trace: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("trace: ") + e.what());
  }
  return t;
}

void save_trace(const std::filesystem::path& path, const AttackTrace& trace) { write_file(path, trace_json(trace)); }

AttackTrace load_trace(const std::filesystem::path& path) { return trace_from_json(read_file(path)); }

LexiconPaths LexiconPaths::in(const std::filesystem::path& dir) {
  return {dir / "misspellings.tsv", dir / "homoglyphs.tsv", dir / "paraphrases.tsv", dir / "dispensable.txt",
          dir / "templates.txt"};
}

PerturbLexicons load_lexicons(const LexiconPaths& paths, int year) {
  PerturbLexicons lex;
  lex.year = year;
  for (const auto& line : content_lines(paths.misspellings)) {
    auto [word, list] = split_tab(line, paths.misspellings);
    std::vector<std::string> variants;
    std::stringstream s(list);
    std::string v;
    while (std::getline(s, v, ',')) {
      if (!v.empty()) variants.push_back(v);
    }
    if (variants.empty()) throw FormatError(paths.misspellings.string() + ": no misspellings for '" + word + "'");
    auto& slot = lex.misspellings[utf8::to_lower_ascii(word)];
    slot.insert(slot.end(), variants.begin(), variants.end());
  }
  for (const auto& line : content_lines(paths.homoglyphs)) {
    auto [from, to] = split_tab(line, paths.homoglyphs);
    lex.homoglyphs.emplace_back(single_char(from, paths.homoglyphs), single_char(to, paths.homoglyphs));
  }
  for (const auto& line : content_lines(paths.paraphrases)) {
    lex.paraphrases.push_back(split_tab(line, paths.paraphrases));
  }
  for (const auto& line : content_lines(paths.dispensable)) lex.dispensable.insert(utf8::to_lower_ascii(line));
  for (const auto& line : content_lines(paths.templates)) {
    if (template_slots(line) == 0) {
      throw FormatError(paths.templates.string() + ": template without an <htp> slot: '" + line + "'");
    }
    lex.templates.push_back(line);
  }
  return lex;
}

void save_lexicons(const LexiconPaths& paths, const PerturbLexicons& lex) {
  std::ostringstream m;
  for (const auto& [word, variants] : lex.misspellings) {
    m << word << '\t';
    for (std::size_t i = 0; i < variants.size(); ++i) m << (i ? "," : "") << variants[i];
    m << '\n';
  }
  write_file(paths.misspellings, m.str());
  std::ostringstream h;
  for (const auto& [from, to] : lex.homoglyphs) h << utf8::encode(from) << '\t' << utf8::encode(to) << '\n';
  write_file(paths.homoglyphs, h.str());
  std::ostringstream p;
  for (const auto& [phrase, repl] : lex.paraphrases) p << phrase << '\t' << repl << '\n';
  write_file(paths.paraphrases, p.str());
  std::ostringstream d;
  for (const auto& w : lex.dispensable) d << w << '\n';
  write_file(paths.dispensable, d.str());
  std::ostringstream t;
  for (const auto& l : lex.templates) t << l << '\n';
  write_file(paths.templates, t.str());
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("ADVTEXT_DATA")) return env;
  return ADVTEXT_DATA_DIR;
}

}  // namespace advtext
