#include "advtext/service.hpp"

#include <atomic>
#include <regex>
#include <thread>

#include "advtext/external.hpp"
#include "httplib.h"
#include "json.hpp"

namespace advtext {

using nlohmann::json;

namespace {

struct NotFound : Error {
  using Error::Error;
};
struct Conflict : Error {
  using Error::Error;
};
struct BadRequest : Error {
  using Error::Error;
};

Response reply(json j, int status = 200) { return {status, j.dump()}; }
Response error_reply(int status, const std::string& what) { return reply(json{{"error", what}}, status); }

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest("request body must be a JSON object");
  return j;
}

template <typename T>
T field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw BadRequest(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw BadRequest(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

json span_json(const HotSpan& s) {
  return {{"begin", s.begin},
          {"end", s.end},
          {"surface", s.surface},
          {"score", s.score},
          {"kind", s.kind == SpanKind::word ? "word" : "phrase"}};
}

json spans_json(const std::vector<HotSpan>& spans) {
  json a = json::array();
  for (const auto& s : spans) a.push_back(span_json(s));
  return a;
}

json perturbation_json(const Perturbation& p) {
  return {{"kind", to_string(p.kind)},         {"method", to_string(p.method)}, {"start", p.start},
          {"removed", p.removed},              {"inserted", p.inserted},        {"token_begin", p.token_begin},
          {"token_end", p.token_end},          {"provenance", p.provenance},    {"base", p.base},
          {"changed_chars", p.changed_chars()}};
}

std::string candidate_id(const std::string& text, const Perturbation& p) {
  return hex64(fnv1a(fingerprint(text) + '\n' + perturbation_json(p).dump()));
}

StrategyMask strategies_of(const json& j) {
  auto it = j.find("strategies");
  if (it == j.end()) return {};
  try {
    if (it->is_string()) return parse_strategies(it->get<std::string>());
    if (it->is_array()) {
      std::string list;
      for (const auto& s : *it) list += (list.empty() ? "" : ",") + s.get<std::string>();
      return parse_strategies(list);
    }
  } catch (const json::exception&) {
  }
  throw BadRequest("'strategies' must be a comma list or an array of names");
}

std::vector<Snippet> snippets_of(const json& j) {
  std::vector<Snippet> out;
  auto it = j.find("snippets");
  if (it == j.end()) return out;
  if (!it->is_array()) throw BadRequest("'snippets' must be an array");
  for (const auto& s : *it) {
    if (!s.is_object()) throw BadRequest("each snippet needs 'offset' and 'text'");
    out.push_back({field<std::size_t>(s, "offset"), field<std::string>(s, "text")});
  }
  return out;
}

}  // namespace

struct Service::Session {
  struct Entry {
    Perturbation perturbation;
    TypoLocks locks;  // before the edit
    ConfVector conf;  // before the edit
  };

  std::mutex mu;
  std::string id;
  std::string model;
  Doc original;
  Doc current;
  ConfVector conf;
  std::size_t target = 0;
  AttackConfig config;
  TypoLocks locks;
  std::vector<AttackStep> steps;
  std::vector<Entry> undo;
  std::map<std::string, CandidateScore> offered;  // from the latest /suggest
};

struct Service::Http {
  httplib::Server server;
  std::thread thread;
};

Service::Service(PerturbLexicons lexicons, AttackConfig defaults)
    : lex_(std::move(lexicons)), defaults_(std::move(defaults)) {}

Service::~Service() { stop(); }

void Service::add_model(ClassifierHandle model, HtpTable htps) {
  if (!model) throw InvalidArgument("null model");
  const std::string id = model->id();
  models_[id] = {std::move(model), std::move(htps)};
}

const Service::ModelEntry& Service::model_entry(const std::string& id) const {
  auto it = models_.find(id);
  if (it == models_.end()) throw NotFound("unknown model '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) const {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  static const std::regex model_op(R"(/models/([^/]+)/(classify|saliency))");
  static const std::regex session_op(R"(/sessions/([^/]+)/(suggest|apply|undo))");
  static const std::regex session_get(R"(/sessions/([^/]+))");
  static const std::regex htp_get(R"(/htp/([^/]+)/([^/]+))");
  try {
    std::smatch m;
    if (path == "/models") {
      if (method != "GET") return error_reply(405, "method not allowed");
      return models();
    }
    if (std::regex_match(path, m, model_op)) {
      if (method != "POST") return error_reply(405, "method not allowed");
      return m[2] == "classify" ? classify(m[1], body) : saliency(m[1], body);
    }
    if (path == "/sessions") {
      if (method != "POST") return error_reply(405, "method not allowed");
      return create_session(body);
    }
    if (std::regex_match(path, m, session_op)) {
      if (method != "POST") return error_reply(405, "method not allowed");
      if (m[2] == "suggest") return suggest(m[1], body);
      if (m[2] == "apply") return apply(m[1], body);
      return undo(m[1]);
    }
    if (std::regex_match(path, m, session_get)) {
      if (method != "GET") return error_reply(405, "method not allowed");
      return session_view(m[1]);
    }
    if (std::regex_match(path, m, htp_get)) {
      if (method != "GET") return error_reply(405, "method not allowed");
      return htp(m[1], m[2]);
    }
    return error_reply(404, "no route for " + path);
  } catch (const NotFound& e) {
    return error_reply(404, e.what());
  } catch (const Conflict& e) {
    return error_reply(409, e.what());
  } catch (const BadRequest& e) {
    return error_reply(400, e.what());
  } catch (const OracleError& e) {
    return reply(json{{"error", e.what()}, {"raw_reply", e.raw_reply()}}, 502);
  } catch (const ProbeError& e) {
    return reply(json{{"error", e.what()}, {"token", e.token()}}, 502);
  } catch (const InvalidArgument& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

Response Service::models() const {
  json a = json::array();
  for (const auto& [id, entry] : models_) {
    a.push_back({{"id", id},
                 {"kind", to_string(entry.model->kind())},
                 {"classes", entry.model->classes()},
                 {"gradients", entry.model->kind() != ModelKind::external}});
  }
  return reply(json{{"models", a}});
}

Response Service::classify(const std::string& model, const std::string& body) {
  const ModelEntry& e = model_entry(model);
  const json j = parse_body(body);
  const auto text = field<std::string>(j, "text");
  return reply(json{{"classes", e.model->classes()}, {"probs", e.model->classify(text)}});
}

Response Service::saliency(const std::string& model, const std::string& body) {
  const ModelEntry& e = model_entry(model);
  const json j = parse_body(body);
  const Doc doc = Doc::make("request", field<std::string>(j, "text"));
  const auto mode = parse_knowledge(field_or<std::string>(j, "mode", "white"));
  const Classifier& clf = *e.model;
  if (mode == Knowledge::white && clf.kind() == ModelKind::external) {
    throw BadRequest("no gradients available for external model '" + clf.id() + "'");
  }

  json tokens = json::array();
  for (const auto& t : doc.tokens) tokens.push_back({{"word", t.word}, {"begin", t.begin}, {"end", t.end}});
  std::vector<double> scores;
  std::vector<HotSpan> spans;
  if (!doc.tokens.empty()) {
    if (mode == Knowledge::white) {
      const std::size_t cls = argmax(clf.classify(doc.text));
      HotItems items = saliency_items(clf, doc, cls, defaults_.saliency);
      scores = std::move(items.token_scores);
      spans = std::move(items.phrases);
    } else {
      const DeviationTable dt = deviations(clf, doc, defaults_.jobs);
      scores = dt.deviation;
      spans = hsps_black(dt, doc, defaults_.black_top_k);
    }
  }
  return reply(json{{"mode", to_string(mode)}, {"tokens", tokens}, {"scores", scores}, {"hsps", spans_json(spans)}});
}

Response Service::create_session(const std::string& body) {
  const json j = parse_body(body);
  const std::string model = field<std::string>(j, "model");
  const ModelEntry& e = model_entry(model);

  auto s = std::make_shared<Session>();
  s->model = model;
  s->config = defaults_;
  s->config.target = field<std::string>(j, "target");
  s->config.knowledge = parse_knowledge(
      field_or<std::string>(j, "knowledge", e.model->kind() == ModelKind::external ? "black" : "white"));
  s->config.budget = field_or<std::size_t>(j, "budget", s->config.budget);
  s->config.cap = field_or<std::size_t>(j, "cap", s->config.cap);
  s->config.validate();
  if (s->config.knowledge == Knowledge::white && e.model->kind() == ModelKind::external) {
    throw BadRequest("no gradients available for external model '" + model + "'");
  }
  s->target = e.model->class_index(s->config.target);
  {
    std::lock_guard lock(sessions_mu_);
    s->id = "s" + std::to_string(next_session_++);
  }
  s->original = Doc::make(s->id, field<std::string>(j, "text"));
  s->current = s->original;
  s->conf = e.model->classify(s->current.text);
  {
    std::lock_guard lock(sessions_mu_);
    sessions_[s->id] = s;
  }
  return session_view(s->id);
}

Response Service::session_view(const std::string& id) {
  auto s = session(id);
  std::lock_guard lock(s->mu);
  const ModelEntry& e = model_entry(s->model);
  json steps = json::array();
  for (const auto& st : s->steps) {
    steps.push_back({{"perturbation", perturbation_json(st.perturbation)},
                     {"before", st.before},
                     {"after", st.after},
                     {"gain", st.gain}});
  }
  return reply(json{{"id", s->id},
                    {"model", s->model},
                    {"classes", e.model->classes()},
                    {"target", s->config.target},
                    {"knowledge", to_string(s->config.knowledge)},
                    {"budget", s->config.budget},
                    {"original", s->original.text},
                    {"text", s->current.text},
                    {"conf", s->conf},
                    {"predicted", e.model->classes()[argmax(s->conf)]},
                    {"steps", steps},
                    {"undo_depth", s->undo.size()}});
}

Response Service::suggest(const std::string& id, const std::string& body) {
  auto s = session(id);
  const json j = parse_body(body);
  AttackConfig config;
  std::vector<Snippet> snippets;
  {
    std::lock_guard lock(s->mu);
    config = s->config;
  }
  config.strategies = strategies_of(j);
  snippets = snippets_of(j);

  std::lock_guard lock(s->mu);
  const ModelEntry& e = model_entry(s->model);
  std::vector<std::string> phrases;
  if (config.strategies.insert && e.htps.find(config.target)) {
    phrases = htp_phrases(e.htps, config.target, config.htp_count);
  }
  for (const auto& sn : snippets) {
    if (sn.offset > s->current.text.size()) throw BadRequest("snippet offset past the end of the text");
  }
  const Suggestion sg = advtext::suggest(*e.model, s->current, s->conf, s->target, phrases, lex_, config,
                                         s->locks, snippets);
  s->offered.clear();
  json cands = json::array();
  for (const auto& c : sg.candidates) {
    const std::string cid = candidate_id(s->current.text, c.perturbation);
    s->offered.emplace(cid, c);
    cands.push_back({{"id", cid}, {"perturbation", perturbation_json(c.perturbation)}, {"conf_after", c.after},
                     {"gain", c.gain}});
  }
  return reply(json{{"candidates", cands}, {"hsps", spans_json(sg.hsps)}, {"oracle_calls", sg.oracle_calls}});
}

Response Service::apply(const std::string& id, const std::string& body) {
  auto s = session(id);
  const json j = parse_body(body);
  const auto cid = field<std::string>(j, "candidate_id");
  std::lock_guard lock(s->mu);
  auto it = s->offered.find(cid);
  if (it == s->offered.end()) throw Conflict("stale or unknown candidate id '" + cid + "'");
  const CandidateScore c = it->second;
  if (c.perturbation.base != fingerprint(s->current.text)) throw Conflict("stale candidate id '" + cid + "'");

  s->undo.push_back({c.perturbation, s->locks, s->conf});
  s->current = advtext::apply(s->current, c.perturbation);
  update_locks(s->locks, c.perturbation);
  AttackStep step;
  step.perturbation = c.perturbation;
  step.before = s->conf;
  step.after = c.after;
  step.gain = c.gain;
  step.payload_tokens = tokenize(c.perturbation.inserted).size();
  s->steps.push_back(step);
  s->conf = c.after;
  s->offered.clear();
  return reply(json{{"text", s->current.text}, {"conf", s->conf}, {"undo_depth", s->undo.size()}});
}

Response Service::undo(const std::string& id) {
  auto s = session(id);
  std::lock_guard lock(s->mu);
  if (s->undo.empty()) throw Conflict("nothing to undo");
  Session::Entry last = std::move(s->undo.back());
  s->undo.pop_back();
  s->current = advtext::revert(s->current, last.perturbation);
  s->locks = std::move(last.locks);
  s->conf = std::move(last.conf);
  s->steps.pop_back();
  s->offered.clear();
  return reply(json{{"text", s->current.text}, {"conf", s->conf}, {"undo_depth", s->undo.size()}});
}

Response Service::htp(const std::string& model, const std::string& cls) {
  const ModelEntry& e = model_entry(model);
  e.model->class_index(cls);
  const auto* entries = e.htps.find(cls);
  if (!entries) throw NotFound("no hot training phrases for class '" + cls + "'");
  json a = json::array();
  for (const auto& h : *entries) a.push_back({{"phrase", h.phrase}, {"frequency", h.frequency}, {"rank", h.rank}});
  return reply(json{{"model", model}, {"class", cls}, {"phrases", a}});
}

namespace {

void route(httplib::Server& server, Service& svc) {
  auto dispatch = [&svc](const httplib::Request& req, httplib::Response& res) {
    const Response r = svc.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
}

}  // namespace

void Service::listen(const std::string& host, int port) {
  if (!http_) http_ = std::make_unique<Http>();
  route(http_->server, *this);
  if (!http_->server.listen(host, port)) {
    throw Error("cannot listen on " + host + ":" + std::to_string(port));
  }
}

int Service::start_background(const std::string& host) {
  if (http_) throw Error("service already started");
  http_ = std::make_unique<Http>();
  route(http_->server, *this);
  const int port = http_->server.bind_to_any_port(host);
  if (port < 0) throw Error("cannot bind " + host);
  http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
  http_->server.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!http_) return;
  http_->server.stop();
  if (http_->thread.joinable()) http_->thread.join();
  http_.reset();
}

}  // namespace advtext
