#pragma once

// JSON-over-HTTP API. Requests are dispatched by Service::handle, which the
// HTTP listener wraps; tests call handle directly. See docs/API.md.

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "advtext/attack.hpp"

namespace advtext {

struct Response {
  int status = 200;
  std::string body;  // JSON
};

class Service {
 public:
  explicit Service(PerturbLexicons lexicons, AttackConfig defaults = {});
  ~Service();

  /// Registers a model under its id, with optional HTP tables for suggestions.
  void add_model(ClassifierHandle model, HtpTable htps = {});

  Response handle(const std::string& method, const std::string& path, const std::string& body);

  /// Blocks serving HTTP until stop() is called from another thread.
  void listen(const std::string& host, int port);
  /// Binds to an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Session;
  struct ModelEntry {
    ClassifierHandle model;
    HtpTable htps;
  };

  const ModelEntry& model_entry(const std::string& id) const;
  std::shared_ptr<Session> session(const std::string& id) const;

  Response classify(const std::string& model, const std::string& body);
  Response saliency(const std::string& model, const std::string& body);
  Response create_session(const std::string& body);
  Response session_view(const std::string& id);
  Response suggest(const std::string& id, const std::string& body);
  Response apply(const std::string& id, const std::string& body);
  Response undo(const std::string& id);
  Response htp(const std::string& model, const std::string& cls);
  Response models() const;

  PerturbLexicons lex_;
  AttackConfig defaults_;
  std::map<std::string, ModelEntry> models_;
  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_session_ = 1;

  struct Http;
  std::unique_ptr<Http> http_;
};

}  // namespace advtext
