#pragma once

// Classifiers the toolkit cannot introspect. Two transports speak the
// oracle protocol: a child process reading one text per line on stdin and
// answering one line of whitespace-separated probabilities, or the
// classify endpoint of a running service.

#include <chrono>
#include <iosfwd>
#include <memory>
#include <string>

#include "advtext/models.hpp"

namespace advtext {

class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::string raw_reply);
  const std::string& raw_reply() const { return raw_; }

 private:
  std::string raw_;
};

struct OracleLimits {
  std::size_t max_in_flight = 8;
  std::chrono::milliseconds timeout{10000};
};

/// Parses a reply line. A reply whose sum is within 1e-6 of one is
/// renormalized; anything else (wrong count, negative or non-finite values,
/// larger deviation) throws OracleError carrying the raw reply.
ConfVector parse_oracle_reply(const std::string& reply, std::size_t classes);

/// Same acceptance rule for a vector that has already been parsed.
ConfVector check_oracle_probs(ConfVector probs, std::size_t classes, const std::string& raw);

class OracleTransport {
 public:
  virtual ~OracleTransport() = default;
  /// Probabilities for one text. Throws OracleError on any failure.
  virtual ConfVector request(const std::string& text) = 0;
};

class ExternalClassifier : public Classifier {
 public:
  ExternalClassifier(std::string id, std::vector<std::string> classes, std::unique_ptr<OracleTransport> transport,
                     OracleLimits limits = {});
  ~ExternalClassifier() override;

  /// Runs `command` through /bin/sh and talks to it over pipes. Requests
  /// are serialized; newlines in texts are sent as spaces.
  static std::shared_ptr<ExternalClassifier> subprocess(std::string id, std::vector<std::string> classes,
                                                        const std::string& command, OracleLimits limits = {});
  /// POSTs to `{base_url}/models/{remote_model}/classify`.
  static std::shared_ptr<ExternalClassifier> http(std::string id, std::vector<std::string> classes,
                                                  const std::string& base_url, const std::string& remote_model,
                                                  OracleLimits limits = {});

  ModelKind kind() const override { return ModelKind::external; }
  ConfVector classify(std::string_view text) const override;
  std::size_t calls() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Answers the line protocol for `model` until `in` is exhausted.
void serve_line_protocol(const Classifier& model, std::istream& in, std::ostream& out);

}  // namespace advtext
