#include "advtext/external.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <semaphore>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace advtext {

OracleError::OracleError(const std::string& what, std::string raw_reply)
    : Error(what + " (raw reply: \"" + raw_reply + "\")"), raw_(std::move(raw_reply)) {}

ConfVector check_oracle_probs(ConfVector probs, std::size_t classes, const std::string& raw) {
  if (probs.size() != classes) {
    throw OracleError("oracle returned " + std::to_string(probs.size()) + " probabilities for " +
                          std::to_string(classes) + " classes",
                      raw);
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw OracleError("oracle returned an invalid probability", raw);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw OracleError("oracle probabilities sum to " + std::to_string(sum), raw);
  }
  for (double& p : probs) p /= sum;
  return probs;
}

ConfVector parse_oracle_reply(const std::string& reply, std::size_t classes) {
  std::istringstream in(reply);
  ConfVector probs;
  std::string field;
  while (in >> field) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
      throw OracleError("oracle reply has a non-numeric field '" + field + "'", reply);
    }
    probs.push_back(v);
  }
  return check_oracle_probs(std::move(probs), classes, reply);
}

namespace {

std::string single_line(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

void check_limits(const OracleLimits& limits) {
  if (limits.max_in_flight == 0 || limits.max_in_flight > 1024) {
    throw InvalidArgument("max in-flight requests must lie in [1, 1024]");
  }
}

class SubprocessTransport : public OracleTransport {
 public:
  SubprocessTransport(const std::string& command, std::size_t classes, std::chrono::milliseconds timeout)
      : classes_(classes), timeout_(timeout) {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) throw Error("pipe() failed: " + std::string(strerror(errno)));
    pid_ = fork();
    if (pid_ < 0) throw Error("fork() failed: " + std::string(strerror(errno)));
    if (pid_ == 0) {
      signal(SIGTERM, SIG_DFL);
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    signal(SIGPIPE, SIG_IGN);
  }

  ~SubprocessTransport() override {
    if (write_fd_ >= 0) close(write_fd_);
    if (read_fd_ >= 0) close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      if (waitpid(pid_, &status, WNOHANG) == 0) {
        kill(pid_, SIGTERM);
        waitpid(pid_, &status, 0);
      }
    }
  }

  ConfVector request(const std::string& text) override {
    std::lock_guard lock(mu_);
    const std::string line = single_line(text) + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = write(write_fd_, line.data() + sent, line.size() - sent);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw OracleError("oracle process is unreachable: " + std::string(strerror(errno)), "");
      }
      sent += static_cast<std::size_t>(n);
    }
    const std::string reply = read_line();
    return parse_oracle_reply(reply, classes_);
  }

 private:
  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw OracleError("oracle process timed out", buffer_);
      pollfd pfd{read_fd_, POLLIN, 0};
      const int r = poll(&pfd, 1, static_cast<int>(left.count()));
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) throw OracleError("oracle process timed out", buffer_);
      char chunk[4096];
      const ssize_t n = read(read_fd_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw OracleError("oracle process closed its output", buffer_);
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::size_t classes_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  std::string buffer_;
  std::mutex mu_;
};

class HttpTransport : public OracleTransport {
 public:
  HttpTransport(std::string base_url, std::string remote_model, std::size_t classes,
                std::chrono::milliseconds timeout)
      : base_url_(std::move(base_url)), path_("/models/" + remote_model + "/classify"), classes_(classes),
        timeout_(timeout) {}

  ConfVector request(const std::string& text) override {
    httplib::Client client(base_url_);
    const auto secs = static_cast<time_t>(timeout_.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout_.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    const nlohmann::json body{{"text", text}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) throw OracleError("oracle endpoint unreachable: " + httplib::to_string(res.error()), "");
    if (res->status != 200) {
      throw OracleError("oracle endpoint answered HTTP " + std::to_string(res->status), res->body);
    }
    try {
      const auto reply = nlohmann::json::parse(res->body);
      return check_oracle_probs(reply.at("probs").get<ConfVector>(), classes_, res->body);
    } catch (const nlohmann::json::exception& e) {
      throw OracleError(std::string("malformed oracle reply: ") + e.what(), res->body);
    }
  }

 private:
  std::string base_url_;
  std::string path_;
  std::size_t classes_;
  std::chrono::milliseconds timeout_;
};

}  // namespace

struct ExternalClassifier::State {
  State(std::unique_ptr<OracleTransport> t, std::size_t in_flight)
      : transport(std::move(t)), slots(static_cast<std::ptrdiff_t>(in_flight)) {}
  std::unique_ptr<OracleTransport> transport;
  std::counting_semaphore<1024> slots;
  std::atomic<std::size_t> calls{0};
};

ExternalClassifier::ExternalClassifier(std::string id, std::vector<std::string> classes,
                                       std::unique_ptr<OracleTransport> transport, OracleLimits limits)
    : Classifier(std::move(id), std::move(classes)) {
  if (!transport) throw InvalidArgument("external classifier needs a transport");
  check_limits(limits);
  state_ = std::make_unique<State>(std::move(transport), limits.max_in_flight);
}

ExternalClassifier::~ExternalClassifier() = default;

std::shared_ptr<ExternalClassifier> ExternalClassifier::subprocess(std::string id, std::vector<std::string> classes,
                                                                   const std::string& command, OracleLimits limits) {
  check_limits(limits);
  auto transport = std::make_unique<SubprocessTransport>(command, classes.size(), limits.timeout);
  return std::make_shared<ExternalClassifier>(std::move(id), std::move(classes), std::move(transport), limits);
}

std::shared_ptr<ExternalClassifier> ExternalClassifier::http(std::string id, std::vector<std::string> classes,
                                                             const std::string& base_url,
                                                             const std::string& remote_model, OracleLimits limits) {
  auto transport = std::make_unique<HttpTransport>(base_url, remote_model, classes.size(), limits.timeout);
  return std::make_shared<ExternalClassifier>(std::move(id), std::move(classes), std::move(transport), limits);
}

ConfVector ExternalClassifier::classify(std::string_view text) const {
  state_->slots.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{state_->slots};
  ++state_->calls;
  return state_->transport->request(std::string(text));
}

std::size_t ExternalClassifier::calls() const { return state_->calls.load(); }

void serve_line_protocol(const Classifier& model, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    const ConfVector conf = model.classify(line);
    for (std::size_t i = 0; i < conf.size(); ++i) {
      if (i) out << ' ';
      out << std::setprecision(17) << conf[i];
    }
    out << '\n' << std::flush;
  }
}

}  // namespace advtext
