#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <map>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "netcut/csv.hpp"
#include "netcut/error.hpp"
#include "netcut/metrics.hpp"
#include "netcut/netmodel.hpp"

extern char** environ;

// Accuracy oracles for trimmed networks. Retraining happens outside this
// library: either the accuracies were recorded beforehand (table backend) or
// a user command trains and scores the TRN on demand (external backend).
namespace netcut {

struct AccuracyTable {
  std::map<std::pair<std::string, std::size_t>, double> entries;
  std::string provenance;
};

// CSV with header `network,cutpoint,accuracy`; accuracies in [0, 1], keys unique.
inline AccuracyTable accuracy_table_from_csv(std::string_view text, const std::string& source = "accuracy table") {
  AccuracyTable t;
  t.provenance = source;
  const auto csv = csv::parse(text, {"network", "cutpoint", "accuracy"}, source);
  for (const auto& r : csv.rows) {
    const auto at = source + ":" + std::to_string(r.line);
    auto cut = csv::to_int(r.cells[1]);
    if (!cut || *cut < 0) throw ValidationError(at + ": invalid cutpoint '" + r.cells[1] + "'");
    auto acc = csv::to_double(r.cells[2]);
    if (!acc) throw ValidationError(at + ": non-numeric accuracy '" + r.cells[2] + "'");
    if (!(*acc >= 0 && *acc <= 1)) throw ValidationError(at + ": accuracy " + r.cells[2] + " outside [0, 1]");
    if (!t.entries.emplace(std::pair{r.cells[0], static_cast<std::size_t>(*cut)}, *acc).second) {
      throw ValidationError(at + ": duplicate key (" + r.cells[0] + ", " + r.cells[1] + ")");
    }
  }
  return t;
}

inline AccuracyTable load_accuracy_table(const std::string& path) {
  return accuracy_table_from_csv(csv::read_file(path), path);
}

enum class EvaluatorBackend { Table, External };

struct EvaluatorConfig {
  EvaluatorBackend backend = EvaluatorBackend::Table;
  // table backend
  std::string table_path;
  bool interpolate = false;
  // external backend: run through /bin/sh -c
  std::string command;
  double timeout_s = 3600;
  std::size_t parallelism = 1;

  void validate() const {
    if (backend == EvaluatorBackend::Table) {
      if (table_path.empty()) throw ConfigError("evaluator: table backend needs 'table_path'");
      if (!command.empty()) throw ConfigError("evaluator: table backend must not set 'command'");
    } else {
      if (command.empty()) throw ConfigError("evaluator: external backend needs 'command'");
      if (!table_path.empty()) throw ConfigError("evaluator: external backend must not set 'table_path'");
      if (!(timeout_s > 0)) throw ConfigError("evaluator: timeout must be > 0");
      if (parallelism == 0) throw ConfigError("evaluator: parallelism must be >= 1");
    }
  }
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual AccuracyScore evaluate(const TrimmedNetworkSpec& trn) const = 0;
};

class TableEvaluator final : public Evaluator {
 public:
  explicit TableEvaluator(AccuracyTable table, bool interpolate = false)
      : table_(std::move(table)), interpolate_(interpolate) {}

  AccuracyScore evaluate(const TrimmedNetworkSpec& trn) const override {
    const auto key = std::pair{trn.source, trn.cutpoint};
    if (auto it = table_.entries.find(key); it != table_.entries.end()) return {it->second, "table"};
    if (interpolate_) {
      // Nearest recorded cutpoints of the same network on either side.
      auto hi = table_.entries.lower_bound(key);
      if (hi != table_.entries.end() && hi->first.first == trn.source && hi != table_.entries.begin()) {
        auto lo = std::prev(hi);
        if (lo->first.first == trn.source) {
          const double x0 = static_cast<double>(lo->first.second), x1 = static_cast<double>(hi->first.second);
          const double w = (static_cast<double>(trn.cutpoint) - x0) / (x1 - x0);
          return {lo->second + w * (hi->second - lo->second), "table-interpolated"};
        }
      }
    }
    throw EvaluatorError(EvaluatorError::Kind::MissingKey,
                         "no recorded accuracy for TRN " + trn.id() + (interpolate_ ? " (no bracketing cutpoints)" : ""));
  }

  const AccuracyTable& table() const { return table_; }

 private:
  AccuracyTable table_;
  bool interpolate_;
};

// Runs `command` per evaluation, writing the TRN spec JSON to its stdin and
// reading one decimal accuracy from its stdout. The child runs in its own
// process group, which is killed when the timeout expires.
class ExternalEvaluator final : public Evaluator {
 public:
  ExternalEvaluator(std::string command, double timeout_s, std::size_t parallelism = 1)
      : command_(std::move(command)),
        timeout_(std::chrono::duration<double>(timeout_s)),
        slots_(std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(
            std::clamp<std::size_t>(parallelism, 1, 1024)))) {}

  AccuracyScore evaluate(const TrimmedNetworkSpec& trn) const override {
    slots_->acquire();
    struct Release {
      std::counting_semaphore<1024>* s;
      ~Release() { s->release(); }
    } release{slots_.get()};
    const auto out = run(to_json(trn).dump() + "\n", trn);
    const auto text = csv::trim(out);
    auto v = csv::to_double(text);
    if (!v) {
      throw EvaluatorError(EvaluatorError::Kind::BadOutput,
                           "evaluator output for TRN " + trn.id() + " is not a number: '" + std::string(text) + "'");
    }
    if (!(*v >= 0 && *v <= 1)) {
      throw EvaluatorError(EvaluatorError::Kind::BadOutput,
                           "evaluator accuracy for TRN " + trn.id() + " outside [0, 1]: " + std::string(text));
    }
    return {*v, "external"};
  }

 private:
  struct Fd {
    int fd = -1;
    ~Fd() { reset(); }
    void reset() {
      if (fd >= 0) ::close(fd);
      fd = -1;
    }
  };

  std::string run(const std::string& input, const TrimmedNetworkSpec& trn) const {
    using clock = std::chrono::steady_clock;
    const auto fail = [&](EvaluatorError::Kind k, const std::string& msg) {
      return EvaluatorError(k, "evaluator for TRN " + trn.id() + ": " + msg);
    };

    int in_p[2], out_p[2];
    if (::pipe2(in_p, O_CLOEXEC) != 0) throw fail(EvaluatorError::Kind::SpawnFailed, std::strerror(errno));
    Fd in_r{in_p[0]}, in_w{in_p[1]};
    if (::pipe2(out_p, O_CLOEXEC) != 0) throw fail(EvaluatorError::Kind::SpawnFailed, std::strerror(errno));
    Fd out_r{out_p[0]}, out_w{out_p[1]};

    // SIGPIPE stays blocked in this thread while we talk to the child; the
    // child gets the caller's original mask.
    sigset_t pipe_set, old_mask;
    sigemptyset(&pipe_set);
    sigaddset(&pipe_set, SIGPIPE);
    pthread_sigmask(SIG_BLOCK, &pipe_set, &old_mask);
    struct MaskGuard {
      sigset_t old;
      sigset_t pipe;
      ~MaskGuard() {
        timespec zero{0, 0};
        while (sigtimedwait(&pipe, nullptr, &zero) > 0) {
        }
        pthread_sigmask(SIG_SETMASK, &old, nullptr);
      }
    } mask_guard{old_mask, pipe_set};

    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, in_r.fd, STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&fa, out_w.fd, STDOUT_FILENO);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK);
    posix_spawnattr_setpgroup(&attr, 0);
    posix_spawnattr_setsigmask(&attr, &old_mask);

    std::string sh = "/bin/sh", dash_c = "-c", cmd = command_;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    pid_t pid = -1;
    const int rc = posix_spawn(&pid, "/bin/sh", &fa, &attr, argv, environ);
    posix_spawn_file_actions_destroy(&fa);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) throw fail(EvaluatorError::Kind::SpawnFailed, std::strerror(rc));
    in_r.reset();
    out_w.reset();

    const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(timeout_);
    auto kill_and_reap = [&] {
      ::kill(-pid, SIGKILL);
      int st = 0;
      while (::waitpid(pid, &st, 0) < 0 && errno == EINTR) {
      }
    };

    ::fcntl(in_w.fd, F_SETFL, O_NONBLOCK);
    std::size_t written = 0;
    std::string output;
    char buf[4096];
    while (out_r.fd >= 0) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0) {
        kill_and_reap();
        throw fail(EvaluatorError::Kind::Timeout, "timed out after " + std::to_string(timeout_.count()) + " s");
      }
      pollfd fds[2] = {{out_r.fd, POLLIN, 0}, {in_w.fd, POLLOUT, 0}};
      const nfds_t nfds = in_w.fd >= 0 ? 2 : 1;
      const int pr = ::poll(fds, nfds, static_cast<int>(std::min<long long>(left, 1000)));
      if (pr < 0 && errno != EINTR) {
        kill_and_reap();
        throw fail(EvaluatorError::Kind::SpawnFailed, std::strerror(errno));
      }
      if (pr <= 0) continue;
      if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const auto n = ::write(in_w.fd, input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if (written == input.size() || (n < 0 && errno != EAGAIN && errno != EINTR)) in_w.reset();
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const auto n = ::read(out_r.fd, buf, sizeof buf);
        if (n > 0) {
          output.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
          out_r.reset();
        }
      }
    }
    in_w.reset();

    // Wait for exit without reaping, so the group id stays valid while
    // leftovers of the command are killed.
    while (true) {
      siginfo_t info{};
      const int w = ::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT);
      if (w == 0 && info.si_pid == pid) break;
      if (w < 0 && errno != EINTR) throw fail(EvaluatorError::Kind::SpawnFailed, std::strerror(errno));
      if (clock::now() >= deadline) {
        kill_and_reap();
        throw fail(EvaluatorError::Kind::Timeout, "timed out after " + std::to_string(timeout_.count()) + " s");
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    ::kill(-pid, SIGKILL);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      const auto code = WIFEXITED(status) ? "exit code " + std::to_string(WEXITSTATUS(status))
                                          : "signal " + std::to_string(WTERMSIG(status));
      throw fail(EvaluatorError::Kind::NonZeroExit, "command failed with " + code);
    }
    return output;
  }

  std::string command_;
  std::chrono::duration<double> timeout_;
  std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

inline std::unique_ptr<Evaluator> make_evaluator(const EvaluatorConfig& cfg) {
  cfg.validate();
  if (cfg.backend == EvaluatorBackend::Table) {
    return std::make_unique<TableEvaluator>(load_accuracy_table(cfg.table_path), cfg.interpolate);
  }
  return std::make_unique<ExternalEvaluator>(cfg.command, cfg.timeout_s, cfg.parallelism);
}

inline AccuracyScore evaluate(const EvaluatorConfig& cfg, const TrimmedNetworkSpec& trn) {
  return make_evaluator(cfg)->evaluate(trn);
}

}  // namespace netcut
