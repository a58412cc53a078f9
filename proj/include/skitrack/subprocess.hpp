///////////////////////////////////////////////////////////////////////////////
// subprocess.hpp: TrackerClient that talks to an external backend process
// over stdin/stdout using the line-delimited JSON protocol (protocol.hpp).
//
// The backend is spawned lazily on the first session and reused for later
// sessions. Any violation kills the backend; the next session respawns it.
// POSIX only.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "skitrack/clients.hpp"

namespace skitrack
{

/// Environment variable that overrides the configured backend command.
inline constexpr const char* kBackendEnvVar = "SKITRACK_BACKEND";

struct SubprocessConfig
{
  /// argv of the backend; argv[0] is looked up on PATH.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{60000};
  /// When false, records are passed through unchecked (used by the
  /// conformance suite to observe raw backend behaviour).
  bool enforce_contract = true;
};

/// Splits a command line on whitespace. No quoting support.
inline std::vector<std::string> split_command(const std::string& cmd)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : cmd)
  {
    if (c == ' ' || c == '\t')
    {
      if (!cur.empty())
      {
        out.push_back(std::move(cur));
        cur.clear();
      }
    }
    else
    {
      cur.push_back(c);
    }
  }
  if (!cur.empty())
  {
    out.push_back(std::move(cur));
  }
  return out;
}

/// Applies the SKITRACK_BACKEND override, if set.
inline SubprocessConfig with_env_override(SubprocessConfig cfg)
{
  if (const char* env = std::getenv(kBackendEnvVar); env && *env)
  {
    cfg.command = split_command(env);
  }
  return cfg;
}

class SubprocessTracker : public TrackerClient
{
public:
  explicit SubprocessTracker(SubprocessConfig cfg) : cfg_(std::move(cfg))
  {
    if (cfg_.command.empty())
    {
      throw ConfigError("subprocess tracker: empty backend command");
    }
  }
  ~SubprocessTracker() override { shutdown(); }

  SubprocessTracker(const SubprocessTracker&) = delete;
  SubprocessTracker& operator=(const SubprocessTracker&) = delete;

  std::string name() const override { return "subprocess:" + cfg_.command.front(); }

  void start(const SessionRequest& request) override
  {
    validate(request);
    if (pid_ <= 0)
    {
      spawn();
    }
    request_ = request;
    validator_.emplace(request);
    finished_ = false;
    last_done_ = nlohmann::json();
    deadline_ = std::chrono::steady_clock::now() + cfg_.timeout;
    send_line(protocol::encode_request(request));
  }

  std::optional<FrameRecord> step() override
  {
    if (finished_ || !validator_)
    {
      return std::nullopt;
    }
    const std::string line = read_line();
    protocol::Response resp;
    try
    {
      resp = protocol::decode_response(line);
    }
    catch (const InputError& e)
    {
      fail(Violation::protocol, e.what());
    }
    if (auto* done = std::get_if<protocol::Done>(&resp))
    {
      finished_ = true;
      last_done_ = done->payload;
      if (cfg_.enforce_contract)
      {
        try
        {
          validator_->finish();
        }
        catch (const ClientError& e)
        {
          fail(e.kind(), e.what());
        }
      }
      return std::nullopt;
    }
    if (auto* err = std::get_if<protocol::BackendFailure>(&resp))
    {
      fail(Violation::protocol, "backend reported error: " + err->message);
    }
    FrameRecord rec = std::get<FrameRecord>(resp);
    if (cfg_.enforce_contract)
    {
      try
      {
        validator_->check(rec);
      }
      catch (const ClientError& e)
      {
        fail(e.kind(), e.what());
      }
    }
    return rec;
  }

  /// Payload of the most recent "done" line.
  const nlohmann::json& last_done() const { return last_done_; }
  const std::string& stderr_text() const { return stderr_buf_; }

private:
  [[noreturn]] void fail(Violation kind, const std::string& what)
  {
    shutdown();
    std::string msg = what;
    if (!stderr_buf_.empty())
    {
      msg += "\nbackend stderr:\n" + stderr_buf_;
    }
    finished_ = true;
    throw ClientError(kind, msg);
  }

  void spawn()
  {
    int in_pair[2];
    int out_pipe[2];
    int err_pipe[2];
    if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0)
    {
      throw ClientError(Violation::backend_exit, "socketpair failed: " + std::string(std::strerror(errno)));
    }
    if (pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(err_pipe, O_CLOEXEC) != 0)
    {
      throw ClientError(Violation::backend_exit, "pipe failed: " + std::string(std::strerror(errno)));
    }

    std::vector<char*> argv;
    for (auto& a : cfg_.command)
    {
      argv.push_back(a.data());
    }
    argv.push_back(nullptr);

    const pid_t pid = fork();
    if (pid < 0)
    {
      throw ClientError(Violation::backend_exit, "fork failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0)
    {
      dup2(in_pair[1], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      dup2(err_pipe[1], STDERR_FILENO);
      execvp(argv[0], argv.data());
      const char* msg = "exec failed: ";
      (void)!write(STDERR_FILENO, msg, std::strlen(msg));
      (void)!write(STDERR_FILENO, argv[0], std::strlen(argv[0]));
      (void)!write(STDERR_FILENO, "\n", 1);
      _exit(127);
    }
    close(in_pair[1]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    pid_ = pid;
    in_fd_ = in_pair[0];
    out_fd_ = out_pipe[0];
    err_fd_ = err_pipe[0];
    out_buf_.clear();
    stderr_buf_.clear();
  }

  void send_line(const std::string& line)
  {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size())
    {
      const ssize_t n = ::send(in_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0)
      {
        if (errno == EINTR)
        {
          continue;
        }
        drain_stderr(std::chrono::milliseconds(100));
        fail(Violation::backend_exit, "cannot write request to backend: " + std::string(std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line()
  {
    for (;;)
    {
      if (const auto pos = out_buf_.find('\n'); pos != std::string::npos)
      {
        std::string line = out_buf_.substr(0, pos);
        out_buf_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r')
        {
          line.pop_back();
        }
        if (line.empty())
        {
          continue;
        }
        return line;
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline_)
      {
        fail(Violation::timeout, "no complete response within " + std::to_string(cfg_.timeout.count()) + " ms");
      }
      const int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline_ - now).count() + 1);
      pollfd fds[2] = {{out_fd_, POLLIN, 0}, {err_fd_, POLLIN, 0}};
      const nfds_t nfds = err_fd_ >= 0 ? 2 : 1;
      const int rc = ::poll(fds, nfds, wait_ms);
      if (rc < 0)
      {
        if (errno == EINTR)
        {
          continue;
        }
        fail(Violation::backend_exit, "poll failed: " + std::string(std::strerror(errno)));
      }
      if (nfds == 2 && (fds[1].revents & (POLLIN | POLLHUP)))
      {
        if (!read_stderr_chunk())
        {
          close(err_fd_);
          err_fd_ = -1;
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP))
      {
        char buf[4096];
        const ssize_t n = ::read(out_fd_, buf, sizeof buf);
        if (n > 0)
        {
          out_buf_.append(buf, static_cast<std::size_t>(n));
        }
        else if (n == 0)
        {
          drain_stderr(std::chrono::milliseconds(200));
          fail(Violation::backend_exit, "backend closed its output mid-session" + exit_status_suffix());
        }
      }
    }
  }

  bool read_stderr_chunk()
  {
    char buf[4096];
    const ssize_t n = ::read(err_fd_, buf, sizeof buf);
    if (n <= 0)
    {
      return false;
    }
    if (stderr_buf_.size() < 65536)
    {
      stderr_buf_.append(buf, static_cast<std::size_t>(n));
    }
    return true;
  }

  void drain_stderr(std::chrono::milliseconds budget)
  {
    const auto until = std::chrono::steady_clock::now() + budget;
    while (err_fd_ >= 0 && std::chrono::steady_clock::now() < until)
    {
      pollfd p{err_fd_, POLLIN, 0};
      if (::poll(&p, 1, 20) <= 0)
      {
        continue;
      }
      if (!read_stderr_chunk())
      {
        close(err_fd_);
        err_fd_ = -1;
      }
    }
  }

  std::string exit_status_suffix()
  {
    if (pid_ <= 0)
    {
      return "";
    }
    int status = 0;
    for (int i = 0; i < 50; ++i)
    {
      const pid_t r = waitpid(pid_, &status, WNOHANG);
      if (r == pid_)
      {
        pid_ = -1;
        if (WIFEXITED(status))
        {
          return " (exit status " + std::to_string(WEXITSTATUS(status)) + ")";
        }
        if (WIFSIGNALED(status))
        {
          return " (killed by signal " + std::to_string(WTERMSIG(status)) + ")";
        }
        return "";
      }
      usleep(10000);
    }
    return "";
  }

  void shutdown()
  {
    for (int* fd : {&in_fd_, &out_fd_, &err_fd_})
    {
      if (*fd >= 0)
      {
        close(*fd);
        *fd = -1;
      }
    }
    if (pid_ > 0)
    {
      int status = 0;
      for (int i = 0; i < 20; ++i)
      {
        if (waitpid(pid_, &status, WNOHANG) == pid_)
        {
          pid_ = -1;
          return;
        }
        usleep(5000);
      }
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  SubprocessConfig cfg_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  int err_fd_ = -1;
  std::string out_buf_;
  std::string stderr_buf_;
  std::optional<SessionRequest> request_;
  std::optional<SessionValidator> validator_;
  bool finished_ = true;
  nlohmann::json last_done_;
  std::chrono::steady_clock::time_point deadline_{};
};

}  // namespace skitrack
