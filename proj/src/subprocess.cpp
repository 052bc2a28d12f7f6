// Line-delimited JSON exchange with a short-lived evaluator child process.
//
// One child per evaluation: spawn, write the request line, close its stdin,
// read a single response line, reap. The child sees DSE_REQUEST_TIMEOUT_S.

#include "dse/errors.hpp"
#include "dse/evaluation.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <optional>
#include <utility>
#include <string>
#include <thread>
#include <vector>

extern char **environ;

namespace dse {

namespace {

using Clock = std::chrono::steady_clock;

// Reap grace after the response arrived or the deadline passed.
constexpr auto kExitGrace = std::chrono::milliseconds(500);

class Fd
{
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd &) = delete;
  Fd &operator=(const Fd &) = delete;
  Fd(Fd &&o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd &operator=(Fd &&o) noexcept
  {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int  get() const { return fd_; }
  void reset()
  {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe()
{
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0)
    throw ProcessError(std::string("pipe: ") + std::strerror(errno), -1);
  return {Fd(fds[0]), Fd(fds[1])};
}

void ignore_sigpipe()
{
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::vector<std::string> child_environment(double timeout_s)
{
  constexpr std::string_view key = "DSE_REQUEST_TIMEOUT_S=";
  std::vector<std::string>   env;
  for (char **e = environ; e && *e; ++e)
    if (std::string_view(*e).substr(0, key.size()) != key)
      env.emplace_back(*e);
  env.push_back(std::string(key) + std::to_string(timeout_s));
  return env;
}

std::vector<char *> c_array(std::vector<std::string> &strings)
{
  std::vector<char *> out;
  out.reserve(strings.size() + 1);
  for (auto &s : strings)
    out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

class Child
{
public:
  explicit Child(pid_t pid) : pid_(pid) {}
  Child(const Child &) = delete;
  Child &operator=(const Child &) = delete;
  ~Child()
  {
    if (pid_ > 0)
    {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  // Returns the wait status, or nullopt if still running at `until`.
  std::optional<int> wait_until(Clock::time_point until)
  {
    while (true)
    {
      int         status = 0;
      const pid_t r      = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_)
      {
        pid_ = -1;
        return status;
      }
      if (r < 0 && errno != EINTR)
      {
        pid_ = -1;
        return 0;
      }
      if (Clock::now() >= until)
        return std::nullopt;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

  int kill_and_reap()
  {
    ::kill(pid_, SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR)
    {
    }
    pid_ = -1;
    return status;
  }

private:
  pid_t pid_;
};

void write_all(int fd, std::string_view data)
{
  while (!data.empty())
  {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0)
    {
      if (errno == EINTR)
        continue;
      return;  // child closed stdin early; its exit status will tell
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

enum class ReadOutcome
{
  line,
  eof,
  deadline,
};

ReadOutcome read_line(int fd, Clock::time_point deadline, std::string &line)
{
  std::string buffer;
  char        chunk[4096];
  while (true)
  {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0)
      return ReadOutcome::deadline;

    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count() + 1, 1 << 30)));
    if (ready < 0)
    {
      if (errno == EINTR)
        continue;
      throw ProcessError(std::string("poll: ") + std::strerror(errno), -1);
    }
    if (ready == 0)
      continue;

    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0)
    {
      if (errno == EINTR || errno == EAGAIN)
        continue;
      throw ProcessError(std::string("read: ") + std::strerror(errno), -1);
    }
    if (n == 0)
    {
      line = std::move(buffer);
      return ReadOutcome::eof;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
    if (auto pos = buffer.find('\n'); pos != std::string::npos)
    {
      line = buffer.substr(0, pos);
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      return ReadOutcome::line;
    }
  }
}

std::string describe_status(int status)
{
  if (WIFEXITED(status))
    return "exited with status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status))
    return "killed by signal " + std::to_string(WTERMSIG(status));
  return "ended abnormally";
}

bool status_ok(int status)
{
  return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

}  // namespace

EvaluationRecord evaluate_external(const Theta &theta, const EvaluatorConfig &config, const ModelConfig &model)
{
  if (config.mode != EvaluatorMode::process || !config.command || config.command->empty())
    throw InvalidArgument("evaluate_external requires process mode with a command");
  ignore_sigpipe();

  const auto start    = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(config.timeout_s));

  auto [stdin_read, stdin_write]   = make_pipe();
  auto [stdout_read, stdout_write] = make_pipe();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, stdin_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, stdout_write.get(), STDOUT_FILENO);

  std::vector<std::string> argv_strings = *config.command;
  std::vector<std::string> env_strings  = child_environment(config.timeout_s);
  auto                     argv         = c_array(argv_strings);
  auto                     envp         = c_array(env_strings);

  pid_t     pid = 0;
  const int rc  = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0)
    throw ProcessError("cannot launch '" + argv_strings[0] + "': " + std::strerror(rc), -1);

  Child child(pid);
  stdin_read.reset();
  stdout_write.reset();

  write_all(stdin_write.get(), make_request(theta, model, config.request_metadata).dump() + "\n");
  stdin_write.reset();

  std::string line;
  const auto  outcome = read_line(stdout_read.get(), deadline, line);
  if (outcome == ReadOutcome::deadline)
  {
    child.kill_and_reap();
    throw Timeout("evaluator produced no response within " + std::to_string(config.timeout_s) + " s");
  }

  const auto reap_by =
      outcome == ReadOutcome::line ? Clock::now() + kExitGrace : std::max(deadline, Clock::now()) + kExitGrace;
  auto status = child.wait_until(reap_by);
  if (!status)
  {
    child.kill_and_reap();
    // A complete response followed by a lingering child is still usable.
    if (outcome != ReadOutcome::line)
      throw Timeout("evaluator did not exit within " + std::to_string(config.timeout_s) + " s");
  }
  else if (!status_ok(*status))
  {
    throw ProcessError("evaluator " + describe_status(*status), *status);
  }

  if (outcome == ReadOutcome::eof && line.empty())
    throw ProtocolError("evaluator exited without a response line");
  return parse_response(line, theta, model);
}

}  // namespace dse
