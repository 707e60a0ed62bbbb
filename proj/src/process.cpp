#include "gaze2aoi/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <mutex>
#include <system_error>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace gaze2aoi {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

[[noreturn]] void throw_errno(int err, const std::string& what) {
  throw std::system_error(err, std::generic_category(), what);
}

}  // namespace

std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> argv;
  std::string word;
  bool in_word = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        word.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) argv.push_back(std::move(word));
      word.clear();
      in_word = false;
    } else {
      word.push_back(c);
      in_word = true;
    }
  }
  if (in_word) argv.push_back(std::move(word));
  return argv;
}

std::vector<std::string> expand_command(const std::vector<std::string>& argv,
                                        const std::map<std::string, std::string>& values) {
  std::vector<std::string> out;
  out.reserve(argv.size());
  for (const auto& arg : argv) {
    std::string expanded;
    for (std::size_t i = 0; i < arg.size();) {
      if (arg[i] == '{') {
        auto close = arg.find('}', i);
        if (close != std::string::npos) {
          auto it = values.find(arg.substr(i + 1, close - i - 1));
          if (it != values.end()) {
            expanded += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      expanded.push_back(arg[i++]);
    }
    out.push_back(std::move(expanded));
  }
  return out;
}

std::optional<std::filesystem::path> find_executable(const std::string& name) {
  if (name.empty()) return std::nullopt;
  if (name.find('/') != std::string::npos) {
    if (::access(name.c_str(), X_OK) == 0) return std::filesystem::path(name);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  std::string_view dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
  while (true) {
    auto colon = dirs.find(':');
    std::filesystem::path dir(std::string(dirs.substr(0, colon)));
    if (dir.empty()) dir = ".";
    auto candidate = dir / name;
    if (::access(candidate.c_str(), X_OK) == 0 && !std::filesystem::is_directory(candidate)) return candidate;
    if (colon == std::string_view::npos) break;
    dirs.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

Subprocess::Subprocess(const std::vector<std::string>& argv, const Options& options) {
  static std::once_flag sigpipe_once;
  std::call_once(sigpipe_once, [] { std::signal(SIGPIPE, SIG_IGN); });
  if (argv.empty()) throw_errno(EINVAL, "empty command");

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  struct Guard {
    posix_spawn_file_actions_t* a;
    std::vector<int> fds;
    ~Guard() {
      posix_spawn_file_actions_destroy(a);
      for (int fd : fds) ::close(fd);
    }
  } guard{&actions, {}};

  // Parent keeps `mine`; the child's end is dup'd onto `target`.
  auto setup = [&](const Stream& s, int target, bool child_reads, int& mine) {
    switch (s.kind) {
      case Stream::Kind::Inherit:
        return;
      case Stream::Kind::Null:
        posix_spawn_file_actions_addopen(&actions, target, "/dev/null", child_reads ? O_RDONLY : O_WRONLY, 0);
        return;
      case Stream::Kind::File:
        posix_spawn_file_actions_addopen(&actions, target, s.file.c_str(),
                                         child_reads ? O_RDONLY : (O_WRONLY | O_CREAT | O_TRUNC), 0644);
        return;
      case Stream::Kind::Pipe: {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0) throw_errno(errno, "pipe");
        int child_end = child_reads ? fds[0] : fds[1];
        mine = child_reads ? fds[1] : fds[0];
        guard.fds.push_back(child_end);
        posix_spawn_file_actions_adddup2(&actions, child_end, target);
        return;
      }
    }
  };
  try {
    setup(options.in, STDIN_FILENO, true, in_);
    setup(options.out, STDOUT_FILENO, false, out_);
    setup(options.err, STDERR_FILENO, false, err_);
  } catch (...) {
    close_fd(in_);
    close_fd(out_);
    close_fd(err_);
    throw;
  }

  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  int rc = posix_spawnp(&pid_, cargv[0], &actions, nullptr, cargv.data(), environ);
  if (rc != 0) {
    close_fd(in_);
    close_fd(out_);
    close_fd(err_);
    throw_errno(rc, "spawn " + argv[0]);
  }
}

Subprocess::Subprocess(Subprocess&& o) noexcept
    : pid_(o.pid_), in_(o.in_), out_(o.out_), err_(o.err_), reaped_(o.reaped_), status_(o.status_) {
  o.pid_ = -1;
  o.in_ = o.out_ = o.err_ = -1;
  o.reaped_ = true;
}

Subprocess::~Subprocess() {
  close_fd(in_);
  close_fd(out_);
  close_fd(err_);
  if (pid_ > 0 && !reaped_) {
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

bool Subprocess::write_all(std::string_view bytes) {
  while (!bytes.empty()) {
    ssize_t n = ::write(in_, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::size_t Subprocess::read_exact(char* buffer, std::size_t size) {
  std::size_t got = 0;
  while (got < size) {
    ssize_t n = ::read(out_, buffer + got, size - got);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;
    got += static_cast<std::size_t>(n);
  }
  return got;
}

void Subprocess::close_stdin() { close_fd(in_); }

void Subprocess::pump(const std::function<void(std::string_view)>& on_stdout_line, std::string& err_text) {
  std::string pending;
  char buf[4096];
  while (out_ >= 0 || err_ >= 0) {
    pollfd fds[2];
    nfds_t n = 0;
    if (out_ >= 0) fds[n++] = {out_, POLLIN, 0};
    if (err_ >= 0) fds[n++] = {err_, POLLIN, 0};
    if (::poll(fds, n, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (nfds_t i = 0; i < n; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
      if (got < 0 && errno == EINTR) continue;
      const bool is_out = fds[i].fd == out_;
      if (got <= 0) {
        close_fd(is_out ? out_ : err_);
        continue;
      }
      if (!is_out) {
        err_text.append(buf, static_cast<std::size_t>(got));
        continue;
      }
      pending.append(buf, static_cast<std::size_t>(got));
      std::size_t start = 0;
      for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
        on_stdout_line(std::string_view(pending).substr(start, nl - start));
        start = nl + 1;
      }
      pending.erase(0, start);
    }
  }
  if (!pending.empty()) on_stdout_line(pending);
}

int Subprocess::wait() {
  if (reaped_) return status_;
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0) {
    if (errno != EINTR) {
      status_ = -1;
      reaped_ = true;
      return status_;
    }
  }
  reaped_ = true;
  if (WIFEXITED(status)) {
    status_ = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    status_ = 128 + WTERMSIG(status);
  }
  return status_;
}

}  // namespace gaze2aoi
