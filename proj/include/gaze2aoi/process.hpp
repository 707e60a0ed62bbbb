#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace gaze2aoi {

/// Splits a command line into argv. Single and double quotes group words;
/// no other shell syntax is interpreted.
std::vector<std::string> split_command(std::string_view command);

/// Replaces `{key}` placeholders in every argument.
std::vector<std::string> expand_command(const std::vector<std::string>& argv,
                                        const std::map<std::string, std::string>& values);

/// Resolves `name` the way execvp would; nullopt when nothing executable
/// is found.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Child process with optional pipes. The destructor kills and reaps a child
/// that is still running.
class Subprocess {
 public:
  struct Stream {
    enum class Kind { Inherit, Pipe, Null, File } kind = Kind::Inherit;
    std::filesystem::path file;

    static Stream inherit() { return {}; }
    static Stream pipe() { return {Kind::Pipe, {}}; }
    static Stream null() { return {Kind::Null, {}}; }
    static Stream to_file(std::filesystem::path p) { return {Kind::File, std::move(p)}; }
  };

  struct Options {
    Stream in = Stream::null();
    Stream out = Stream::inherit();
    Stream err = Stream::inherit();
  };

  /// Throws std::system_error; ENOENT when the executable is missing.
  Subprocess(const std::vector<std::string>& argv, const Options& options);
  Subprocess(Subprocess&&) noexcept;
  Subprocess& operator=(Subprocess&&) = delete;
  Subprocess(const Subprocess&) = delete;
  ~Subprocess();

  int stdin_fd() const { return in_; }
  int stdout_fd() const { return out_; }
  int stderr_fd() const { return err_; }

  /// False when the reader went away (EPIPE).
  bool write_all(std::string_view bytes);
  /// Reads exactly `size` bytes unless EOF comes first; returns bytes read.
  std::size_t read_exact(char* buffer, std::size_t size);
  void close_stdin();

  /// Drains stdout line by line and stderr into `err_text` until both close.
  void pump(const std::function<void(std::string_view)>& on_stdout_line, std::string& err_text);

  /// Exit status, or 128 + signal number.
  int wait();
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  int err_ = -1;
  bool reaped_ = false;
  int status_ = 0;
};

}  // namespace gaze2aoi
