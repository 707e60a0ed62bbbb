#include <doctest.h>

#include <system_error>

#include "gaze2aoi/process.hpp"
#include "support.hpp"

using namespace gaze2aoi;

TEST_CASE("split_command groups quoted words") {
  CHECK(split_command("a b  c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_command("x 'two words' \"and three\"") == std::vector<std::string>{"x", "two words", "and three"});
  CHECK(split_command("'' z") == std::vector<std::string>{"", "z"});
  CHECK(split_command("   ").empty());
}

TEST_CASE("expand_command replaces known placeholders only") {
  auto out = expand_command({"-s", "{width}x{height}", "{unknown}", "{output}"},
                            {{"width", "64"}, {"height", "48"}, {"output", "o.mp4"}});
  CHECK(out == std::vector<std::string>{"-s", "64x48", "{unknown}", "o.mp4"});
}

TEST_CASE("find_executable searches PATH and explicit paths") {
  CHECK(find_executable("sh").has_value());
  CHECK_FALSE(find_executable("definitely-not-a-program-xyz").has_value());
  CHECK(find_executable("/bin/sh").has_value());
  CHECK_FALSE(find_executable("/nonexistent/sh").has_value());
  CHECK_FALSE(find_executable("").has_value());
}

TEST_CASE("Subprocess pipes stdin to stdout and reports exit status") {
  Subprocess::Options opts;
  opts.in = Subprocess::Stream::pipe();
  opts.out = Subprocess::Stream::pipe();
  opts.err = Subprocess::Stream::pipe();
  Subprocess cat({"sh", "-c", "cat; echo oops >&2; exit 3"}, opts);
  REQUIRE(cat.write_all("line one\nline two"));
  cat.close_stdin();
  std::vector<std::string> lines;
  std::string err;
  cat.pump([&](std::string_view l) { lines.emplace_back(l); }, err);
  CHECK(cat.wait() == 3);
  CHECK(lines == std::vector<std::string>{"line one", "line two"});
  CHECK(err == "oops\n");
}

TEST_CASE("Subprocess signals a missing executable with ENOENT") {
  try {
    Subprocess p({"definitely-not-a-program-xyz"}, {});
    FAIL("spawn should have failed");
  } catch (const std::system_error& e) {
    CHECK(e.code() == std::errc::no_such_file_or_directory);
  }
}

TEST_CASE("Subprocess reports signals as 128 + signo and reaps on destruction") {
  Subprocess p({"sh", "-c", "kill -TERM $$"}, {});
  CHECK(p.wait() == 128 + 15);
  {
    Subprocess sleeper({"sleep", "30"}, {});  // killed by the destructor
  }
}

TEST_CASE("Subprocess redirects to files") {
  support::TempDir dir;
  Subprocess::Options opts;
  opts.out = Subprocess::Stream::to_file(dir / "out.txt");
  Subprocess p({"sh", "-c", "printf hello"}, opts);
  CHECK(p.wait() == 0);
  CHECK(read_file(dir / "out.txt") == "hello");
}
