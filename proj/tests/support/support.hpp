#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "gaze2aoi/config.hpp"
#include "gaze2aoi/files.hpp"
#include "gaze2aoi/process.hpp"

namespace support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(GAZE2AOI_FIXTURES_DIR) / name; }
inline fs::path tool(const std::string& name) { return fs::path(GAZE2AOI_TOOLS_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("gaze2aoi-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

inline RunResult run(const std::vector<std::string>& argv) {
  gaze2aoi::Subprocess::Options opts;
  opts.out = gaze2aoi::Subprocess::Stream::pipe();
  opts.err = gaze2aoi::Subprocess::Stream::pipe();
  gaze2aoi::Subprocess proc(argv, opts);
  RunResult r;
  proc.pump([&](std::string_view line) { (r.out += line) += '\n'; }, r.err);
  r.status = proc.wait();
  return r;
}

inline std::vector<std::string> mock_adapter_cmd(const fs::path& fixture_csv = fixture("s01_fixture_detections.csv")) {
  return {tool("gaze2aoi-mock-adapter").string(), "--fixture", fixture_csv.string(), "--manifest",
          fixture("classes.csv").string()};
}

inline std::string join(const std::vector<std::string>& argv) {
  std::string s;
  for (const auto& a : argv) {
    if (!s.empty()) s += ' ';
    s += "'" + a + "'";
  }
  return s;
}

/// Config wired to the in-repo mock adapter and raw-video tools.
inline gaze2aoi::Config test_config() {
  gaze2aoi::Config c;
  c.adapter_cmd = mock_adapter_cmd();
  c.decoder_cmd = {tool("gaze2aoi-rawvideo").string(), "cat", "{input}"};
  c.encoder_cmd = {tool("gaze2aoi-rawvideo").string(), "sink", "{output}"};
  return c;
}

inline std::string config_text(const gaze2aoi::Config& c) {
  return "adapter_cmd = " + join(c.adapter_cmd) + "\n" + "decoder_cmd = " + join(c.decoder_cmd) + "\n" +
         "encoder_cmd = " + join(c.encoder_cmd) + "\n";
}

/// The bundled session laid out in `dir`: s01_video.rgb (+ .meta.json) and
/// s01_gaze.csv.
inline void stage_session_inputs(const fs::path& dir) {
  auto r = run({tool("gaze2aoi-rawvideo").string(), "generate", "--out", (dir / "s01_video.rgb").string(), "--width",
                "160", "--height", "120", "--frames", "100", "--fps", "25"});
  if (r.status != 0) throw std::runtime_error("rawvideo generate failed: " + r.err);
  fs::copy_file(fixture("s01_gaze.csv"), dir / "s01_gaze.csv", fs::copy_options::overwrite_existing);
}

}  // namespace support
