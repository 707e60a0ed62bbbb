// Raw RGB24 "video" helper: a stand-in decoder and encoder for tests.
// A video file is frame_count packed width*height*3 frames, no header.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaze2aoi/files.hpp"
#include "gaze2aoi/gaze_io.hpp"

namespace {

int copy_stream(std::FILE* in, std::FILE* out) {
  std::vector<char> buf(1 << 16);
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), in)) > 0) {
    if (std::fwrite(buf.data(), 1, n, out) != n) return 1;
  }
  return std::ferror(in) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raw RGB24 video helper"};
  app.require_subcommand(1);

  std::string gen_out;
  int width = 64, height = 48;
  std::int64_t frames = 10;
  double fps = 25.0;
  auto* gen = app.add_subcommand("generate", "write a synthetic clip and its .meta.json");
  gen->add_option("--out", gen_out)->required();
  gen->add_option("--width", width);
  gen->add_option("--height", height);
  gen->add_option("--frames", frames);
  gen->add_option("--fps", fps);

  std::string cat_in;
  auto* cat = app.add_subcommand("cat", "decoder: copy a clip to stdout");
  cat->add_option("input", cat_in)->required();

  std::string sink_out;
  auto* sink = app.add_subcommand("sink", "encoder: copy stdin to a file");
  sink->add_option("output", sink_out)->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    std::ofstream f(gen_out, std::ios::binary);
    std::vector<unsigned char> frame(static_cast<std::size_t>(width) * height * 3);
    for (std::int64_t n = 0; n < frames; ++n) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          auto* p = &frame[(static_cast<std::size_t>(y) * width + x) * 3];
          p[0] = static_cast<unsigned char>((x + n) % 64);
          p[1] = static_cast<unsigned char>((y * 2) % 64);
          p[2] = static_cast<unsigned char>((n * 7) % 64);
        }
      }
      f.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
    }
    if (!f) return 1;
    gaze2aoi::VideoMeta meta;
    meta.fps = fps;
    meta.width_px = width;
    meta.height_px = height;
    meta.frame_count = frames;
    gaze2aoi::write_file_atomic(gen_out + ".meta.json", gaze2aoi::write_video_meta_json(meta));
    return 0;
  }
  if (cat->parsed()) {
    std::FILE* in = std::fopen(cat_in.c_str(), "rb");
    if (!in) {
      std::cerr << "rawvideo: cannot open " << cat_in << "\n";
      return 1;
    }
    int rc = copy_stream(in, stdout);
    std::fclose(in);
    return rc;
  }
  std::FILE* out = std::fopen(sink_out.c_str(), "wb");
  if (!out) {
    std::cerr << "rawvideo: cannot create " << sink_out << "\n";
    return 1;
  }
  int rc = copy_stream(stdin, out);
  return std::fclose(out) != 0 ? 1 : rc;
}
