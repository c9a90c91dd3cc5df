#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "rppg/error.hpp"
#include "rppg/types.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Fresh scratch directory under the build tree, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path = fs::temp_directory_path() / ("rppg_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline rppg::Image solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  rppg::Image img(w, h);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    img.rgb[3 * i] = r;
    img.rgb[3 * i + 1] = g;
    img.rgb[3 * i + 2] = b;
  }
  return img;
}

inline rppg::LandmarkSidecar full_frame_landmarks(std::size_t n, int w, int h) {
  rppg::LandmarkSidecar lms;
  for (std::size_t k = 0; k < n; ++k) {
    rppg::LandmarkRecord r;
    r.frame = static_cast<int>(k);
    r.face_bbox = {0, 0, w, h};
    lms.per_frame.push_back(r);
  }
  return lms;
}

}  // namespace testutil

#define CHECK_ERROR_CODE(expr, expected_code)                 \
  do {                                                        \
    bool thrown_ = false;                                     \
    try {                                                     \
      (void)(expr);                                           \
    } catch (const rppg::Error& e_) {                         \
      thrown_ = true;                                         \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what()); \
    }                                                         \
    CHECK_MESSAGE(thrown_, "expected " #expected_code);       \
  } while (0)
