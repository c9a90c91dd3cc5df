#include <doctest.h>

#include <fstream>
#include <json.hpp>

#include "rppg/io.hpp"
#include "test_util.hpp"

using namespace rppg;
using testutil::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

FrameSequence ramp_sequence(int w, int h, std::size_t n, double fps) {
  FrameSequence seq;
  seq.fps = fps;
  for (std::size_t k = 0; k < n; ++k) {
    Image img(w, h);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>((i * 7 + k * 13) % 256);
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

}  // namespace

TEST_CASE("frame directory of 300 frames at 30 fps lasts 10 s") {
  TempDir dir("io_dir");
  FrameSequence seq;
  seq.fps = 30.0;
  seq.frames.assign(300, testutil::solid(64, 64, 10, 20, 30));
  io::write_frame_directory(seq, dir.path);
  const auto back = io::load_frame_sequence(dir.path);
  CHECK(back.frame_count() == 300);
  CHECK(back.width() == 64);
  CHECK(back.duration_s() == doctest::Approx(10.0));
  CHECK(back.frames[299] == seq.frames[299]);
}

TEST_CASE("manifest errors") {
  TempDir dir("io_manifest");
  SUBCASE("missing manifest") { CHECK_ERROR_CODE(io::load_frame_sequence(dir.path), ErrorCode::MissingManifest); }
  SUBCASE("fps zero") {
    FrameSequence seq;
    seq.fps = 30.0;
    seq.frames.assign(2, testutil::solid(4, 4, 1, 2, 3));
    io::write_frame_directory(seq, dir.path);
    write_text(dir.path / "manifest.json", R"({"fps": 0, "width": 4, "height": 4, "count": 2})");
    CHECK_ERROR_CODE(io::load_frame_sequence(dir.path), ErrorCode::NonPositiveFps);
  }
  SUBCASE("frame size differs") {
    FrameSequence seq;
    seq.fps = 30.0;
    seq.frames.assign(2, testutil::solid(4, 4, 1, 2, 3));
    io::write_frame_directory(seq, dir.path);
    io::write_ppm(testutil::solid(5, 4, 1, 2, 3), dir.path / io::frame_file_name(1));
    CHECK_ERROR_CODE(io::load_frame_sequence(dir.path), ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("raw stream payload size is w*h*3*n") {
  TempDir dir("io_raw");
  const auto seq = ramp_sequence(8, 8, 60, 30.0);
  const auto file = dir.path / "clip.raw";
  io::write_raw_stream(seq, file);
  CHECK(std::filesystem::file_size(file) == io::kRawHeaderBytes + 8u * 8u * 3u * 60u);

  const auto back = io::load_frame_sequence(file);
  REQUIRE(back.frame_count() == 60);
  CHECK(back.fps == doctest::Approx(30.0));
  for (std::size_t k = 0; k < 60; ++k) CHECK(back.frames[k] == seq.frames[k]);

  SUBCASE("truncated payload") {
    std::string bytes = io::read_file(file);
    bytes.pop_back();
    write_text(file, bytes);
    CHECK_ERROR_CODE(io::load_frame_sequence(file), ErrorCode::MalformedFile);
  }
}

TEST_CASE("raw round trip is bit identical for random sizes") {
  TempDir dir("io_rt");
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 17), h = 1 + static_cast<int>(rng() % 13);
    const auto n = 1 + rng() % 9;
    FrameSequence seq;
    seq.fps = 12.5 + trial;
    for (std::size_t k = 0; k < n; ++k) {
      Image img(w, h);
      for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng());
      seq.frames.push_back(std::move(img));
    }
    io::write_raw_stream(seq, dir.path / "x.raw");
    const auto back = io::load_frame_sequence(dir.path / "x.raw");
    REQUIRE(back.frame_count() == n);
    for (std::size_t k = 0; k < n; ++k) CHECK(back.frames[k].rgb == seq.frames[k].rgb);
  }
}

TEST_CASE("landmark sidecar validation") {
  TempDir dir("io_lm");
  LandmarkSidecar lms = testutil::full_frame_landmarks(300, 64, 64);
  for (auto& r : lms.per_frame) {
    r.eyes[0] = {{10, 10}, {20, 10}, {15, 15}};
    r.eyes[1] = {{40, 10}, {50, 10}, {45, 15}};
    r.mouth = {{20, 40}, {44, 40}, {44, 50}, {20, 50}};
  }
  const auto file = dir.path / "lm.jsonl";

  SUBCASE("300 records for 300 frames") {
    io::write_landmarks(lms, file);
    const auto back = io::load_landmarks(file, 64, 64, 300);
    CHECK(back.per_frame.size() == 300);
    CHECK(back.per_frame[7].mouth == lms.per_frame[7].mouth);
  }
  SUBCASE("299 records") {
    lms.per_frame.pop_back();
    io::write_landmarks(lms, file);
    CHECK_ERROR_CODE(io::load_landmarks(file, 64, 64, 300), ErrorCode::CountMismatch);
  }
  SUBCASE("mouth vertex beyond the frame") {
    lms.per_frame[3].mouth[1].x = 64 + 5;
    io::write_landmarks(lms, file);
    CHECK_ERROR_CODE(io::load_landmarks(file, 64, 64, 300), ErrorCode::OutOfBounds);
  }
  SUBCASE("two-vertex polygon") {
    lms.per_frame[0].eyes[1] = {{1, 1}, {2, 2}};
    io::write_landmarks(lms, file);
    CHECK_ERROR_CODE(io::load_landmarks(file, 64, 64, 300), ErrorCode::MalformedPolygon);
  }
  SUBCASE("missing file") { CHECK_ERROR_CODE(io::load_landmarks(dir.path / "nope", 64, 64, 300), ErrorCode::MissingInput); }
}

TEST_CASE("ground truth files") {
  TempDir dir("io_gt");
  const auto hr = dir.path / "hr.csv";
  SUBCASE("two rows") {
    write_text(hr, "time_s,value\n0.0,60\n1.0,61\n");
    const auto gt = io::load_ground_truth(hr);
    REQUIRE(gt.hr_numerics.size() == 2);
    CHECK(gt.mean_bpm() == doctest::Approx(60.5));
  }
  SUBCASE("repeated timestamp") {
    write_text(hr, "time_s,value\n0.0,60\n0.0,61\n");
    CHECK_ERROR_CODE(io::load_ground_truth(hr), ErrorCode::NonMonotoneTime);
  }
  SUBCASE("empty") {
    write_text(hr, "");
    CHECK_ERROR_CODE(io::load_ground_truth(hr), ErrorCode::EmptyFile);
  }
  SUBCASE("bpm out of range") {
    write_text(hr, "time_s,value\n0.0,20\n");
    CHECK_ERROR_CODE(io::load_ground_truth(hr), ErrorCode::OutOfBounds);
  }
  SUBCASE("csv round trip") {
    TimeSeries s = {{0.0, 0.25}, {0.01, -1.5}, {0.02, 3.125}};
    io::write_signal_csv(s, hr);
    const auto back = io::load_signal_csv(hr);
    REQUIRE(back.size() == 3);
    CHECK(back[1].value == -1.5);
  }
}

TEST_CASE("linear resampling matches a hand-computed interpolant") {
  TimeSeries s = {{0.0, 0.0}, {1.0, 10.0}, {3.0, 30.0}, {3.5, 20.0}};
  const auto r = io::resample_linear(s, 4.0, -0.5, 18);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double t = -0.5 + k / 4.0;
    double want;
    if (t <= 0.0) {
      want = 0.0;
    } else if (t >= 3.5) {
      want = 20.0;
    } else if (t <= 3.0) {
      want = 10.0 * t;
    } else {
      want = 30.0 - 20.0 * (t - 3.0);
    }
    CHECK(r[k] == doctest::Approx(want).epsilon(1e-12));
  }
}
