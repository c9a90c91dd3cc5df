#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rppg/cli.hpp"
#include "rppg/evaluation.hpp"
#include "rppg/io.hpp"
#include "rppg/pipeline.hpp"
#include "test_util.hpp"

using namespace rppg;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  return {code, o.str(), e.str()};
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
}

// Renders a short clean scene into dir/name and returns its directory.
fs::path synth_into(const fs::path& dir, const std::string& name, double hr, double seconds) {
  const fs::path scene = dir / (name + ".ini");
  std::ostringstream s;
  s << "width = 16\nheight = 16\nduration_s = " << seconds << "\nhr_bpm = " << hr << "\n[noise]\nenabled = false\n";
  write_text(scene, s.str());
  const auto r = call({"synth", "--scene", scene.string(), "--out", (dir / name).string()});
  REQUIRE(r.code == 0);
  return dir / name;
}

}  // namespace

TEST_CASE("exit codes map error families") {
  CHECK(cli::exit_code(ErrorFamily::Usage) == 2);
  CHECK(cli::exit_code(ErrorFamily::MissingInput) == 3);
  CHECK(cli::exit_code(ErrorFamily::InvalidInput) == 4);
  CHECK(cli::exit_code(ErrorFamily::Processing) == 5);
  CHECK(cli::exit_code(ErrorFamily::Output) == 6);
}

TEST_CASE("usage") {
  CHECK(call({"--help"}).code == 0);
  CHECK(call({"--help"}).out.find("estimate") != std::string::npos);
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"estimate", "--frames", "x"}).code == 2);
}

TEST_CASE("synth then estimate") {
  testutil::TempDir dir("cli");
  const auto data = synth_into(dir.path, "a", 75, 12);
  CHECK(io::load_frame_sequence(data / "frames").frame_count() == 360);

  const auto rep = dir.path / "a.json";
  const auto r = call({"estimate", "--frames", (data / "frames").string(), "--landmarks",
                       (data / "landmarks.jsonl").string(), "--out", rep.string(), "--method", "aggregate"});
  REQUIRE(r.code == 0);
  const auto s = read_report(rep);
  CHECK(s.method == "aggregate");
  CHECK(std::abs(s.video_bpm - 75) <= 1.0);

  SUBCASE("proposed on a one-cell grid equals aggregate") {
    const auto rep1 = dir.path / "p.json";
    REQUIRE(call({"estimate", "--frames", (data / "frames").string(), "--landmarks", (data / "landmarks.jsonl").string(),
                  "--out", rep1.string(), "--method", "proposed", "--grid_rows", "1", "--grid_cols", "1"})
                .code == 0);
    CHECK(std::abs(read_report(rep1).video_bpm - s.video_bpm) <= 1e-6);
  }
  SUBCASE("missing landmarks") {
    const auto m = call({"estimate", "--frames", (data / "frames").string(), "--landmarks",
                         (dir.path / "nope.jsonl").string(), "--out", (dir.path / "x.json").string()});
    CHECK(m.code == 3);
    CHECK_FALSE(fs::exists(dir.path / "x.json"));
  }
  SUBCASE("bad method name") {
    CHECK(call({"estimate", "--frames", (data / "frames").string(), "--landmarks", (data / "landmarks.jsonl").string(),
                "--out", (dir.path / "x.json").string(), "--method", "chrom"})
              .code == 2);
  }
  SUBCASE("config file through the environment") {
    const auto cfg = dir.path / "cfg.ini";
    write_text(cfg, "[estimate]\nmethod = snr\ngrid_rows = 2\ngrid_cols = 2\n");
    ::setenv("RPPG_CONFIG", cfg.string().c_str(), 1);
    const auto out = dir.path / "env.json";
    const auto e = call({"estimate", "--frames", (data / "frames").string(), "--landmarks",
                         (data / "landmarks.jsonl").string(), "--out", out.string()});
    ::unsetenv("RPPG_CONFIG");
    REQUIRE(e.code == 0);
    CHECK(read_report(out).method == "snr");
    CHECK(io::read_file(out).find("\"grid_rows\": 2") != std::string::npos);
  }
}

TEST_CASE("synth output is byte-identical for a fixed seed") {
  testutil::TempDir dir("cli_det");
  const auto a = synth_into(dir.path, "a", 66, 3);
  const auto b = synth_into(dir.path, "b", 66, 3);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    CHECK(io::read_file(e.path()) == io::read_file(b / rel));
  }
  CHECK(files > 90);
}

TEST_CASE("a clip shorter than one window fails with a processing error") {
  testutil::TempDir dir("cli_short");
  const auto data = synth_into(dir.path, "s", 72, 5);
  const auto r = call({"estimate", "--frames", (data / "frames").string(), "--landmarks",
                       (data / "landmarks.jsonl").string(), "--out", (dir.path / "s.json").string()});
  CHECK(r.code == 5);
  CHECK(r.err.find("window") != std::string::npos);
}

TEST_CASE("evaluate") {
  testutil::TempDir dir("cli_eval");
  const auto data = synth_into(dir.path, "v", 90, 10);
  for (const char* m : {"aggregate", "snr", "proposed"}) {
    REQUIRE(call({"estimate", "--frames", (data / "frames").string(), "--landmarks", (data / "landmarks.jsonl").string(),
                  "--out", (dir.path / (std::string(m) + ".json")).string(), "--method", m, "--grid_rows", "2",
                  "--grid_cols", "2"})
                .code == 0);
  }
  const std::string header = "report,ground_truth,skin_tone,condition,viewpoint\n";
  const auto out = dir.path / "table.csv";

  SUBCASE("one valid row") {
    write_text(dir.path / "m.csv", header + "aggregate.json,v/hr.csv,light,room,front\n");
    const auto r = call({"evaluate", "--manifest", (dir.path / "m.csv").string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto csv = io::read_file(out);
    CHECK(csv.find("aggregate,mae,") != std::string::npos);
    CHECK(csv.find("delta_mae") == std::string::npos);
  }
  SUBCASE("an invalid row is skipped with a warning") {
    write_text(dir.path / "m.csv", header + "aggregate.json,v/hr.csv,light,room,front\nmissing.json,v/hr.csv,dark,room,front\n");
    const auto r = call({"evaluate", "--manifest", (dir.path / "m.csv").string(), "--out", out.string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning: manifest row 3") != std::string::npos);
    CHECK(r.out.find("evaluated 1 of 2") != std::string::npos);
  }
  SUBCASE("all rows invalid") {
    write_text(dir.path / "m.csv", header + "aggregate.json,v/hr.csv,olive,room,front\n");
    CHECK(call({"evaluate", "--manifest", (dir.path / "m.csv").string(), "--out", out.string()}).code == 4);
    CHECK_FALSE(fs::exists(out));
  }
  SUBCASE("three methods give delta rows and plot data") {
    write_text(dir.path / "m.csv", header + "aggregate.json,v/hr.csv,dark,talking,lower\n"
                                            "snr.json,v/hr.csv,dark,talking,lower\n"
                                            "proposed.json,v/hr.csv,dark,talking,lower\n");
    const auto plots = dir.path / "plots";
    fs::create_directories(plots);
    REQUIRE(call({"evaluate", "--manifest", (dir.path / "m.csv").string(), "--out", out.string(), "--plots_dir",
                  plots.string()})
                .code == 0);
    std::vector<eval::EvalRecord> recs;
    for (const char* m : {"aggregate", "snr", "proposed"}) {
      recs.push_back({m, {eval::SkinTone::Dark, eval::Condition::Talking, eval::Viewpoint::Lower},
                      read_report(dir.path / (std::string(m) + ".json")).video_bpm, 90.0});
    }
    CHECK(io::read_file(out) == eval::report_csv(eval::cohort_report(recs)));
    CHECK(fs::exists(plots / "bland_altman_proposed.csv"));
    CHECK(fs::exists(plots / "scatter_snr.csv"));
  }
  SUBCASE("missing manifest") {
    CHECK(call({"evaluate", "--manifest", (dir.path / "none.csv").string(), "--out", out.string()}).code == 3);
  }
}

TEST_CASE("biophys") {
  testutil::TempDir dir("cli_bio");
  CHECK(call({"biophys", "--out", dir.path.string()}).code == 0);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) n += e.is_regular_file();
  CHECK(n == 2);
  CHECK(call({"biophys", "--out", dir.path.string(), "--f_mel_steps", "0"}).code == 2);
  CHECK(call({"biophys", "--out", dir.path.string(), "--f_mel_min", "0.3", "--f_mel_max", "0.1"}).code == 2);
  CHECK(call({"biophys", "--out", dir.path.string(), "--channel", "violet"}).code == 2);
}
