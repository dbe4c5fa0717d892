#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gocor/cli.hpp"
#include "gocor/correlation.hpp"
#include "gocor/instances.hpp"

using namespace gocor;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig small_bench() {
  RunConfig cfg;
  cfg.set("seeds", "0-1");
  cfg.set("scene_height", "16");
  cfg.set("scene_width", "16");
  cfg.set("scene_depth", "8");
  cfg.set("serial", "true");
  return cfg;
}

}  // namespace

TEST_CASE("gradcheck passes by default and fails on a corrupted gradient") {
  RunConfig cfg;
  cfg.set("seeds", "0-3");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(cli::cmd_gradcheck(cfg, {}, out, err) == 0);
  CHECK(out.str().find("gradcheck: PASS") != std::string::npos);
  CHECK(err.str().find("warning: eta = 0") != std::string::npos);

  std::ostringstream out2;
  std::ostringstream err2;
  CHECK(cli::cmd_gradcheck(cfg, {true}, out2, err2) == 1);
  CHECK(out2.str().find("gradcheck: FAIL") != std::string::npos);

  cfg.set("kink_avoidance", "true");
  std::ostringstream out3;
  std::ostringstream err3;
  CHECK(cli::cmd_gradcheck(cfg, {}, out3, err3) == 0);
  CHECK(err3.str().empty());

  cfg.set("eta", "0.1");
  std::ostringstream out4;
  std::ostringstream err4;
  CHECK(cli::cmd_gradcheck(cfg, {}, out4, err4) == 0);
  CHECK(out4.str().find("perturbed") == std::string::npos);
}

TEST_CASE("solve writes the volume and trace") {
  TempDir tmp("gocor_cli_solve");
  std::mt19937_64 rng(4);
  const FeatureMap f_r = instances::random_map(rng, 5, 6, 4);
  const FeatureMap f_q = instances::random_map(rng, 5, 6, 4);
  save_fmap(tmp.path / "ref.fmap", f_r);
  save_fmap(tmp.path / "query.fmap", f_q);

  RunConfig cfg;
  cfg.set("serial", "true");
  cfg.set("query_mid_channels", "4");
  cfg.set("query_out_channels", "4");
  cli::SolveOptions opts{tmp.path / "ref.fmap", tmp.path / "query.fmap", tmp.path / "a.cvol", tmp.path / "a.json"};
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cli::cmd_solve(cfg, opts, out, err) == 0);

  const Bytes trace_bytes = read_file(tmp.path / "a.json");
  const auto trace = nlohmann::json::parse(std::string(trace_bytes.begin(), trace_bytes.end()));
  REQUIRE(trace["losses"].size() == 4);
  for (const auto& l : trace["losses"]) CHECK((std::isfinite(l.get<double>()) && l.get<double>() > 0.0));
  CHECK(trace["step_lengths"].size() == 3);

  SUBCASE("byte-identical reruns") {
    opts.volume_out = tmp.path / "b.cvol";
    opts.trace_out = tmp.path / "b.json";
    std::ostringstream out2;
    REQUIRE(cli::cmd_solve(cfg, opts, out2, err) == 0);
    CHECK(read_file(tmp.path / "a.cvol") == read_file(tmp.path / "b.cvol"));
    CHECK(read_file(tmp.path / "a.json") == read_file(tmp.path / "b.json"));
    // Only the echoed output path differs.
    const auto tail = [](const std::string& t) { return t.substr(t.find('\n')); };
    CHECK(tail(out.str()) == tail(out2.str()));
  }
  SUBCASE("zero iterations give normalized plain correlation") {
    cfg.set("num_iter", "0");
    opts.volume_out = tmp.path / "zero.cvol";
    opts.trace_out.reset();
    REQUIRE(cli::cmd_solve(cfg, opts, out, err) == 0);
    const FeatureMap unit = init_filter_map(f_r, {}).filter;
    CHECK(load_cvol(opts.volume_out) == correlate(unit, f_q, CorrelationMode::global()));
  }
  SUBCASE("bad input reports the byte offset") {
    Bytes b = read_file(tmp.path / "ref.fmap");
    b[0] = 'Q';
    write_file(tmp.path / "bad.fmap", b);
    opts.reference = tmp.path / "bad.fmap";
    try {
      cli::cmd_solve(cfg, opts, out, err);
      FAIL("expected a FormatError");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 0);
      CHECK(std::string(e.what()).find("at byte 0") != std::string::npos);
    }
  }
}

TEST_CASE("bench report schema and determinism") {
  const RunConfig cfg = small_bench();
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream err;
  REQUIRE(cli::cmd_bench(cfg, {}, a, err) == 0);
  REQUIRE(cli::cmd_bench(cfg, {}, b, err) == 0);
  CHECK(a.str() == b.str());
  CHECK(err.str().empty());

  const auto report = nlohmann::json::parse(a.str());
  REQUIRE(report["runs"].size() == 2);
  for (const auto& run : report["runs"]) {
    REQUIRE(run["margins"].size() == 4);
    CHECK(run["argmax_correct"].size() == 4);
    CHECK(std::abs(run["margins"][0].get<double>()) <= 1e-6 * run["scale"][0].get<double>());
    CHECK_FALSE(run.contains("timings_ms"));
  }
  CHECK(report["summary"]["mean_margin"].size() == 4);

  std::ostringstream timed;
  std::ostringstream timed_err;
  REQUIRE(cli::cmd_bench(cfg, {true}, timed, timed_err) == 0);
  CHECK(nlohmann::json::parse(timed.str())["runs"][0].contains("timings_ms"));
  CHECK_FALSE(timed_err.str().empty());
}

TEST_CASE("export-heatmap") {
  TempDir tmp("gocor_cli_heatmap");
  const VolumeShape s{VolumeKind::Local, 3, 3, 1};
  CorrespondenceVolume v(s);
  v.at(1, 1, 0, 1) = 2.0;
  save_cvol(tmp.path / "v.cvol", v);
  cli::HeatmapOptions opts{tmp.path / "v.cvol", 1, 1, tmp.path / "h.pgm", tmp.path / "h.csv"};
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(cli::cmd_export_heatmap(opts, out, err) == 0);
  const Bytes pgm = read_file(tmp.path / "h.pgm");
  CHECK(pgm == encode_heatmap_pgm(v, 1, 1));
  CHECK(pgm.back() == 0);
  CHECK(pgm[pgm.size() - 4] == 255);
  opts.pgm_out = tmp.path / "h2.pgm";
  REQUIRE(cli::cmd_export_heatmap(opts, out, err) == 0);
  CHECK(read_file(tmp.path / "h2.pgm") == pgm);

  opts.i = 3;
  CHECK_THROWS_AS(cli::cmd_export_heatmap(opts, out, err), ValidationError);
}

TEST_CASE("oracle suite passes") {
  RunConfig cfg;
  std::ostringstream out;
  std::ostringstream err;
  CHECK(cli::cmd_oracle(cfg, out, err) == 0);
  CHECK(out.str().find("FAIL") == std::string::npos);
}
