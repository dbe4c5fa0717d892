#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "gocor/config.hpp"
#include "gocor/correlation.hpp"
#include "gocor/instances.hpp"
#include "gocor/io.hpp"

using namespace gocor;

namespace {

std::size_t offset_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.offset();
  }
  FAIL("expected a FormatError");
  return 0;
}

void put_u32(Bytes& b, std::size_t at, std::uint32_t v) { std::memcpy(b.data() + at, &v, 4); }

}  // namespace

TEST_CASE("FMAP round trip") {
  std::mt19937_64 rng(1);
  const FeatureMap f = instances::random_map(rng, 3, 4, 5);
  const Bytes b = encode_fmap(f);
  CHECK(b.size() == 21 + 8 * 60);
  CHECK(std::memcmp(b.data(), "FMAP", 4) == 0);
  CHECK(decode_fmap(b) == f);

  // Single precision stores the rounded values and reads them back exactly.
  const FeatureMap g = decode_fmap(encode_fmap(f, Precision::F32));
  for (std::size_t n = 0; n < f.size(); ++n) {
    CHECK(g.data()[n] == static_cast<double>(static_cast<float>(f.data()[n])));
    CHECK(std::abs(g.data()[n] - f.data()[n]) <= 1e-4 * std::max(1.0, std::abs(f.data()[n])));
  }
  CHECK(decode_fmap(encode_fmap(g, Precision::F32)) == g);
}

TEST_CASE("FMAP format errors report byte offsets") {
  const FeatureMap f(2, 2, 2);
  const Bytes good = encode_fmap(f);

  Bytes b = good;
  b[0] = 'X';
  CHECK(offset_of([&] { decode_fmap(b); }) == 0);
  b = good;
  put_u32(b, 4, 7);
  CHECK(offset_of([&] { decode_fmap(b); }) == 4);
  b = good;
  put_u32(b, 12, 0);
  CHECK(offset_of([&] { decode_fmap(b); }) == 12);
  b = good;
  b[20] = 9;
  CHECK(offset_of([&] { decode_fmap(b); }) == 20);
  b = good;
  b.pop_back();
  CHECK(offset_of([&] { decode_fmap(b); }) == 21);
  b = good;
  b.push_back(0);
  CHECK(offset_of([&] { decode_fmap(b); }) == good.size());
  CHECK(offset_of([&] { decode_fmap(Bytes(good.begin(), good.begin() + 10)); }) == 8);
}

TEST_CASE("FLOW round trip, with and without mask") {
  FlowField flow(2, 3);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) flow.set(i, j, 0.1f * i - j, 2.5f * j);
  }
  CHECK(decode_flow(encode_flow(flow)) == flow);
  flow.mask = {1, 0, 1, 1, 0, 1};
  CHECK(decode_flow(encode_flow(flow)) == flow);

  Bytes b = encode_flow(flow);
  b.pop_back();
  CHECK(offset_of([&] { decode_flow(b); }) == 12 + 48);
  b.resize(20);
  CHECK(offset_of([&] { decode_flow(b); }) == 12);
}

TEST_CASE("CVOL round trip and errors") {
  std::mt19937_64 rng(2);
  const FeatureMap w = instances::random_map(rng, 3, 3, 2);
  for (const auto mode : {CorrelationMode::global(), CorrelationMode::local(2)}) {
    const CorrespondenceVolume v = correlate(w, w, mode);
    const Bytes b = encode_cvol(v);
    CHECK(b.size() == 22 + 8 * v.size());
    CHECK(decode_cvol(b) == v);
  }
  Bytes b = encode_cvol(correlate(w, w, CorrelationMode::global()));
  b[8] = 4;
  CHECK(offset_of([&] { decode_cvol(b); }) == 8);
  b[8] = 0;
  put_u32(b, 17, 3);  // global volume with a radius
  CHECK(offset_of([&] { decode_cvol(b); }) == 17);
}

TEST_CASE("PGM heatmap") {
  const VolumeShape s{VolumeKind::Global, 2, 3, 0};
  CorrespondenceVolume one_hot(s);
  one_hot.at(1, 0, 0, 2) = 4.0;
  const Bytes pgm = encode_heatmap_pgm(one_hot, 1, 0);
  const std::string header = "P5\n3 2\n255\n";
  REQUIRE(pgm.size() == header.size() + 6);
  CHECK(std::string(pgm.begin(), pgm.begin() + header.size()) == header);
  const std::vector<std::uint8_t> pixels(pgm.begin() + header.size(), pgm.end());
  CHECK(pixels == std::vector<std::uint8_t>{0, 0, 255, 0, 0, 0});

  const CorrespondenceVolume constant(s, std::vector<double>(s.size(), -2.0));
  const Bytes flat = encode_heatmap_pgm(constant, 0, 0);
  for (std::size_t n = header.size(); n < flat.size(); ++n) CHECK(flat[n] == 0);

  CHECK_THROWS_AS(encode_heatmap_pgm(one_hot, 2, 0), ValidationError);
  CHECK(slice_csv(one_hot, 1, 0) == "0,0,4\n0,0,0\n");
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "gocor_io_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(3);
  const FeatureMap f = instances::random_map(rng, 2, 2, 3);
  save_fmap(dir / "f.fmap", f);
  CHECK(load_fmap(dir / "f.fmap") == f);
  CHECK_THROWS(load_fmap(dir / "missing.fmap"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run configuration") {
  RunConfig cfg;
  SUBCASE("defaults") {
    CHECK(cfg.integer("basis_n") == 10);
    CHECK(cfg.real("basis_delta") == 0.5);
    CHECK(cfg.integer("kernel_size") == 3);
    CHECK(cfg.integer("query_out_channels") == 16);
    CHECK(cfg.real("eta") == 0.0);
    CHECK(cfg.solver().num_iter == 3);
    CHECK(cfg.solver().use_query);
    CHECK_FALSE(cfg.solver(true).use_query);
    cfg.set("mode", "local");
    CHECK(cfg.solver().num_iter == 7);
    CHECK_FALSE(cfg.solver().use_query);
    CHECK(cfg.mode() == CorrelationMode::local(4));
    CHECK(cfg.seeds().size() == 20);
  }
  SUBCASE("text, comments and later assignments win") {
    cfg.load_text("# comment\nlambda = 0.5\n\n  eta=0.1  # trailing\nlambda = 0.25\n");
    CHECK(cfg.real("lambda") == 0.25);
    CHECK(cfg.real("eta") == 0.1);
    cfg.set_assignment("eta=0.3");
    CHECK(cfg.objective().reference.eta == 0.3);
    CHECK(cfg.is_default("radius"));
    CHECK_FALSE(cfg.is_default("lambda"));
  }
  SUBCASE("lists, seeds and variants") {
    cfg.set("seeds", "3-5");
    CHECK(cfg.seeds() == std::vector<std::uint64_t>{3, 4, 5});
    cfg.set("seeds", "7,1");
    CHECK(cfg.seeds() == std::vector<std::uint64_t>{7, 1});
    cfg.set("initializer", "flexible_context_aware");
    cfg.set("beta", "1,2");
    const InitializerConfig init = cfg.initializer();
    CHECK(init.variant == InitializerVariant::FlexibleContextAware);
    CHECK(init.beta == std::vector<double>{1.0, 2.0});
    cfg.set("precision", "f32");
    CHECK(cfg.precision() == Precision::F32);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(cfg.set("nope", "1"), ValidationError);
    CHECK_THROWS_AS(cfg.set("lambda", "abc"), ValidationError);
    CHECK_THROWS_AS(cfg.set("radius", "1.5"), ValidationError);
    CHECK_THROWS_AS(cfg.set("mode", "gloabl"), ValidationError);
    CHECK_THROWS_AS(cfg.set("seeds", "5-2"), ValidationError);
    CHECK_THROWS_AS(cfg.set_assignment("lambda"), ValidationError);
    CHECK_THROWS_AS(cfg.load_text("lambda = 1\nbogus = 2\n"), ValidationError);
  }
  SUBCASE("dump lists every key") {
    const std::string dump = cfg.dump();
    for (const ConfigKey& k : config_keys()) CHECK(dump.find(std::string(k.name) + " = ") != std::string::npos);
  }
}
