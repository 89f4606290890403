#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "specforge/degrade.hpp"
#include "specforge/errors.hpp"
#include "specforge/parallel.hpp"
#include "support.hpp"

using namespace specforge;

namespace {

RGBImage constant(std::size_t h, std::size_t w, double v) { return RGBImage(h, w, std::vector<double>(3 * h * w, v)); }

RGBImage ramp(std::size_t h, std::size_t w) {
  RGBImage img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = static_cast<double>(i % 97) / 96.0;
  return img;
}

}  // namespace

TEST_CASE("npe = 0 is the identity on the clamped image") {
  auto img = ramp(9, 7);
  CHECK(poisson_noise(img, 0.0, 1).data().size() == img.size());
  auto out = poisson_noise(img, 0.0, 1);
  CHECK(std::equal(out.data().begin(), out.data().end(), img.data().begin()));

  DegradationConfig cfg;
  auto chained = apply_chain(img, cfg);
  CHECK(std::equal(chained.data().begin(), chained.data().end(), img.data().begin()));

  RGBImage wild(1, 1, {-0.5, 0.3, 1.7});
  auto c = apply_chain(wild, cfg);
  CHECK(c.data()[0] == 0.0);
  CHECK(c.data()[1] == 0.3);
  CHECK(c.data()[2] == 1.0);
}

TEST_CASE("zero signal stays zero") {
  auto out = poisson_noise(constant(10, 10, 0.0), 1000.0, 3);
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("shot-noise statistics at npe = 1000") {
  // 3 * 182 * 183 = 99918 ~ 1e5 samples
  auto out = poisson_noise(constant(182, 184, 0.5), 1000.0, 42);
  const double n = static_cast<double>(out.size());
  REQUIRE(n >= 1e5);
  double mean = 0.0;
  for (double v : out.data()) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : out.data()) var += (v - mean) * (v - mean);
  var /= n - 1.0;
  CHECK(std::fabs(mean - 0.5) <= 0.003);
  CHECK(std::fabs(var - 5e-4) <= 0.15 * 5e-4);
  // samples live on the 1/npe lattice
  for (std::size_t i = 0; i < 100; ++i) CHECK(std::fabs(out.data()[i] * 1000.0 - std::round(out.data()[i] * 1000.0)) <= 1e-9);
}

TEST_CASE("quantization after noise") {
  DegradationConfig cfg;
  cfg.quant = QuantizationSpec{8};
  auto out = apply_chain(constant(2, 2, 0.5), cfg);
  for (double v : out.data()) CHECK(v == 128.0 / 255.0);
}

TEST_CASE("determinism and seed isolation") {
  auto img = ramp(16, 16);
  DegradationConfig cfg;
  cfg.npe = 200.0;
  cfg.seed = 5;
  auto a = apply_chain(img, cfg), b = apply_chain(img, cfg);
  CHECK(a.data().size() == b.data().size());
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  cfg.seed = 6;
  auto c = apply_chain(img, cfg);
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
  for (int threads : {1, 3}) {
    set_threads(threads);
    cfg.seed = 5;
    auto d = apply_chain(img, cfg);
    CHECK(std::equal(a.data().begin(), a.data().end(), d.data().begin()));
  }
  set_threads(0);
}

TEST_CASE("config validation") {
  DegradationConfig cfg;
  cfg.npe = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  CHECK_THROWS_AS(apply_chain(ramp(2, 2), cfg), ValidationError);
  cfg.npe = std::nan("");
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.npe = 0;
  cfg.quant = QuantizationSpec{3};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("external codec") {
  auto img = ramp(8, 6);
  SUBCASE("failing command surfaces its exit status") {
    DegradationConfig cfg;
    cfg.codec = CodecCommand{"exit 7"};
    try {
      apply_chain(img, cfg);
      FAIL("expected CodecError");
    } catch (const CodecError& e) {
      CHECK(e.exit_status() == 7);
    }
  }
  SUBCASE("missing output is a codec error") {
    DegradationConfig cfg;
    cfg.codec = CodecCommand{"true {in} {out}"};
    CHECK_THROWS_AS(apply_chain(img, cfg), CodecError);
  }
  SUBCASE("copy codec round-trips the quantized image") {
    DegradationConfig cfg;
    cfg.quant = QuantizationSpec{8};
    auto plain = apply_chain(img, cfg);
    cfg.codec = CodecCommand{"cp {in} {out}"};
    auto coded = apply_chain(img, cfg);
    CHECK(std::equal(plain.data().begin(), plain.data().end(), coded.data().begin()));
  }
}
