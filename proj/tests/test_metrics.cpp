#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "specforge/errors.hpp"
#include "specforge/metrics.hpp"
#include "specforge/oracle.hpp"
#include "specforge/parallel.hpp"
#include "support.hpp"

using namespace specforge;

namespace {

SpectralCube constant(std::size_t h, std::size_t w, std::size_t k, double v) {
  std::vector<double> wl(k);
  for (std::size_t i = 0; i < k; ++i) wl[i] = 400.0 + 10.0 * static_cast<double>(i);
  return SpectralCube(h, w, wl, std::vector<double>(h * w * k, v), false);
}

SpectralCube scaled(const SpectralCube& c, double s) {
  SpectralCube out = c;
  out.set_normalized(false);
  for (double& v : out.data()) v *= s;
  return out;
}

}  // namespace

TEST_CASE("MRAE") {
  auto gt = constant(3, 3, 4, 0.5);
  CHECK(mrae(gt, gt) == 0.0);
  CHECK(mrae(constant(3, 3, 4, 0.6), gt) == doctest::Approx(0.2).epsilon(1e-12));

  SpectralCube dark(1, 1, {500.0}, std::vector<double>{0.0});
  SpectralCube est(1, 1, {500.0}, std::vector<double>{0.1});
  auto r = mrae_detail(est, dark);
  CHECK(r.value == doctest::Approx(0.1 / 1e-8).epsilon(1e-12));
  CHECK(r.floored == 1);
  CHECK_THROWS_AS(mrae(constant(2, 2, 4, 0.5), gt), ValidationError);
}

TEST_CASE("RMSE") {
  auto gt = constant(2, 3, 5, 0.4);
  CHECK(rmse(gt, gt) == 0.0);
  CHECK(rmse(constant(2, 3, 5, 0.5), gt) == doctest::Approx(0.1).epsilon(1e-12));
  auto a = testing::random_cube(2, 2, {450, 550, 650}, 1);
  auto b = testing::random_cube(2, 2, {450, 550, 650}, 2);
  CHECK(std::fabs(rmse(a, b) - oracle::naive_rmse(a.data(), b.data())) <= 1e-12);
}

TEST_CASE("PSNR") {
  auto gt = constant(4, 4, 3, 0.3);
  CHECK(std::isinf(psnr(gt, gt)));
  CHECK(psnr(constant(4, 4, 3, 0.4), gt) == doctest::Approx(20.0).epsilon(1e-12));

  // band 0 error 0.1 (MSE 0.01), band 1 error 0.2 (MSE 0.04)
  SpectralCube g(2, 2, {500, 600}, std::vector<double>(8, 0.5));
  SpectralCube e = g;
  for (std::size_t p = 0; p < 4; ++p) {
    e.data()[p] = 0.6;
    e.data()[4 + p] = 0.7;
  }
  const double expected = (20.0 * std::log10(1.0 / 0.1) + 20.0 * std::log10(1.0 / 0.2)) / 2.0;
  CHECK(expected == doctest::Approx(16.989700043360188).epsilon(1e-12));
  CHECK(psnr(e, g) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(psnr(e, g) == doctest::Approx(oracle::naive_psnr(e.data(), g.data(), 2, 1.0)).epsilon(1e-12));

  // one exact band forces the sentinel
  SpectralCube partial = g;
  for (std::size_t p = 0; p < 4; ++p) partial.data()[4 + p] = 0.9;
  CHECK(std::isinf(psnr(partial, g)));
  CHECK(psnr(constant(4, 4, 3, 0.4), gt, 255.0) > 60.0);
}

TEST_CASE("SAM") {
  SpectralCube e1(1, 1, {500, 600}, {1.0, 0.0}, false);
  SpectralCube e2(1, 1, {500, 600}, {0.0, 1.0}, false);
  SpectralCube e11(1, 1, {500, 600}, {1.0, 1.0}, false);
  CHECK(sam(e1, e2) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  CHECK(sam(e11, e1) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
  CHECK(sam(e11, e11) == 0.0);

  SpectralCube zero(1, 1, {500, 600}, {0.0, 0.0}, false);
  auto r = sam_detail(zero, e1);
  CHECK(r.excluded == 1);
  CHECK(r.value == 0.0);

  // collinear spectra whose normalized dot product rounds above 1
  auto a = testing::random_cube(6, 6, default_wavelengths(), 5);
  auto s = sam_detail(scaled(a, 3.7), a);
  CHECK(std::isfinite(s.value));
  CHECK(s.value < 1e-7);
}

TEST_CASE("L1") {
  auto gt = constant(2, 2, 3, 0.2);
  CHECK(l1(gt, gt) == 0.0);
  CHECK(l1(constant(2, 2, 3, 0.25), gt) == doctest::Approx(0.05).epsilon(1e-12));
  auto ones = constant(3, 3, 5, 1.0);
  auto est = testing::random_cube(3, 3, {400, 410, 420, 430, 440}, 3);
  CHECK(l1(est, ones) == doctest::Approx(mrae(est, ones)).epsilon(1e-15));
}

TEST_CASE("report matches the individual metrics") {
  auto a = testing::random_cube(5, 7, default_wavelengths(), 10);
  auto b = testing::random_cube(5, 7, default_wavelengths(), 11);
  auto r = report(a, b);
  CHECK(r.mrae == mrae(a, b));
  CHECK(r.rmse == rmse(a, b));
  CHECK(r.psnr_db == psnr(a, b));
  CHECK(r.sam_rad == sam(a, b));
  CHECK(r.l1 == l1(a, b));
  CHECK(r.pixels_excluded_sam == 0);
  CHECK(r.denom_floored_mrae == 0);
}

TEST_CASE("invariances on random pairs") {
  const auto wl = default_wavelengths();
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto est = testing::random_cube(4, 4, wl, 100 + seed, 0.01, 1.0);
    auto gt = testing::random_cube(4, 4, wl, 200 + seed, 0.01, 1.0);
    CounterRng rng(seed);
    const double c = rng.uniform(0.1, 10.0);
    CHECK(std::fabs(sam(scaled(est, c), gt) - sam(est, gt)) <= 1e-12);
    CHECK(std::fabs(mrae(scaled(est, c), scaled(gt, c)) - mrae(est, gt)) <= 1e-12);
    CHECK(rmse(scaled(est, c), scaled(gt, c)) == doctest::Approx(c * rmse(est, gt)).epsilon(1e-12));

    // reverse pixel order in both cubes
    SpectralCube re = est, rg = gt;
    const std::size_t n = est.pixels();
    for (std::size_t k = 0; k < est.bands(); ++k)
      for (std::size_t p = 0; p < n; ++p) {
        re.band(k)[p] = est.band(k)[n - 1 - p];
        rg.band(k)[p] = gt.band(k)[n - 1 - p];
      }
    auto r1 = report(est, gt), r2 = report(re, rg);
    CHECK(std::fabs(r1.mrae - r2.mrae) <= 1e-12);
    CHECK(std::fabs(r1.rmse - r2.rmse) <= 1e-12);
    CHECK(std::fabs(r1.psnr_db - r2.psnr_db) <= 1e-9);
    CHECK(std::fabs(r1.sam_rad - r2.sam_rad) <= 1e-12);
    CHECK(std::fabs(r1.l1 - r2.l1) <= 1e-12);
  }
}

TEST_CASE("reports are identical across thread counts") {
  auto a = testing::random_cube(64, 48, default_wavelengths(), 1);
  auto b = testing::random_cube(64, 48, default_wavelengths(), 2);
  set_threads(1);
  const auto ref = report(a, b);
  for (int t : {2, 4, 5}) {
    set_threads(t);
    const auto r = report(a, b);
    CHECK(r.mrae == ref.mrae);
    CHECK(r.rmse == ref.rmse);
    CHECK(r.psnr_db == ref.psnr_db);
    CHECK(r.sam_rad == ref.sam_rad);
    CHECK(r.l1 == ref.l1);
  }
  set_threads(0);
}

TEST_CASE("RGB PSNR uses the same definition") {
  RGBImage a(2, 2, std::vector<double>(12, 0.5));
  RGBImage b(2, 2, std::vector<double>(12, 0.6));
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
}
