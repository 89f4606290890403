#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "specforge/colorimetry.hpp"
#include "specforge/metamer.hpp"
#include "specforge/oracle.hpp"
#include "support.hpp"

using namespace specforge;
using testing::max_abs_diff;

TEST_CASE("delta kernel gives the identity operator") {
  std::vector<double> delta(9, 0.0);
  delta[4] = 1.0;
  auto op = oracle::build_dense(delta, 3, 3, 4, 5);
  REQUIRE(op.pixels == 20);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 20; ++c) CHECK(op.at(r, c) == (r == c ? 1.0 : 0.0));
}

TEST_CASE("1x1 image collapses the kernel") {
  const std::vector<double> k{0.1, 0.2, 0.3, 0.05, 0.05, 0.1, 0.1, 0.05, 0.05};
  auto op = oracle::build_dense(k, 3, 3, 1, 1);
  REQUIRE(op.matrix.size() == 1);
  CHECK(op.matrix[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dense operator matches the fast convolution") {
  CounterRng rng(3, 0);
  std::vector<double> k(25);
  double s = 0.0;
  for (double& v : k) s += v = rng.uniform();
  for (double& v : k) v /= s;
  std::vector<double> plane(7 * 9);
  for (double& v : plane) v = rng.uniform();
  auto op = oracle::build_dense(k, 5, 5, 7, 9);
  auto fast = convolve_band(plane, {7, 9}, k, {5, 5}, Padding::circular);
  CHECK(max_abs_diff(op.apply(plane), fast) <= 1e-10);
  CHECK(max_abs_diff(oracle::naive_convolve_circular(plane, 7, 9, k, 5, 5), fast) <= 1e-12);
}

TEST_CASE("dense formation vs fast formation") {
  const std::vector<double> wl{420, 480, 540, 600, 660};
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto cube = testing::random_cube(8, 8, wl, s);
    auto srf = testing::random_srf(wl, s + 50);
    CounterRng rng(s, 9);
    std::vector<double> kernels(5 * 9);
    for (std::size_t b = 0; b < 5; ++b) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 9; ++i) sum += kernels[b * 9 + i] = rng.uniform();
      for (std::size_t i = 0; i < 9; ++i) kernels[b * 9 + i] /= sum;
    }
    PSFStack psf(wl, 3, 3, kernels, Padding::circular);
    CHECK(max_abs_diff(oracle::form_aberrated_dense(cube, psf, srf).data(), form_aberrated(cube, psf, srf).data()) <=
          1e-6);
  }
  CHECK_THROWS(oracle::form_aberrated_dense(testing::random_cube(80, 80, wl, 1), delta_stack(wl, 1),
                                            testing::random_srf(wl, 1)));
}

TEST_CASE("explicit projector") {
  const std::vector<double> wl3{450, 550, 650};
  auto p3 = oracle::projector_dense(testing::random_srf(wl3, 2));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::fabs(p3[i * 3 + j] - (i == j ? 1.0 : 0.0)) <= 1e-9);

  const auto wl = default_wavelengths();
  auto srf = testing::random_srf(wl, 3);
  auto p = oracle::projector_dense(srf);
  double trace = 0.0;
  for (std::size_t i = 0; i < wl.size(); ++i) trace += p[i * wl.size() + i];
  CHECK(trace == doctest::Approx(3.0).epsilon(1e-9));

  auto cube = testing::random_cube(3, 3, wl, 4);
  auto d = decompose(cube, srf);
  for (std::size_t px = 0; px < 9; ++px)
    for (std::size_t i = 0; i < wl.size(); ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < wl.size(); ++j) v += p[i * wl.size() + j] * cube.data()[j * 9 + px];
      CHECK(std::fabs(v - d.fundamental.data()[i * 9 + px]) <= 1e-9);
    }
}

TEST_CASE("oracle check summary") {
  auto s = oracle::run_oracle_check(8, 4, 1);
  CHECK(s.instances == 4);
  CHECK(s.passed);
  CHECK(s.max_form_error <= 1e-6);
  CHECK(s.max_projector_error <= 1e-9);
}
