#include "specforge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "specforge/errors.hpp"
#include "specforge/metamer.hpp"
#include "specforge/rng.hpp"

namespace specforge::oracle {
namespace {

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

}  // namespace

std::vector<double> DenseOperator::apply(std::span<const double> x) const {
  std::vector<double> y(pixels, 0.0);
  for (std::size_t r = 0; r < pixels; ++r)
    for (std::size_t c = 0; c < pixels; ++c) y[r] += at(r, c) * x[c];
  return y;
}

DenseOperator build_dense(std::span<const double> kernel, std::size_t kernel_height, std::size_t kernel_width,
                          std::size_t height, std::size_t width, std::size_t band) {
  const std::size_t n = height * width;
  if (n > kMaxDensePixels) throw ValidationError("dense operator limited to 4096 pixels");
  if (kernel.size() != kernel_height * kernel_width) throw ValidationError("kernel size mismatch");
  DenseOperator op{band, n, std::vector<double>(n * n, 0.0)};
  const auto ch = static_cast<std::ptrdiff_t>(kernel_height / 2);
  const auto cw = static_cast<std::ptrdiff_t>(kernel_width / 2);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t row = y * width + x;
      for (std::size_t i = 0; i < kernel_height; ++i)
        for (std::size_t j = 0; j < kernel_width; ++j) {
          const std::size_t sy = wrap(static_cast<std::ptrdiff_t>(y) + ch - static_cast<std::ptrdiff_t>(i), height);
          const std::size_t sx = wrap(static_cast<std::ptrdiff_t>(x) + cw - static_cast<std::ptrdiff_t>(j), width);
          op.matrix[row * n + sy * width + sx] += kernel[i * kernel_width + j];
        }
    }
  return op;
}

RGBImage form_aberrated_dense(const SpectralCube& cube, const PSFStack& kernels, const SRF& srf) {
  const std::size_t n = cube.pixels();
  const std::size_t bands = cube.bands();
  if (kernels.bands() != bands || srf.bands() != bands) throw ValidationError("band count mismatch");

  // A: (K*n) x n, block k = A_k.
  std::vector<double> a(bands * n * n);
  for (std::size_t k = 0; k < bands; ++k) {
    auto op = build_dense(kernels.kernel(k), kernels.kernel_height(), kernels.kernel_width(), cube.height(),
                          cube.width(), k);
    std::copy(op.matrix.begin(), op.matrix.end(), a.begin() + static_cast<std::ptrdiff_t>(k * n * n));
  }
  // X: n x K, row = pixel.
  std::vector<double> x(n * bands);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t k = 0; k < bands; ++k) x[p * bands + k] = cube.data()[k * n + p];
  // AX: (K*n) x K.
  std::vector<double> ax(bands * n * bands, 0.0);
  for (std::size_t r = 0; r < bands * n; ++r)
    for (std::size_t c = 0; c < bands; ++c) {
      double s = 0.0;
      for (std::size_t m = 0; m < n; ++m) s += a[r * n + m] * x[m * bands + c];
      ax[r * bands + c] = s;
    }
  // W = diag(AX): column k of W is rows [k*n, (k+1)*n) of column k of AX.
  std::vector<double> w(n * bands);
  for (std::size_t k = 0; k < bands; ++k)
    for (std::size_t p = 0; p < n; ++p) w[p * bands + k] = ax[(k * n + p) * bands + k];
  RGBImage z(cube.height(), cube.width());
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < bands; ++k) s += w[p * bands + k] * srf.q(k, c);
      z.data()[c * n + p] = s;
    }
  return z;
}

std::vector<double> projector_dense(const SRF& srf) {
  const std::size_t kb = srf.bands();
  double g[3][3] = {};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < kb; ++k) g[i][j] += srf.q(k, i) * srf.q(k, j);
  const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                     g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                     g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
  if (det == 0.0) throw ValidationError("Q^T Q is singular");
  double inv[3][3];
  inv[0][0] = (g[1][1] * g[2][2] - g[1][2] * g[2][1]) / det;
  inv[0][1] = (g[0][2] * g[2][1] - g[0][1] * g[2][2]) / det;
  inv[0][2] = (g[0][1] * g[1][2] - g[0][2] * g[1][1]) / det;
  inv[1][0] = (g[1][2] * g[2][0] - g[1][0] * g[2][2]) / det;
  inv[1][1] = (g[0][0] * g[2][2] - g[0][2] * g[2][0]) / det;
  inv[1][2] = (g[0][2] * g[1][0] - g[0][0] * g[1][2]) / det;
  inv[2][0] = (g[1][0] * g[2][1] - g[1][1] * g[2][0]) / det;
  inv[2][1] = (g[0][1] * g[2][0] - g[0][0] * g[2][1]) / det;
  inv[2][2] = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) / det;

  std::vector<double> p(kb * kb, 0.0);
  for (std::size_t r = 0; r < kb; ++r)
    for (std::size_t c = 0; c < kb; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) s += srf.q(r, i) * inv[i][j] * srf.q(c, j);
      p[r * kb + c] = s;
    }

  for (std::size_t r = 0; r < kb; ++r)
    for (std::size_t c = 0; c < kb; ++c) {
      double s = 0.0;
      for (std::size_t m = 0; m < kb; ++m) s += p[r * kb + m] * p[m * kb + c];
      if (std::fabs(s - p[r * kb + c]) > 1e-9) throw std::logic_error("projector is not idempotent");
    }
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t c = 0; c < kb; ++c) {
      double s = 0.0;
      for (std::size_t m = 0; m < kb; ++m) s += srf.q(m, ch) * ((m == c ? 1.0 : 0.0) - p[m * kb + c]);
      if (std::fabs(s) > 1e-9) throw std::logic_error("Q^T (I - P) is not zero");
    }
  return p;
}

std::vector<double> naive_convolve_circular(std::span<const double> plane, std::size_t height, std::size_t width,
                                            std::span<const double> kernel, std::size_t kernel_height,
                                            std::size_t kernel_width) {
  std::vector<double> out(height * width, 0.0);
  const auto ch = static_cast<std::ptrdiff_t>(kernel_height / 2);
  const auto cw = static_cast<std::ptrdiff_t>(kernel_width / 2);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::ptrdiff_t dy = -ch; dy <= ch; ++dy)
        for (std::ptrdiff_t dx = -cw; dx <= cw; ++dx) {
          // kernel tap at (ch+dy, cw+dx) moves energy from (y-dy, x-dx) to (y, x)
          const double k = kernel[static_cast<std::size_t>(ch + dy) * kernel_width + static_cast<std::size_t>(cw + dx)];
          out[y * width + x] += k * plane[wrap(static_cast<std::ptrdiff_t>(y) - dy, height) * width +
                                          wrap(static_cast<std::ptrdiff_t>(x) - dx, width)];
        }
  return out;
}

double naive_rmse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

double naive_psnr(std::span<const double> a, std::span<const double> b, std::size_t planes, double max_value) {
  const std::size_t n = a.size() / planes;
  double total = 0.0;
  for (std::size_t k = 0; k < planes; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (a[k * n + i] - b[k * n + i]) * (a[k * n + i] - b[k * n + i]);
    total += 10.0 * std::log10(max_value * max_value / (s / static_cast<double>(n)));
  }
  return total / static_cast<double>(planes);
}

CheckSummary run_oracle_check(std::size_t size, std::size_t instances, std::uint64_t seed) {
  constexpr std::size_t kBands = 5;
  CheckSummary summary;
  std::vector<double> wl{450, 500, 550, 600, 650};
  for (std::size_t t = 0; t < instances; ++t) {
    CounterRng rng(seed, t);
    SpectralCube cube(size, size, wl);
    for (double& v : cube.data()) v = rng.uniform();
    std::vector<double> q(kBands * 3);
    for (double& v : q) v = 0.05 + rng.uniform();
    SRF srf(wl, q);
    std::vector<double> kernels(kBands * 9);
    for (std::size_t k = 0; k < kBands; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 9; ++i) sum += kernels[k * 9 + i] = rng.uniform();
      for (std::size_t i = 0; i < 9; ++i) kernels[k * 9 + i] /= sum;
    }
    PSFStack psf(wl, 3, 3, kernels, Padding::circular);

    auto fast = form_aberrated(cube, psf, srf);
    auto dense = form_aberrated_dense(cube, psf, srf);
    for (std::size_t i = 0; i < fast.size(); ++i)
      summary.max_form_error = std::max(summary.max_form_error, std::fabs(fast.data()[i] - dense.data()[i]));

    auto p_dense = projector_dense(srf);
    MetamerProjector proj(srf);
    for (std::size_t i = 0; i < p_dense.size(); ++i)
      summary.max_projector_error = std::max(summary.max_projector_error, std::fabs(proj.matrix()[i] - p_dense[i]));
    ++summary.instances;
  }
  summary.passed = summary.max_form_error <= 1e-6 && summary.max_projector_error <= 1e-9;
  return summary;
}

}  // namespace specforge::oracle
