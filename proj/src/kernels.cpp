#include "specforge/kernels.hpp"

namespace specforge {

std::ptrdiff_t wrap_index(std::ptrdiff_t i, std::ptrdiff_t n, Padding padding) noexcept {
  if (i >= 0 && i < n) return i;
  if (padding == Padding::circular) {
    std::ptrdiff_t r = i % n;
    return r < 0 ? r + n : r;
  }
  // reflect without repeating the edge sample: ... c b | a b c d | c b a ...
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  std::ptrdiff_t r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - r;
}

namespace kernels {
namespace {

inline double project_one(std::span<const double> cube, std::size_t bands, std::size_t pixels,
                          std::span<const double> q, std::size_t p, std::size_t c) {
  double acc = 0.0;
  for (std::size_t k = 0; k < bands; ++k) acc += cube[k * pixels + p] * q[k * 3 + c];
  return acc;
}

inline double band_matrix_one(std::span<const double> cube, std::size_t bands, std::size_t pixels,
                              std::span<const double> mat, std::size_t p, std::size_t i) {
  double acc = 0.0;
  for (std::size_t j = 0; j < bands; ++j) acc += mat[i * bands + j] * cube[j * pixels + p];
  return acc;
}

inline double convolve_one(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel,
                           PlaneShape kshape, Padding padding, std::size_t y, std::size_t x) {
  const auto h = static_cast<std::ptrdiff_t>(shape.height);
  const auto w = static_cast<std::ptrdiff_t>(shape.width);
  const auto ch = static_cast<std::ptrdiff_t>(kshape.height / 2);
  const auto cw = static_cast<std::ptrdiff_t>(kshape.width / 2);
  double acc = 0.0;
  for (std::size_t i = 0; i < kshape.height; ++i) {
    const std::ptrdiff_t sy = wrap_index(static_cast<std::ptrdiff_t>(y) + ch - static_cast<std::ptrdiff_t>(i), h, padding);
    const double* row = plane.data() + sy * w;
    const double* krow = kernel.data() + i * kshape.width;
    for (std::size_t j = 0; j < kshape.width; ++j) {
      const std::ptrdiff_t sx = wrap_index(static_cast<std::ptrdiff_t>(x) + cw - static_cast<std::ptrdiff_t>(j), w, padding);
      acc += krow[j] * row[sx];
    }
  }
  return acc;
}

}  // namespace

namespace serial {

void project(std::span<const double> cube, std::size_t bands, std::size_t pixels, std::span<const double> q,
             std::span<double> out) {
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t p = 0; p < pixels; ++p) out[c * pixels + p] = project_one(cube, bands, pixels, q, p, c);
}

void apply_band_matrix(std::span<const double> cube, std::size_t bands, std::size_t pixels,
                       std::span<const double> mat, std::span<double> out) {
  for (std::size_t i = 0; i < bands; ++i)
    for (std::size_t p = 0; p < pixels; ++p) out[i * pixels + p] = band_matrix_one(cube, bands, pixels, mat, p, i);
}

void convolve(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel, PlaneShape kshape,
              Padding padding, std::span<double> out) {
  for (std::size_t y = 0; y < shape.height; ++y)
    for (std::size_t x = 0; x < shape.width; ++x)
      out[y * shape.width + x] = convolve_one(plane, shape, kernel, kshape, padding, y, x);
}

}  // namespace serial

namespace parallel {

void project(std::span<const double> cube, std::size_t bands, std::size_t pixels, std::span<const double> q,
             std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(pixels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p)
    for (std::size_t c = 0; c < 3; ++c)
      out[c * pixels + p] = project_one(cube, bands, pixels, q, static_cast<std::size_t>(p), c);
}

void apply_band_matrix(std::span<const double> cube, std::size_t bands, std::size_t pixels,
                       std::span<const double> mat, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(pixels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < bands; ++i)
      out[i * pixels + p] = band_matrix_one(cube, bands, pixels, mat, static_cast<std::size_t>(p), i);
}

void convolve(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel, PlaneShape kshape,
              Padding padding, std::span<double> out) {
  const auto rows = static_cast<std::ptrdiff_t>(shape.height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t y = 0; y < rows; ++y)
    for (std::size_t x = 0; x < shape.width; ++x)
      out[y * shape.width + x] = convolve_one(plane, shape, kernel, kshape, padding, static_cast<std::size_t>(y), x);
}

}  // namespace parallel
}  // namespace kernels
}  // namespace specforge
