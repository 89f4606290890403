#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version computing the same per-element arithmetic in the same
// order, so the two agree bit-for-bit. The library calls the OpenMP
// versions; tests and the benchmark use both.

#include <cstddef>
#include <span>

namespace specforge {

enum class Padding : unsigned char { reflect = 0, circular = 1 };

/// Maps a possibly out-of-range coordinate into [0, n) under the boundary rule.
std::ptrdiff_t wrap_index(std::ptrdiff_t i, std::ptrdiff_t n, Padding padding) noexcept;

struct PlaneShape {
  std::size_t height;
  std::size_t width;
  std::size_t pixels() const noexcept { return height * width; }
};

namespace kernels {

// out[c*P + p] = sum_k cube[k*P + p] * q[k*3 + c]
// mat[i*K + j] applied per pixel: out[i*P + p] = sum_j mat[i*K + j] * cube[j*P + p]
// conv: out(y,x) = sum_{i,j} ker(i,j) * in(y + ch - i, x + cw - j), indices wrapped by padding

namespace serial {
void project(std::span<const double> cube, std::size_t bands, std::size_t pixels, std::span<const double> q,
             std::span<double> out);
void apply_band_matrix(std::span<const double> cube, std::size_t bands, std::size_t pixels,
                       std::span<const double> mat, std::span<double> out);
void convolve(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel, PlaneShape kshape,
              Padding padding, std::span<double> out);
}  // namespace serial

namespace parallel {
void project(std::span<const double> cube, std::size_t bands, std::size_t pixels, std::span<const double> q,
             std::span<double> out);
void apply_band_matrix(std::span<const double> cube, std::size_t bands, std::size_t pixels,
                       std::span<const double> mat, std::span<double> out);
void convolve(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel, PlaneShape kshape,
              Padding padding, std::span<double> out);
}  // namespace parallel

}  // namespace kernels
}  // namespace specforge
