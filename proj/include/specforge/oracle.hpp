#pragma once

// Brute-force references for tests. Dense, single-threaded, slow on purpose:
// nothing here shares code paths with the production kernels.

#include <cstddef>
#include <span>
#include <vector>

#include "specforge/cube.hpp"
#include "specforge/optics.hpp"

namespace specforge::oracle {

inline constexpr std::size_t kMaxDensePixels = 4096;

/// A_k: (M*N) x (M*N) matrix of circular convolution with one kernel.
struct DenseOperator {
  std::size_t band = 0;
  std::size_t pixels = 0;
  std::vector<double> matrix;  ///< row-major

  double at(std::size_t r, std::size_t c) const { return matrix[r * pixels + c]; }
  std::vector<double> apply(std::span<const double> x) const;
};

DenseOperator build_dense(std::span<const double> kernel, std::size_t kernel_height, std::size_t kernel_width,
                          std::size_t height, std::size_t width, std::size_t band = 0);

/// Z = diag(A X) Q with A the vertically stacked A_k, computed literally.
RGBImage form_aberrated_dense(const SpectralCube& cube, const PSFStack& kernels, const SRF& srf);

/// Explicit P = Q (Q^T Q)^-1 Q^T via a cofactor 3x3 inverse. Checks P P == P
/// and Q^T (I - P) == 0 within 1e-9, throwing std::logic_error otherwise.
std::vector<double> projector_dense(const SRF& srf);

/// Textbook quadruple loop, circular boundary.
std::vector<double> naive_convolve_circular(std::span<const double> plane, std::size_t height, std::size_t width,
                                            std::span<const double> kernel, std::size_t kernel_height,
                                            std::size_t kernel_width);

double naive_rmse(std::span<const double> a, std::span<const double> b);
double naive_psnr(std::span<const double> a, std::span<const double> b, std::size_t planes, double max_value);

struct CheckSummary {
  std::size_t instances = 0;
  double max_form_error = 0.0;
  double max_projector_error = 0.0;
  bool passed = false;
};

/// Random size x size x 5 instances compared against the production path.
CheckSummary run_oracle_check(std::size_t size, std::size_t instances, std::uint64_t seed);

}  // namespace specforge::oracle
