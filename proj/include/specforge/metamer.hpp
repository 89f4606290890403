#pragma once

#include <cstdint>
#include <vector>

#include "specforge/cube.hpp"
#include "specforge/optics.hpp"
#include "specforge/rng.hpp"

namespace specforge {

/// Orthogonal projector onto the column space of Q, P = Q (Q^T Q)^-1 Q^T,
/// built from a thin SVD of Q. K x K, row-major.
class MetamerProjector {
 public:
  /// Throws ValidationError if Q is rank deficient
  /// (smallest singular value <= 1e-10 * largest).
  explicit MetamerProjector(const SRF& srf);

  std::size_t bands() const noexcept { return bands_; }
  std::span<const double> matrix() const noexcept { return p_; }
  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }

 private:
  std::size_t bands_;
  std::vector<double> wavelengths_;
  std::vector<double> p_;
};

/// S = fundamental + black. The black is invisible to Q and may be negative.
struct MetamerDecomposition {
  SpectralCube fundamental;
  SpectralCube black;
};

MetamerDecomposition decompose(const SpectralCube& cube, const SRF& srf);
MetamerDecomposition decompose(const SpectralCube& cube, const MetamerProjector& projector);

/// Unclipped metamer S* + alpha B, evaluated as S + (alpha - 1) B so that
/// alpha = 1 returns the source samples exactly.
SpectralCube metamer_candidate(const SpectralCube& source, const MetamerDecomposition& d, double alpha);

inline constexpr double kExactMetamerTolerance = 1e-9;

struct MetamerResult {
  SpectralCube cube;                 ///< negatives clipped to zero
  std::size_t clipped_pixel_count = 0;
  bool exact = true;                 ///< no clipping and RGB within 1e-9 of the source
  double rgb_psnr_vs_source = 0.0;   ///< dB on float RGB; +infinity when exact
  double max_rgb_deviation = 0.0;
};

MetamerResult generate(const SpectralCube& cube, const SRF& srf, double alpha);
MetamerResult generate(const SpectralCube& cube, const SRF& srf, const MetamerProjector& projector, double alpha);

/// Uniform draw from [lo, hi).
double sample_alpha(CounterRng& rng, double lo, double hi);

struct SeparabilityReport {
  double max_abs_rgb_diff = 0.0;
  double mean_abs_rgb_diff = 0.0;
  RGBImage diff_image;  ///< |form(a) - form(b)|
};

/// Forms both cubes identically (aberrated when psf is given, plain
/// projection otherwise) and measures how far their RGB images differ.
SeparabilityReport separability(const SpectralCube& a, const SpectralCube& b, const SRF& srf,
                                const PSFStack* psf = nullptr);

}  // namespace specforge
