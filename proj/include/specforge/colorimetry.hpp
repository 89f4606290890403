#pragma once

#include "specforge/cube.hpp"

namespace specforge {

struct QuantizationSpec {
  int bit_depth = 8;  // 8 or 16
  double levels() const noexcept { return bit_depth == 16 ? 65535.0 : 255.0; }
  void validate() const;
};

/// Linear spectrum-to-color projection Y = X Q. No clamping.
/// Requires identical wavelength grids.
RGBImage project(const SpectralCube& cube, const SRF& srf);

/// Clamps to [0,1], then rounds each value to the nearest of 2^d levels
/// (ties away from zero).
RGBImage quantize(const RGBImage& image, QuantizationSpec spec);

/// Rescales each SRF column so its maximum is 1.
SRF normalize_srf(const SRF& srf);

/// Throws ValidationError unless cube and SRF share band count and wavelengths.
void require_matching_grid(const SpectralCube& cube, const SRF& srf);

}  // namespace specforge
