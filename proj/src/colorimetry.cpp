#include "specforge/colorimetry.hpp"

#include <algorithm>
#include <cmath>

#include "specforge/errors.hpp"
#include "specforge/kernels.hpp"

namespace specforge {

void QuantizationSpec::validate() const {
  if (bit_depth != 8 && bit_depth != 16) throw ValidationError("bit depth must be 8 or 16");
}

void require_matching_grid(const SpectralCube& cube, const SRF& srf) {
  if (cube.bands() != srf.bands())
    throw ValidationError("cube has " + std::to_string(cube.bands()) + " bands, SRF has " +
                          std::to_string(srf.bands()));
  if (cube.wavelengths() != srf.wavelengths()) throw ValidationError("cube and SRF wavelength grids differ");
}

RGBImage project(const SpectralCube& cube, const SRF& srf) {
  require_matching_grid(cube, srf);
  RGBImage out(cube.height(), cube.width());
  kernels::parallel::project(cube.data(), cube.bands(), cube.pixels(), srf.matrix(), out.data());
  return out;
}

RGBImage quantize(const RGBImage& image, QuantizationSpec spec) {
  spec.validate();
  const double levels = spec.levels();
  RGBImage out = image;
  for (double& v : out.data()) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    v = std::round(clamped * levels) / levels;  // std::round: halves away from zero
  }
  return out;
}

SRF normalize_srf(const SRF& srf) {
  srf.validate();
  std::vector<double> q(srf.matrix().begin(), srf.matrix().end());
  for (std::size_t c = 0; c < 3; ++c) {
    double mx = 0.0;
    for (std::size_t k = 0; k < srf.bands(); ++k) mx = std::max(mx, q[k * 3 + c]);
    if (mx <= 0.0) throw ValidationError("cannot normalize an all-zero SRF column");
    for (std::size_t k = 0; k < srf.bands(); ++k) q[k * 3 + c] /= mx;
  }
  return SRF(srf.wavelengths(), std::move(q));
}

}  // namespace specforge
