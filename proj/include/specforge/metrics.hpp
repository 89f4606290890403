#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "specforge/cube.hpp"

namespace specforge {

inline constexpr double kMraeFloor = 1e-8;
inline constexpr double kSamNormCutoff = 1e-12;

/// Planar image viewed as `planes` planes of `plane_size` samples. Both
/// spectral cubes (planes = bands) and RGB images (planes = 3) reduce to this,
/// so every metric has exactly one definition.
struct PlanarView {
  std::span<const double> data;
  std::size_t planes;
  std::size_t plane_size;

  PlanarView(std::span<const double> d, std::size_t p, std::size_t n) : data(d), planes(p), plane_size(n) {}
  PlanarView(const SpectralCube& c) : data(c.data()), planes(c.bands()), plane_size(c.pixels()) {}  // NOLINT
  PlanarView(const RGBImage& im) : data(im.data()), planes(3), plane_size(im.pixels()) {}          // NOLINT
};

struct MraeResult {
  double value;
  std::size_t floored;  ///< samples whose |gt| fell below the floor
};

struct SamResult {
  double value;
  std::size_t excluded;  ///< pixels with a near-zero spectrum on either side
};

MraeResult mrae_detail(PlanarView est, PlanarView gt);
SamResult sam_detail(PlanarView est, PlanarView gt);

/// mean |est - gt| / max(gt, 1e-8)
inline double mrae(PlanarView est, PlanarView gt) { return mrae_detail(est, gt).value; }
double rmse(PlanarView est, PlanarView gt);
/// Band-averaged PSNR. +infinity if any band matches exactly.
double psnr(PlanarView est, PlanarView gt, double max_value = 1.0);
/// Mean spectral angle in radians over pixels with both norms > 1e-12.
inline double sam(PlanarView est, PlanarView gt) { return sam_detail(est, gt).value; }
double l1(PlanarView est, PlanarView gt);

struct MetricReport {
  double mrae = 0.0;
  double rmse = 0.0;
  double psnr_db = std::numeric_limits<double>::infinity();
  double sam_rad = 0.0;
  double l1 = 0.0;
  std::size_t pixels_excluded_sam = 0;
  std::size_t denom_floored_mrae = 0;
};

MetricReport report(PlanarView est, PlanarView gt, double max_value = 1.0);

}  // namespace specforge
