#include "specforge/metamer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "specforge/colorimetry.hpp"
#include "specforge/errors.hpp"
#include "specforge/kernels.hpp"
#include "specforge/metrics.hpp"
#include "specforge/parallel.hpp"

namespace specforge {

MetamerProjector::MetamerProjector(const SRF& srf) : bands_(srf.bands()), wavelengths_(srf.wavelengths()) {
  srf.validate();
  if (bands_ < 3) throw ValidationError("metamer projector needs at least 3 bands");
  Eigen::MatrixXd q(bands_, 3);
  for (std::size_t k = 0; k < bands_; ++k)
    for (std::size_t c = 0; c < 3; ++c) q(k, c) = srf.q(k, c);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (!(s(2) > 1e-10 * s(0))) throw ValidationError("SRF matrix is rank deficient; metameric black is undefined");

  // With Q = U S V^T, Q (Q^T Q)^-1 Q^T = U U^T.
  const Eigen::MatrixXd u = svd.matrixU();
  const Eigen::MatrixXd p = u * u.transpose();
  p_.resize(bands_ * bands_);
  for (std::size_t i = 0; i < bands_; ++i)
    for (std::size_t j = 0; j < bands_; ++j) p_[i * bands_ + j] = p(i, j);
}

MetamerDecomposition decompose(const SpectralCube& cube, const MetamerProjector& projector) {
  if (cube.bands() != projector.bands()) throw ValidationError("cube and SRF band counts differ");
  if (cube.wavelengths() != projector.wavelengths()) throw ValidationError("cube and SRF wavelength grids differ");
  MetamerDecomposition d{SpectralCube(cube.height(), cube.width(), cube.wavelengths(), false),
                         SpectralCube(cube.height(), cube.width(), cube.wavelengths(), false)};
  kernels::parallel::apply_band_matrix(cube.data(), cube.bands(), cube.pixels(), projector.matrix(),
                                       d.fundamental.data());
  auto src = cube.data();
  auto fund = d.fundamental.data();
  auto black = d.black.data();
  for (std::size_t i = 0; i < src.size(); ++i) black[i] = src[i] - fund[i];
  return d;
}

MetamerDecomposition decompose(const SpectralCube& cube, const SRF& srf) {
  return decompose(cube, MetamerProjector(srf));
}

SpectralCube metamer_candidate(const SpectralCube& source, const MetamerDecomposition& d, double alpha) {
  if (source.size() != d.black.size()) throw ValidationError("decomposition does not match source cube");
  SpectralCube out(source.height(), source.width(), source.wavelengths(), false);
  auto src = source.data();
  auto black = d.black.data();
  auto dst = out.data();
  const double w = alpha - 1.0;
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] + w * black[i];
  return out;
}

MetamerResult generate(const SpectralCube& cube, const SRF& srf, const MetamerProjector& projector, double alpha) {
  if (!std::isfinite(alpha)) throw ValidationError("alpha must be finite");
  const auto d = decompose(cube, projector);
  MetamerResult r;
  r.cube = metamer_candidate(cube, d, alpha);

  const std::size_t pixels = cube.pixels();
  std::vector<unsigned char> clipped(pixels, 0);
  bool within_unit = true;
  for (std::size_t k = 0; k < cube.bands(); ++k) {
    auto band = r.cube.band(k);
    for (std::size_t p = 0; p < pixels; ++p) {
      if (band[p] < 0.0) {
        band[p] = 0.0;
        clipped[p] = 1;
      }
      within_unit = within_unit && band[p] <= 1.0;
    }
  }
  r.cube.set_normalized(within_unit);
  r.clipped_pixel_count = static_cast<std::size_t>(std::count(clipped.begin(), clipped.end(), 1));

  const RGBImage source_rgb = project(cube, srf);
  const RGBImage rgb = project(r.cube, srf);
  double dev = 0.0;
  for (std::size_t i = 0; i < rgb.size(); ++i) dev = std::max(dev, std::fabs(rgb.data()[i] - source_rgb.data()[i]));
  r.max_rgb_deviation = dev;
  // clipped pixels make a near-metamer even if the RGB happens to survive
  r.exact = r.clipped_pixel_count == 0 && dev <= kExactMetamerTolerance;
  r.rgb_psnr_vs_source = dev == 0.0 || r.exact ? std::numeric_limits<double>::infinity() : psnr(rgb, source_rgb);
  return r;
}

MetamerResult generate(const SpectralCube& cube, const SRF& srf, double alpha) {
  return generate(cube, srf, MetamerProjector(srf), alpha);
}

double sample_alpha(CounterRng& rng, double lo, double hi) {
  if (!(lo < hi)) throw ValidationError("alpha range must satisfy lo < hi");
  return rng.uniform(lo, hi);
}

SeparabilityReport separability(const SpectralCube& a, const SpectralCube& b, const SRF& srf, const PSFStack* psf) {
  if (a.height() != b.height() || a.width() != b.width() || a.bands() != b.bands())
    throw ValidationError("separability inputs have different dimensions");
  if (a.wavelengths() != b.wavelengths()) throw ValidationError("separability inputs have different wavelength grids");
  const RGBImage ra = psf ? form_aberrated(a, *psf, srf) : project(a, srf);
  const RGBImage rb = psf ? form_aberrated(b, *psf, srf) : project(b, srf);
  SeparabilityReport rep;
  rep.diff_image = RGBImage(a.height(), a.width());
  auto diff = rep.diff_image.data();
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = std::fabs(ra.data()[i] - rb.data()[i]);
    rep.max_abs_rgb_diff = std::max(rep.max_abs_rgb_diff, diff[i]);
  }
  rep.mean_abs_rgb_diff = diff.empty() ? 0.0 : stable_sum(diff) / static_cast<double>(diff.size());
  return rep;
}

}  // namespace specforge
