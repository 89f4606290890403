#include "specforge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "specforge/errors.hpp"
#include "specforge/parallel.hpp"

namespace specforge {
namespace {

void require_same_shape(PlanarView a, PlanarView b) {
  if (a.planes != b.planes || a.plane_size != b.plane_size || a.data.size() != b.data.size())
    throw ValidationError("metric inputs have different dimensions");
  if (a.data.size() != a.planes * a.plane_size) throw ValidationError("metric input size inconsistent with shape");
}

double count_as_double(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

MraeResult mrae_detail(PlanarView est, PlanarView gt) {
  require_same_shape(est, gt);
  const std::size_t n = gt.data.size();
  if (n == 0) return {0.0, 0};
  const double sum = stable_reduce(n, [&](std::size_t i) {
    return std::fabs(est.data[i] - gt.data[i]) / std::max(gt.data[i], kMraeFloor);
  });
  const double floored = stable_reduce(n, [&](std::size_t i) { return count_as_double(gt.data[i] < kMraeFloor); });
  return {sum / static_cast<double>(n), static_cast<std::size_t>(floored)};
}

double rmse(PlanarView est, PlanarView gt) {
  require_same_shape(est, gt);
  const std::size_t n = gt.data.size();
  if (n == 0) return 0.0;
  const double sum = stable_reduce(n, [&](std::size_t i) {
    const double d = est.data[i] - gt.data[i];
    return d * d;
  });
  return std::sqrt(sum / static_cast<double>(n));
}

double psnr(PlanarView est, PlanarView gt, double max_value) {
  require_same_shape(est, gt);
  if (!(max_value > 0.0)) throw ValidationError("PSNR peak value must be positive");
  if (gt.planes == 0 || gt.plane_size == 0) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t k = 0; k < gt.planes; ++k) {
    const std::size_t off = k * gt.plane_size;
    const double sse = stable_reduce(gt.plane_size, [&](std::size_t i) {
      const double d = est.data[off + i] - gt.data[off + i];
      return d * d;
    });
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(gt.plane_size);
    total += 20.0 * std::log10(max_value / std::sqrt(mse));
  }
  return total / static_cast<double>(gt.planes);
}

SamResult sam_detail(PlanarView est, PlanarView gt) {
  require_same_shape(est, gt);
  const std::size_t pixels = gt.plane_size;
  const std::size_t bands = gt.planes;
  auto angle = [&](std::size_t p, bool* used) {
    double dot = 0.0, ne = 0.0, ng = 0.0;
    for (std::size_t k = 0; k < bands; ++k) {
      const double e = est.data[k * pixels + p];
      const double g = gt.data[k * pixels + p];
      dot += e * g;
      ne += e * e;
      ng += g * g;
    }
    *used = std::sqrt(ne) > kSamNormCutoff && std::sqrt(ng) > kSamNormCutoff;
    if (!*used) return 0.0;
    // sqrt of the product keeps identical spectra at exactly cos = 1
    return std::acos(std::clamp(dot / std::sqrt(ne * ng), -1.0, 1.0));
  };
  const double sum = stable_reduce(pixels, [&](std::size_t p) {
    bool u = false;
    return angle(p, &u);
  });
  const double kept = stable_reduce(pixels, [&](std::size_t p) {
    bool u = false;
    angle(p, &u);
    return count_as_double(u);
  });
  const auto kept_n = static_cast<std::size_t>(kept);
  return {kept_n == 0 ? 0.0 : sum / kept, pixels - kept_n};
}

double l1(PlanarView est, PlanarView gt) {
  require_same_shape(est, gt);
  const std::size_t n = gt.data.size();
  if (n == 0) return 0.0;
  return stable_reduce(n, [&](std::size_t i) { return std::fabs(est.data[i] - gt.data[i]); }) / static_cast<double>(n);
}

MetricReport report(PlanarView est, PlanarView gt, double max_value) {
  MetricReport r;
  const auto m = mrae_detail(est, gt);
  const auto s = sam_detail(est, gt);
  r.mrae = m.value;
  r.denom_floored_mrae = m.floored;
  r.rmse = rmse(est, gt);
  r.psnr_db = psnr(est, gt, max_value);
  r.sam_rad = s.value;
  r.pixels_excluded_sam = s.excluded;
  r.l1 = l1(est, gt);
  return r;
}

}  // namespace specforge
