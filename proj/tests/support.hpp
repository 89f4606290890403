#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <unistd.h>
#include <vector>

#include "specforge/cube.hpp"
#include "specforge/metamer.hpp"
#include "specforge/rng.hpp"

namespace testing {

using namespace specforge;

inline SpectralCube random_cube(std::size_t h, std::size_t w, std::vector<double> wl, std::uint64_t seed,
                                double lo = 0.0, double hi = 1.0) {
  CounterRng rng(seed, 11);
  SpectralCube c(h, w, std::move(wl));
  for (double& v : c.data()) v = rng.uniform(lo, hi);
  return c;
}

/// Random nonnegative K x 3 SRF; full rank with overwhelming probability.
inline SRF random_srf(const std::vector<double>& wl, std::uint64_t seed) {
  CounterRng rng(seed, 12);
  std::vector<double> q(wl.size() * 3);
  for (double& v : q) v = rng.uniform();
  return SRF(wl, q);
}

/// Scene whose fundamental metamer is strictly positive: a positive mix of
/// the SRF columns plus a small metameric black. Values stay in [0,1].
inline SpectralCube metamer_friendly_cube(std::size_t h, std::size_t w, const SRF& srf, std::uint64_t seed) {
  CounterRng rng(seed, 13);
  const auto& wl = srf.wavelengths();
  const std::size_t bands = wl.size();
  MetamerProjector proj(srf);
  double qmax = 0.0;
  for (double v : srf.matrix()) qmax = std::max(qmax, v);
  SpectralCube c(h, w, wl);
  std::vector<double> base(bands), noise(bands), black(bands);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double wr = 0.05 + 0.15 * rng.uniform(), wg = 0.05 + 0.15 * rng.uniform(), wb = 0.05 + 0.15 * rng.uniform();
      double minb = 1e9;
      for (std::size_t k = 0; k < bands; ++k) {
        base[k] = (wr * srf.q(k, 0) + wg * srf.q(k, 1) + wb * srf.q(k, 2)) / qmax;
        minb = std::min(minb, base[k]);
        noise[k] = rng.uniform(-1.0, 1.0);
      }
      double bmax = 0.0;
      for (std::size_t i = 0; i < bands; ++i) {
        double s = noise[i];
        for (std::size_t j = 0; j < bands; ++j) s -= proj.matrix()[i * bands + j] * noise[j];
        black[i] = s;
        bmax = std::max(bmax, std::fabs(s));
      }
      const double scale = bmax > 0 ? 0.5 * minb / bmax : 0.0;
      for (std::size_t k = 0; k < bands; ++k) c.at(y, x, k) = base[k] + scale * black[k];
    }
  return c;
}

/// Exact metamer pair (a, a + B) with B in the null space of Q, both in [0,1]
/// and B nonzero at every pixel.
inline std::pair<SpectralCube, SpectralCube> metamer_pair(std::size_t h, std::size_t w, const SRF& srf,
                                                          std::uint64_t seed) {
  const auto& wl = srf.wavelengths();
  const std::size_t bands = wl.size();
  MetamerProjector proj(srf);
  SpectralCube a = random_cube(h, w, wl, seed, 0.25, 0.75);
  SpectralCube b = a;
  CounterRng rng(seed, 14);
  std::vector<double> noise(bands), black(bands);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      for (double& v : noise) v = rng.uniform(-1.0, 1.0);
      double bmax = 0.0;
      for (std::size_t i = 0; i < bands; ++i) {
        double s = noise[i];
        for (std::size_t j = 0; j < bands; ++j) s -= proj.matrix()[i * bands + j] * noise[j];
        black[i] = s;
        bmax = std::max(bmax, std::fabs(s));
      }
      for (std::size_t k = 0; k < bands; ++k) b.at(y, x, k) += 0.25 * black[k] / bmax;
    }
  return {std::move(a), std::move(b)};
}

/// Gaussian-shaped SRF, wide enough to stay well conditioned.
inline SRF smooth_srf(const std::vector<double>& wl) { return default_srf(wl); }

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("specforge-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<unsigned char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace testing
