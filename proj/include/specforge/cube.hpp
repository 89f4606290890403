#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace specforge {

/// 400:10:700 nm, the 31-band grid shared by the common RGB-to-spectrum datasets.
std::vector<double> default_wavelengths();

/// M x N x K radiance datacube. Samples are stored band-major, each band a
/// row-major M x N plane: index = k*M*N + y*N + x.
///
/// A cube flagged normalized holds values in [0, 1]; intermediate products
/// (metameric blacks, unclipped candidates) clear the flag and may go negative.
class SpectralCube {
 public:
  SpectralCube() = default;
  /// Zero-filled cube on the given wavelength grid.
  SpectralCube(std::size_t height, std::size_t width, std::vector<double> wavelengths,
               bool normalized = true);
  SpectralCube(std::size_t height, std::size_t width, std::vector<double> wavelengths,
               std::vector<double> data, bool normalized = true);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t bands() const noexcept { return wavelengths_.size(); }
  std::size_t pixels() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool normalized() const noexcept { return normalized_; }
  void set_normalized(bool flag) { normalized_ = flag; }

  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::span<const double> band(std::size_t k) const { return {data_.data() + k * pixels(), pixels()}; }
  std::span<double> band(std::size_t k) { return {data_.data() + k * pixels(), pixels()}; }

  double at(std::size_t y, std::size_t x, std::size_t k) const { return data_[k * pixels() + y * width_ + x]; }
  double& at(std::size_t y, std::size_t x, std::size_t k) { return data_[k * pixels() + y * width_ + x]; }

  /// Throws ValidationError if any invariant is broken: finite samples,
  /// increasing wavelengths, and [0,1] range when normalized.
  void validate() const;

  bool operator==(const SpectralCube&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> wavelengths_;
  std::vector<double> data_;
  bool normalized_ = true;
};

/// M x N x 3 color image, channel-major planar (R plane, G plane, B plane).
class RGBImage {
 public:
  static constexpr std::size_t kChannels = 3;

  RGBImage() = default;
  RGBImage(std::size_t height, std::size_t width);
  RGBImage(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> channel(std::size_t c) const { return {data_.data() + c * pixels(), pixels()}; }
  std::span<double> channel(std::size_t c) { return {data_.data() + c * pixels(), pixels()}; }

  double at(std::size_t y, std::size_t x, std::size_t c) const { return data_[c * pixels() + y * width_ + x]; }
  double& at(std::size_t y, std::size_t x, std::size_t c) { return data_[c * pixels() + y * width_ + x]; }

  void validate() const;

  bool operator==(const RGBImage&) const = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// K x 3 camera spectral response. q(k, c) is the response of channel c at band k.
class SRF {
 public:
  SRF() = default;
  SRF(std::vector<double> wavelengths, std::vector<double> q);

  std::size_t bands() const noexcept { return wavelengths_.size(); }
  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  double q(std::size_t k, std::size_t c) const { return q_[k * 3 + c]; }
  /// Row-major K x 3.
  std::span<const double> matrix() const noexcept { return q_; }

  /// Nonnegative entries, no all-zero column, strictly increasing wavelengths.
  void validate() const;

  bool operator==(const SRF&) const = default;

 private:
  std::vector<double> wavelengths_;
  std::vector<double> q_;
};

/// Broad Gaussian R/G/B responses (peaks 600/540/460 nm, sigma 40 nm) sampled on
/// the given grid, each column scaled to sum 1. A stand-in when no measured
/// camera curve is supplied.
SRF default_srf(const std::vector<double>& wavelengths);

// HSC1 container. See README for the byte layout.
inline constexpr std::size_t kHscHeaderBytes = 20;

SpectralCube read_cube(const std::filesystem::path& path);
void write_cube(const SpectralCube& cube, const std::filesystem::path& path);

SRF read_srf(const std::filesystem::path& path);
void write_srf(const SRF& srf, const std::filesystem::path& path);

/// PNG, RGB order. Values must already lie in [0,1]; they are rounded to the
/// nearest code so a quantized image round-trips exactly.
void write_rgb(const RGBImage& image, const std::filesystem::path& path, int bit_depth);
/// Returns samples n / (2^d - 1) for the stored codes n.
RGBImage read_rgb(const std::filesystem::path& path);
/// Bit depth recorded in a PNG header.
int rgb_bit_depth(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames on success, so a failed
/// write never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace specforge
