#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specforge/cube.hpp"
#include "specforge/kernels.hpp"

namespace specforge {

/// One shift-invariant convolution kernel per band. Kernels have odd
/// dimensions (centered), nonnegative entries, and unit sum.
class PSFStack {
 public:
  PSFStack() = default;
  PSFStack(std::vector<double> wavelengths, std::size_t kernel_height, std::size_t kernel_width,
           std::vector<double> kernels, Padding padding = Padding::reflect);

  std::size_t bands() const noexcept { return wavelengths_.size(); }
  std::size_t kernel_height() const noexcept { return kh_; }
  std::size_t kernel_width() const noexcept { return kw_; }
  PlaneShape kernel_shape() const noexcept { return {kh_, kw_}; }
  Padding padding() const noexcept { return padding_; }
  void set_padding(Padding p) noexcept { padding_ = p; }
  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  std::span<const double> kernels() const noexcept { return kernels_; }
  std::span<const double> kernel(std::size_t k) const { return {kernels_.data() + k * kh_ * kw_, kh_ * kw_}; }

  void validate() const;

  bool operator==(const PSFStack&) const = default;

 private:
  std::vector<double> wavelengths_;
  std::size_t kh_ = 0;
  std::size_t kw_ = 0;
  std::vector<double> kernels_;
  Padding padding_ = Padding::reflect;
};

/// Kernels up to this size (in both dimensions) are convolved directly.
inline constexpr std::size_t kDirectConvolutionMax = 15;

/// Convolution with boundary handling; output has the plane's shape.
/// Dispatches to the direct kernel or the FFT path by kernel size.
std::vector<double> convolve_band(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel,
                                  PlaneShape kshape, Padding padding);
std::vector<double> convolve_band_direct(std::span<const double> plane, PlaneShape shape,
                                         std::span<const double> kernel, PlaneShape kshape, Padding padding);
std::vector<double> convolve_band_fft(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel,
                                      PlaneShape kshape, Padding padding);

/// Convolves each band with its kernel, then projects with Q.
RGBImage form_aberrated(const SpectralCube& cube, const PSFStack& psf, const SRF& srf);
/// The per-band convolved cube before projection.
SpectralCube blur_cube(const SpectralCube& cube, const PSFStack& psf);

PSFStack delta_stack(const std::vector<double>& wavelengths, std::size_t size = 1);

struct ChromaticParams {
  double sigma0 = 1.0;         // px
  double sigma_slope = 0.01;   // px/nm
  double shift_slope = 0.01;   // px/nm
  double ref_lambda = 550.0;   // nm
  std::size_t size = 21;
};

struct GratingParams {
  double eta = 0.3;            // energy in the first order
  double disp_slope = 0.02;    // px/nm
  double ref_lambda = 550.0;
  std::size_t size = 21;
};

struct RotationParams {
  double sigma_major = 2.5;    // px
  double sigma_minor = 1.0;    // px
  double angle_span = 1.5707963267948966;  // rad across the band range
  std::size_t size = 21;
};

/// Isotropic Gaussian per band; width grows with |lambda - ref| and the
/// center drifts along x by shift_slope * (lambda - ref).
PSFStack gen_chromatic(const std::vector<double>& wavelengths, const ChromaticParams& p);
/// Zero order at the center plus a first order displaced along x,
/// bilinearly split for sub-pixel offsets.
PSFStack gen_grating(const std::vector<double>& wavelengths, const GratingParams& p);
/// Anisotropic Gaussian whose major axis turns linearly from 0 to angle_span.
PSFStack gen_rotation(const std::vector<double>& wavelengths, const RotationParams& p);

enum class EncodingKind { none, chromatic, grating, rotation };

struct EncodingSpec {
  EncodingKind kind = EncodingKind::none;
  ChromaticParams chromatic;
  GratingParams grating;
  RotationParams rotation;
  Padding padding = Padding::reflect;
};

std::string to_string(EncodingKind kind);
EncodingKind parse_encoding_kind(const std::string& name);

/// PSF stack for an encoding; kind none yields 1x1 deltas.
PSFStack make_psf(const EncodingSpec& spec, const std::vector<double>& wavelengths);

void write_psf(const PSFStack& stack, const std::filesystem::path& path);
PSFStack read_psf(const std::filesystem::path& path);

}  // namespace specforge
