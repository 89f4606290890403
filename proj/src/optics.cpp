#include "specforge/optics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>

#include "specforge/colorimetry.hpp"
#include "specforge/errors.hpp"

namespace specforge {
namespace {

constexpr double kKernelSumTolerance = 1e-6;

void require_odd(PlaneShape k) {
  if (k.height % 2 == 0 || k.width % 2 == 0) throw ValidationError("kernel dimensions must be odd");
}

void normalize_in_place(std::span<double> kernel) {
  double sum = 0.0;
  for (double v : kernel) sum += v;
  if (!(sum > 0.0)) throw ValidationError("kernel has no energy");
  for (double& v : kernel) v /= sum;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> convolve_serial_direct(std::span<const double> plane, PlaneShape shape,
                                           std::span<const double> kernel, PlaneShape kshape, Padding padding) {
  std::vector<double> out(shape.pixels());
  kernels::serial::convolve(plane, shape, kernel, kshape, padding, out);
  return out;
}

}  // namespace

PSFStack::PSFStack(std::vector<double> wavelengths, std::size_t kernel_height, std::size_t kernel_width,
                   std::vector<double> kernels, Padding padding)
    : wavelengths_(std::move(wavelengths)),
      kh_(kernel_height),
      kw_(kernel_width),
      kernels_(std::move(kernels)),
      padding_(padding) {
  validate();
}

void PSFStack::validate() const {
  require_odd({kh_, kw_});
  if (kernels_.size() != bands() * kh_ * kw_) throw ValidationError("PSF data length does not match K*kh*kw");
  for (std::size_t k = 1; k < wavelengths_.size(); ++k)
    if (!(wavelengths_[k] > wavelengths_[k - 1])) throw ValidationError("PSF wavelengths must be strictly increasing");
  for (std::size_t k = 0; k < bands(); ++k) {
    double sum = 0.0;
    for (double v : kernel(k)) {
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("PSF entries must be finite and nonnegative");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kKernelSumTolerance)
      throw ValidationError("PSF kernel " + std::to_string(k) + " does not sum to 1");
  }
}

std::vector<double> convolve_band_direct(std::span<const double> plane, PlaneShape shape,
                                         std::span<const double> kernel, PlaneShape kshape, Padding padding) {
  require_odd(kshape);
  if (plane.size() != shape.pixels() || kernel.size() != kshape.pixels())
    throw ValidationError("plane or kernel size inconsistent with shape");
  std::vector<double> out(shape.pixels());
  kernels::parallel::convolve(plane, shape, kernel, kshape, padding, out);
  return out;
}

std::vector<double> convolve_band_fft(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel,
                                      PlaneShape kshape, Padding padding) {
  require_odd(kshape);
  if (plane.size() != shape.pixels() || kernel.size() != kshape.pixels())
    throw ValidationError("plane or kernel size inconsistent with shape");
  if (shape.pixels() == 0) return {};

  // Pad by the kernel half-size under the boundary rule, then take the
  // linear convolution of padded plane and kernel on a grid large enough
  // that the circular FFT product does not wrap.
  const auto ch = static_cast<std::ptrdiff_t>(kshape.height / 2);
  const auto cw = static_cast<std::ptrdiff_t>(kshape.width / 2);
  const auto h = static_cast<std::ptrdiff_t>(shape.height);
  const auto w = static_cast<std::ptrdiff_t>(shape.width);
  const std::size_t fh = shape.height + 4 * static_cast<std::size_t>(ch);
  const std::size_t fw = shape.width + 4 * static_cast<std::size_t>(cw);
  const std::size_t fwc = fw / 2 + 1;

  double* a = fftw_alloc_real(fh * fw);
  double* b = fftw_alloc_real(fh * fw);
  fftw_complex* fa = fftw_alloc_complex(fh * fwc);
  fftw_complex* fb = fftw_alloc_complex(fh * fwc);
  std::fill(a, a + fh * fw, 0.0);
  std::fill(b, b + fh * fw, 0.0);
  for (std::ptrdiff_t y = 0; y < h + 2 * ch; ++y) {
    const std::ptrdiff_t sy = wrap_index(y - ch, h, padding);
    for (std::ptrdiff_t x = 0; x < w + 2 * cw; ++x)
      a[y * static_cast<std::ptrdiff_t>(fw) + x] = plane[sy * w + wrap_index(x - cw, w, padding)];
  }
  for (std::size_t i = 0; i < kshape.height; ++i)
    for (std::size_t j = 0; j < kshape.width; ++j) b[i * fw + j] = kernel[i * kshape.width + j];

  fftw_plan pa, pb, pinv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const int n0 = static_cast<int>(fh), n1 = static_cast<int>(fw);
    pa = fftw_plan_dft_r2c_2d(n0, n1, a, fa, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_2d(n0, n1, b, fb, FFTW_ESTIMATE);
    pinv = fftw_plan_dft_c2r_2d(n0, n1, fa, a, FFTW_ESTIMATE);
  }
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t i = 0; i < fh * fwc; ++i) {
    const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
    const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
    fa[i][0] = re;
    fa[i][1] = im;
  }
  fftw_execute(pinv);

  const double scale = 1.0 / static_cast<double>(fh * fw);
  std::vector<double> out(shape.pixels());
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x)
      out[y * w + x] = a[(y + 2 * ch) * static_cast<std::ptrdiff_t>(fw) + x + 2 * cw] * scale;

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pinv);
  }
  fftw_free(a);
  fftw_free(b);
  fftw_free(fa);
  fftw_free(fb);
  return out;
}

std::vector<double> convolve_band(std::span<const double> plane, PlaneShape shape, std::span<const double> kernel,
                                  PlaneShape kshape, Padding padding) {
  if (kshape.height <= kDirectConvolutionMax && kshape.width <= kDirectConvolutionMax)
    return convolve_band_direct(plane, shape, kernel, kshape, padding);
  return convolve_band_fft(plane, shape, kernel, kshape, padding);
}

SpectralCube blur_cube(const SpectralCube& cube, const PSFStack& psf) {
  if (psf.bands() != cube.bands())
    throw ValidationError("PSF stack has " + std::to_string(psf.bands()) + " bands, cube has " +
                          std::to_string(cube.bands()));
  if (psf.wavelengths() != cube.wavelengths()) throw ValidationError("PSF and cube wavelength grids differ");
  if (psf.kernel_height() > cube.height() || psf.kernel_width() > cube.width())
    throw ValidationError("PSF kernel is larger than the image");
  const PlaneShape shape{cube.height(), cube.width()};
  const PlaneShape kshape = psf.kernel_shape();
  const bool direct = kshape.height <= kDirectConvolutionMax && kshape.width <= kDirectConvolutionMax;
  SpectralCube out(cube.height(), cube.width(), cube.wavelengths(), false);
  const auto bands = static_cast<std::ptrdiff_t>(cube.bands());
  // Bands are independent; each task runs the serial kernel on one band.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < bands; ++k) {
    auto plane = cube.band(static_cast<std::size_t>(k));
    auto blurred = direct ? convolve_serial_direct(plane, shape, psf.kernel(k), kshape, psf.padding())
                          : convolve_band_fft(plane, shape, psf.kernel(k), kshape, psf.padding());
    std::copy(blurred.begin(), blurred.end(), out.band(static_cast<std::size_t>(k)).begin());
  }
  return out;
}

RGBImage form_aberrated(const SpectralCube& cube, const PSFStack& psf, const SRF& srf) {
  require_matching_grid(cube, srf);
  return project(blur_cube(cube, psf), srf);
}

PSFStack delta_stack(const std::vector<double>& wavelengths, std::size_t size) {
  require_odd({size, size});
  std::vector<double> kernels(wavelengths.size() * size * size, 0.0);
  const std::size_t c = size / 2;
  for (std::size_t k = 0; k < wavelengths.size(); ++k) kernels[k * size * size + c * size + c] = 1.0;
  return PSFStack(wavelengths, size, size, std::move(kernels));
}

PSFStack gen_chromatic(const std::vector<double>& wavelengths, const ChromaticParams& p) {
  if (!(p.sigma0 > 0.0)) throw ValidationError("sigma0 must be positive");
  require_odd({p.size, p.size});
  double max_sigma = 0.0;
  for (double wl : wavelengths) {
    const double s = p.sigma0 + p.sigma_slope * std::fabs(wl - p.ref_lambda);
    if (!(s > 0.0)) throw ValidationError("Gaussian width must stay positive across the band range");
    max_sigma = std::max(max_sigma, s);
  }
  if (static_cast<double>(p.size) < 4.0 * max_sigma)
    throw ValidationError("kernel size must be at least 4 sigma at every band");

  const std::size_t n = p.size;
  const double c = static_cast<double>(n / 2);
  std::vector<double> kernels(wavelengths.size() * n * n);
  for (std::size_t k = 0; k < wavelengths.size(); ++k) {
    const double sigma = p.sigma0 + p.sigma_slope * std::fabs(wavelengths[k] - p.ref_lambda);
    const double cx = c + p.shift_slope * (wavelengths[k] - p.ref_lambda);
    std::span<double> ker(kernels.data() + k * n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double dy = static_cast<double>(i) - c;
        const double dx = static_cast<double>(j) - cx;
        ker[i * n + j] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      }
    normalize_in_place(ker);
  }
  return PSFStack(wavelengths, n, n, std::move(kernels));
}

PSFStack gen_grating(const std::vector<double>& wavelengths, const GratingParams& p) {
  if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw ValidationError("grating efficiency eta must lie in [0,1]");
  require_odd({p.size, p.size});
  const std::size_t n = p.size;
  const auto c = static_cast<std::ptrdiff_t>(n / 2);
  std::vector<double> kernels(wavelengths.size() * n * n, 0.0);
  for (std::size_t k = 0; k < wavelengths.size(); ++k) {
    double* ker = kernels.data() + k * n * n;
    ker[c * n + c] += 1.0 - p.eta;
    if (p.eta == 0.0) continue;
    const double d = p.disp_slope * (wavelengths[k] - p.ref_lambda);
    const double x = static_cast<double>(c) + d;
    const double fx = std::floor(x);
    const double t = x - fx;
    const auto x0 = static_cast<std::ptrdiff_t>(fx);
    const std::ptrdiff_t x1 = t > 0.0 ? x0 + 1 : x0;
    if (x0 < 0 || x1 >= static_cast<std::ptrdiff_t>(n))
      throw ValidationError("first-order displacement falls outside the kernel support");
    // Displacement is purely horizontal, so the vertical bilinear weights are (1, 0).
    ker[c * n + x0] += p.eta * (1.0 - t);
    if (t > 0.0) ker[c * n + x1] += p.eta * t;
  }
  return PSFStack(wavelengths, n, n, std::move(kernels));
}

PSFStack gen_rotation(const std::vector<double>& wavelengths, const RotationParams& p) {
  if (!(p.sigma_minor > 0.0)) throw ValidationError("sigma_minor must be positive");
  if (p.sigma_minor > p.sigma_major) throw ValidationError("sigma_minor must not exceed sigma_major");
  require_odd({p.size, p.size});
  if (static_cast<double>(p.size) < 4.0 * p.sigma_major) throw ValidationError("kernel size must be at least 4 sigma");

  const std::size_t n = p.size;
  const std::size_t bands = wavelengths.size();
  const double c = static_cast<double>(n / 2);
  std::vector<double> kernels(bands * n * n);
  for (std::size_t k = 0; k < bands; ++k) {
    const double theta = bands > 1 ? p.angle_span * static_cast<double>(k) / static_cast<double>(bands - 1) : 0.0;
    const double ct = std::cos(theta), st = std::sin(theta);
    std::span<double> ker(kernels.data() + k * n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double dx = static_cast<double>(j) - c;
        const double dy = static_cast<double>(i) - c;
        const double u = dx * ct + dy * st;
        const double v = -dx * st + dy * ct;
        ker[i * n + j] = std::exp(-0.5 * (u * u / (p.sigma_major * p.sigma_major) +
                                          v * v / (p.sigma_minor * p.sigma_minor)));
      }
    normalize_in_place(ker);
  }
  return PSFStack(wavelengths, n, n, std::move(kernels));
}

std::string to_string(EncodingKind kind) {
  switch (kind) {
    case EncodingKind::none: return "none";
    case EncodingKind::chromatic: return "chromatic";
    case EncodingKind::grating: return "grating";
    case EncodingKind::rotation: return "rotation";
  }
  return "none";
}

EncodingKind parse_encoding_kind(const std::string& name) {
  if (name == "none") return EncodingKind::none;
  if (name == "chromatic") return EncodingKind::chromatic;
  if (name == "grating") return EncodingKind::grating;
  if (name == "rotation") return EncodingKind::rotation;
  throw ValidationError("unknown encoding kind '" + name + "'");
}

PSFStack make_psf(const EncodingSpec& spec, const std::vector<double>& wavelengths) {
  PSFStack stack;
  switch (spec.kind) {
    case EncodingKind::none: stack = delta_stack(wavelengths); break;
    case EncodingKind::chromatic: stack = gen_chromatic(wavelengths, spec.chromatic); break;
    case EncodingKind::grating: stack = gen_grating(wavelengths, spec.grating); break;
    case EncodingKind::rotation: stack = gen_rotation(wavelengths, spec.rotation); break;
  }
  stack.set_padding(spec.padding);
  return stack;
}

// ---- PSF1 container --------------------------------------------------------

namespace {

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<unsigned char>& b, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{b[pos + i]} << (8 * i);
  return v;
}

}  // namespace

void write_psf(const PSFStack& stack, const std::filesystem::path& path) {
  stack.validate();
  std::vector<unsigned char> b{'P', 'S', 'F', '1'};
  put_u32(b, static_cast<std::uint32_t>(stack.bands()));
  put_u32(b, static_cast<std::uint32_t>(stack.kernel_height()));
  put_u32(b, static_cast<std::uint32_t>(stack.kernel_width()));
  b.push_back(static_cast<unsigned char>(stack.padding()));
  b.insert(b.end(), 3, 0);
  for (double v : stack.wavelengths()) put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  for (double v : stack.kernels()) put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  write_file_atomic(path, b);
}

PSFStack read_psf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (b.size() < 20 || std::memcmp(b.data(), "PSF1", 4) != 0) throw FormatError(path.string() + ": not a PSF1 file");
  const std::uint64_t k = get_u32(b, 4), kh = get_u32(b, 8), kw = get_u32(b, 12);
  const std::uint8_t pad = b[16];
  if (pad > 1) throw FormatError(path.string() + ": unknown padding code");
  if (b.size() - 20 != (k + k * kh * kw) * 4)
    throw FormatError(path.string() + ": payload size does not match header dimensions");
  std::size_t pos = 20;
  auto next = [&] {
    double v = std::bit_cast<float>(get_u32(b, pos));
    pos += 4;
    return v;
  };
  std::vector<double> wl(k);
  for (auto& v : wl) v = next();
  std::vector<double> kernels(k * kh * kw);
  for (auto& v : kernels) v = next();
  return PSFStack(std::move(wl), kh, kw, std::move(kernels), static_cast<Padding>(pad));
}

}  // namespace specforge
