#include "specforge/cube.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "specforge/errors.hpp"

namespace specforge {
namespace {

void check_wavelengths(const std::vector<double>& wl) {
  for (std::size_t k = 0; k < wl.size(); ++k) {
    if (!std::isfinite(wl[k])) throw ValidationError("wavelength is not finite");
    if (k > 0 && !(wl[k] > wl[k - 1])) throw ValidationError("wavelengths must be strictly increasing");
  }
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

class ByteWriter {
 public:
  void raw(const char* s, std::size_t n) { buf_.insert(buf_.end(), s, s + n); }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  std::vector<unsigned char>& bytes() { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const unsigned char> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError(what_ + ": truncated");
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(u32())); }
  bool magic(const char* m) {
    need(4);
    bool ok = std::memcmp(bytes_.data() + pos_, m, 4) == 0;
    pos_ += 4;
    return ok;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const unsigned char> bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<double> default_wavelengths() {
  std::vector<double> wl;
  for (int nm = 400; nm <= 700; nm += 10) wl.push_back(nm);
  return wl;
}

SpectralCube::SpectralCube(std::size_t height, std::size_t width, std::vector<double> wavelengths, bool normalized)
    : height_(height), width_(width), wavelengths_(std::move(wavelengths)), normalized_(normalized) {
  check_wavelengths(wavelengths_);
  data_.assign(height_ * width_ * wavelengths_.size(), 0.0);
}

SpectralCube::SpectralCube(std::size_t height, std::size_t width, std::vector<double> wavelengths,
                           std::vector<double> data, bool normalized)
    : height_(height),
      width_(width),
      wavelengths_(std::move(wavelengths)),
      data_(std::move(data)),
      normalized_(normalized) {
  check_wavelengths(wavelengths_);
  if (data_.size() != height_ * width_ * wavelengths_.size())
    throw ValidationError("cube data length does not match M*N*K");
}

void SpectralCube::validate() const {
  check_wavelengths(wavelengths_);
  if (data_.size() != height_ * width_ * wavelengths_.size())
    throw ValidationError("cube data length does not match M*N*K");
  for (double v : data_) {
    if (!std::isfinite(v)) throw ValidationError("cube contains a non-finite sample");
    if (normalized_ && (v < 0.0 || v > 1.0)) throw ValidationError("normalized cube has a sample outside [0,1]");
  }
}

RGBImage::RGBImage(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * width * kChannels, 0.0) {}

RGBImage::RGBImage(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (data_.size() != height_ * width_ * kChannels) throw ValidationError("RGB data length does not match M*N*3");
}

void RGBImage::validate() const {
  if (data_.size() != height_ * width_ * kChannels) throw ValidationError("RGB data length does not match M*N*3");
  for (double v : data_)
    if (!std::isfinite(v)) throw ValidationError("RGB image contains a non-finite sample");
}

SRF::SRF(std::vector<double> wavelengths, std::vector<double> q) : wavelengths_(std::move(wavelengths)), q_(std::move(q)) {
  validate();
}

void SRF::validate() const {
  check_wavelengths(wavelengths_);
  if (q_.size() != wavelengths_.size() * 3) throw ValidationError("SRF matrix must be K x 3");
  for (std::size_t c = 0; c < 3; ++c) {
    bool positive = false;
    for (std::size_t k = 0; k < bands(); ++k) {
      double v = q_[k * 3 + c];
      if (!std::isfinite(v)) throw ValidationError("SRF entry is not finite");
      if (v < 0.0) throw ValidationError("SRF entry is negative");
      positive = positive || v > 0.0;
    }
    if (!positive) throw ValidationError("SRF column " + std::to_string(c) + " is all zero");
  }
}

SRF default_srf(const std::vector<double>& wavelengths) {
  constexpr double peaks[3] = {600.0, 540.0, 460.0};
  constexpr double sigma = 40.0;
  std::vector<double> q(wavelengths.size() * 3);
  for (std::size_t k = 0; k < wavelengths.size(); ++k)
    for (std::size_t c = 0; c < 3; ++c) {
      double d = (wavelengths[k] - peaks[c]) / sigma;
      q[k * 3 + c] = std::exp(-0.5 * d * d);
    }
  // unit columns: a flat spectrum of 1 projects to RGB (1,1,1)
  for (std::size_t c = 0; c < 3; ++c) {
    double sum = 0.0;
    for (std::size_t k = 0; k < wavelengths.size(); ++k) sum += q[k * 3 + c];
    for (std::size_t k = 0; k < wavelengths.size(); ++k) q[k * 3 + c] /= sum;
  }
  return SRF(wavelengths, std::move(q));
}

void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into place: " + path.string());
  }
}

void write_cube(const SpectralCube& cube, const std::filesystem::path& path) {
  cube.validate();
  ByteWriter w;
  w.raw("HSC1", 4);
  w.u32(static_cast<std::uint32_t>(cube.height()));
  w.u32(static_cast<std::uint32_t>(cube.width()));
  w.u32(static_cast<std::uint32_t>(cube.bands()));
  w.u8(cube.normalized() ? 1 : 0);
  w.u8(0);
  w.u8(0);
  w.u8(0);
  for (double wl : cube.wavelengths()) w.f32(wl);
  for (double v : cube.data()) w.f32(v);
  write_file_atomic(path, w.bytes());
}

SpectralCube read_cube(const std::filesystem::path& path) {
  auto bytes = slurp(path);
  ByteReader r(bytes, path.string());
  if (!r.magic("HSC1")) throw FormatError(path.string() + ": not an HSC1 file");
  std::uint64_t m = r.u32(), n = r.u32(), k = r.u32();
  std::uint8_t flag = r.u8();
  if (flag > 1) throw FormatError(path.string() + ": invalid normalized flag");
  r.skip(3);
  std::uint64_t expected = (k + m * n * k) * 4;
  if (r.remaining() != expected)
    throw FormatError(path.string() + ": payload size does not match header dimensions");
  std::vector<double> wl(k);
  for (auto& v : wl) v = r.f32();
  std::vector<double> data(m * n * k);
  for (auto& v : data) v = r.f32();
  SpectralCube cube(m, n, std::move(wl), std::move(data), flag == 1);
  cube.validate();
  return cube;
}

SRF read_srf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty SRF file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "wavelength_nm,r,g,b") throw FormatError(path.string() + ": bad SRF header");
  std::vector<double> wl, q;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (vals.size() != 4) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 4 columns");
    wl.push_back(vals[0]);
    q.insert(q.end(), vals.begin() + 1, vals.end());
  }
  return SRF(std::move(wl), std::move(q));
}

void write_srf(const SRF& srf, const std::filesystem::path& path) {
  srf.validate();
  std::ostringstream out;
  out << "wavelength_nm,r,g,b\n" << std::setprecision(17);
  for (std::size_t k = 0; k < srf.bands(); ++k)
    out << srf.wavelengths()[k] << ',' << srf.q(k, 0) << ',' << srf.q(k, 1) << ',' << srf.q(k, 2) << '\n';
  auto s = out.str();
  write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

// ---- PNG -------------------------------------------------------------------

namespace {

struct PngBuffer {
  std::vector<unsigned char> bytes;
  std::size_t pos = 0;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  buf->bytes.insert(buf->bytes.end(), data, data + len);
}

void png_read_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<PngBuffer*>(png_get_io_ptr(png));
  if (buf->pos + len > buf->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(data, buf->bytes.data() + buf->pos, len);
  buf->pos += len;
}

[[noreturn]] void png_error_cb(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  *err = msg;
  png_longjmp(png, 1);
}

void png_warn_cb(png_structp, png_const_charp) {}

}  // namespace

void write_rgb(const RGBImage& image, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ValidationError("bit depth must be 8 or 16");
  image.validate();
  if (image.height() == 0 || image.width() == 0) throw ValidationError("cannot write an empty image");
  for (double v : image.data())
    if (v < 0.0 || v > 1.0) throw ValidationError("RGB sample outside [0,1]; quantize before writing");

  const double scale = bit_depth == 8 ? 255.0 : 65535.0;
  const std::size_t bytes_per_sample = bit_depth / 8;
  const std::size_t stride = image.width() * 3 * bytes_per_sample;
  std::vector<unsigned char> rows(image.height() * stride);
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        auto code = static_cast<std::uint32_t>(std::lround(image.at(y, x, c) * scale));
        unsigned char* p = rows.data() + y * stride + (x * 3 + c) * bytes_per_sample;
        if (bit_depth == 8) {
          p[0] = static_cast<unsigned char>(code);
        } else {  // PNG stores 16-bit samples big-endian
          p[0] = static_cast<unsigned char>(code >> 8);
          p[1] = static_cast<unsigned char>(code & 0xff);
        }
      }

  std::string err;
  PngBuffer buf;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb, png_warn_cb);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> row_ptrs(image.height());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + err);
  }
  png_set_write_fn(png, &buf, png_write_cb, nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), bit_depth,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  for (std::size_t y = 0; y < image.height(); ++y) row_ptrs[y] = rows.data() + y * stride;
  png_set_rows(png, info, row_ptrs.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  write_file_atomic(path, buf.bytes);
}

namespace {

RGBImage decode_png(PngBuffer& buf, const std::string& name, int* depth_out) {
  if (buf.bytes.size() < 8 || png_sig_cmp(buf.bytes.data(), 0, 8) != 0) throw FormatError(name + ": not a PNG file");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb, png_warn_cb);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(name + ": " + err);
  }
  png_set_read_fn(png, &buf, png_read_cb);
  png_read_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_uint_32 w = png_get_image_width(png, info), h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_RGB || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(name + ": expected 8- or 16-bit RGB PNG");
  }
  png_bytepp rows = png_get_rows(png, info);
  RGBImage image(h, w);
  const double scale = depth == 8 ? 255.0 : 65535.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        std::uint32_t code = depth == 8 ? rows[y][x * 3 + c]
                                        : (std::uint32_t{rows[y][(x * 3 + c) * 2]} << 8) | rows[y][(x * 3 + c) * 2 + 1];
        image.at(y, x, c) = code / scale;
      }
  png_destroy_read_struct(&png, &info, nullptr);
  if (depth_out) *depth_out = depth;
  return image;
}

}  // namespace

RGBImage read_rgb(const std::filesystem::path& path) {
  PngBuffer buf{slurp(path), 0};
  return decode_png(buf, path.string(), nullptr);
}

int rgb_bit_depth(const std::filesystem::path& path) {
  PngBuffer buf{slurp(path), 0};
  int depth = 0;
  decode_png(buf, path.string(), &depth);
  return depth;
}

}  // namespace specforge
