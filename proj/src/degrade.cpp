#include "specforge/degrade.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "specforge/errors.hpp"
#include "specforge/rng.hpp"

namespace specforge {
namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  return out + "'";
}

std::string substitute(std::string templ, const std::string& key, const std::string& value) {
  for (std::size_t pos = templ.find(key); pos != std::string::npos; pos = templ.find(key, pos + value.size()))
    templ.replace(pos, key.size(), value);
  return templ;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("specforge-codec-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

void DegradationConfig::validate() const {
  if (!(npe >= 0.0) || !std::isfinite(npe)) throw ValidationError("npe must be a finite value >= 0");
  if (quant) quant->validate();
  if (codec && codec->command.empty()) throw ValidationError("codec command is empty");
}

RGBImage clamp_unit(const RGBImage& image) {
  RGBImage out = image;
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

RGBImage poisson_noise(const RGBImage& image, double npe, std::uint64_t seed) {
  if (!(npe >= 0.0) || !std::isfinite(npe)) throw ValidationError("npe must be a finite value >= 0");
  RGBImage out = clamp_unit(image);
  if (npe == 0.0) return out;
  auto data = out.data();
  const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    data[i] = static_cast<double>(sample_poisson(rng, data[i] * npe)) / npe;
  }
  return out;
}

RGBImage run_codec(const RGBImage& image, const CodecCommand& codec, int bit_depth) {
  TempDir dir;
  const auto in = dir.path() / "in.png";
  const auto out = dir.path() / "out.png";
  write_rgb(image, in, bit_depth);
  std::string cmd = substitute(codec.command, "{in}", shell_quote(in.string()));
  cmd = substitute(cmd, "{out}", shell_quote(out.string()));
  const int status = std::system(cmd.c_str());
  const int code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status));
  if (code != 0) throw CodecError("codec command failed with status " + std::to_string(code), code);
  if (!std::filesystem::exists(out)) throw CodecError("codec command produced no output", 0);
  RGBImage decoded;
  try {
    decoded = read_rgb(out);
  } catch (const Error& e) {
    throw CodecError(std::string("codec output unreadable: ") + e.what(), 0);
  }
  if (decoded.height() != image.height() || decoded.width() != image.width())
    throw CodecError("codec changed the image dimensions", 0);
  return decoded;
}

RGBImage apply_chain(const RGBImage& image, const DegradationConfig& config) {
  config.validate();
  RGBImage out = poisson_noise(image, config.npe, config.seed);
  if (config.quant) out = quantize(out, *config.quant);
  if (config.codec) out = run_codec(out, *config.codec, config.quant ? config.quant->bit_depth : 16);
  return out;
}

}  // namespace specforge
