#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "specforge/colorimetry.hpp"
#include "specforge/cube.hpp"

namespace specforge {

/// External lossy codec. `command` is run through the shell with {in} and
/// {out} replaced by PNG paths; it must leave a PNG at {out}.
struct CodecCommand {
  std::string command;
};

struct DegradationConfig {
  double npe = 0.0;  ///< full-scale photon electrons; 0 disables shot noise
  std::optional<QuantizationSpec> quant;
  std::optional<CodecCommand> codec;
  std::uint64_t seed = 0;

  void validate() const;
};

/// out = Poisson(v * npe) / npe on the clamped image. Sample i draws from
/// the counter stream (seed, i), so the result does not depend on threading.
RGBImage poisson_noise(const RGBImage& image, double npe, std::uint64_t seed);

/// Runs the codec command on `image` (stored at `bit_depth`) and reads back its output.
RGBImage run_codec(const RGBImage& image, const CodecCommand& codec, int bit_depth);

/// clamp -> shot noise -> quantization -> codec.
RGBImage apply_chain(const RGBImage& image, const DegradationConfig& config);

RGBImage clamp_unit(const RGBImage& image);

}  // namespace specforge
