#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specforge/cube.hpp"
#include "specforge/degrade.hpp"
#include "specforge/optics.hpp"

namespace specforge {

struct MetamerMode {
  enum class Kind { none, fixed, on_the_fly };
  Kind kind = Kind::none;
  double alpha = 0.0;  ///< fixed
  double lo = -1.0;    ///< on_the_fly range
  double hi = 2.0;
};

std::string to_string(MetamerMode::Kind kind);
MetamerMode::Kind parse_metamer_kind(const std::string& name);

struct CropSpec {
  bool center = false;
  std::size_t width = 0;
  std::size_t height = 0;
};

struct PipelineConfig {
  std::size_t patch_size = 128;
  std::size_t stride = 128;
  double split_fraction = 0.9;
  bool spatial_aug = true;
  MetamerMode metamer;
  /// Emit a standard pair and an alpha = 0 metamer pair per validation scene.
  bool validation_metamers = false;
  EncodingSpec encoding;
  DegradationConfig degradation;
  CropSpec crop;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AugmentOps {
  int rot90 = 0;  ///< quarter turns counter-clockwise, 0..3
  bool flip_h = false;
  bool flip_v = false;
  bool operator==(const AugmentOps&) const = default;
};

SpectralCube rot90(const SpectralCube& cube, int quarter_turns);
SpectralCube flip_h(const SpectralCube& cube);
SpectralCube flip_v(const SpectralCube& cube);
/// rot90 first, then horizontal flip, then vertical flip.
SpectralCube apply_augment(const SpectralCube& cube, const AugmentOps& ops);

SpectralCube crop_region(const SpectralCube& cube, std::size_t y, std::size_t x, std::size_t height, std::size_t width);
SpectralCube apply_crop(const SpectralCube& cube, const CropSpec& crop);

struct Patch {
  SpectralCube cube;
  std::size_t origin_y = 0;
  std::size_t origin_x = 0;
  AugmentOps ops;
  std::uint64_t seed = 0;
};

/// Origins along one axis: multiples of stride, plus a final origin flush with the edge.
std::vector<std::size_t> patch_origins(std::size_t extent, std::size_t patch, std::size_t stride);

std::vector<Patch> extract_patches(const SpectralCube& cube, std::size_t patch, std::size_t stride,
                                   std::uint64_t seed, bool spatial_aug);

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> val;
};

/// Seeded shuffle; the first ceil(fraction * n) ids go to train.
SplitResult split(const std::vector<std::string>& ids, double fraction, std::uint64_t seed);

/// Everything needed to rebuild a pair bit-exactly from its source cube.
struct Provenance {
  std::string pair_id;
  std::string source_id;
  CropSpec crop;
  bool full_frame = true;
  std::size_t origin_y = 0;
  std::size_t origin_x = 0;
  std::size_t patch_size = 0;
  AugmentOps ops;
  std::optional<double> alpha;  ///< unset: ground truth is the source itself
  EncodingSpec encoding;
  DegradationConfig degradation;
  std::uint64_t pair_seed = 0;
  // Outcome of metamer substitution, informational.
  std::size_t clipped_pixels = 0;
  bool exact_metamer = true;
};

struct SamplePair {
  std::string id;
  RGBImage rgb;        ///< degraded measurement
  RGBImage rgb_clean;  ///< formed from hsi before degradation
  SpectralCube hsi;    ///< supervision target
  Provenance provenance;
};

/// Substitutes the ground truth by a metamer (per alpha), forms the RGB
/// measurement under the encoding, then degrades it.
SamplePair render_pair(const SpectralCube& cube, const SRF& srf, std::optional<double> alpha,
                       const EncodingSpec& encoding, const DegradationConfig& degradation, Provenance provenance);

/// Resolves alpha from the metamer mode and the noise seed from pair_seed, then renders.
SamplePair synthesize_pair(const SpectralCube& cube, const SRF& srf, const PipelineConfig& config,
                           std::uint64_t pair_seed, Provenance provenance = {});

/// Rebuilds a pair from the untouched source scene and its provenance.
SamplePair replay_pair(const SpectralCube& source, const SRF& srf, const Provenance& provenance);

struct Scene {
  std::string id;
  SpectralCube cube;
};

std::uint64_t scene_seed(std::uint64_t seed, const std::string& scene_id);

/// Full-frame pairs per scene: the standard pair, plus the alpha = 0 metamer
/// pair when validation_metamers or a metamer mode is set.
std::vector<SamplePair> build_validation_set(const std::vector<Scene>& scenes, const SRF& srf,
                                             const PipelineConfig& config);

/// Patch pairs for one training scene.
std::vector<SamplePair> build_training_pairs(const Scene& scene, const SRF& srf, const PipelineConfig& config);

struct CubePair {
  std::string id;
  SpectralCube a;
  SpectralCube b;
};

struct SweepRow {
  std::string pair_id;
  std::string encoding;
  double max_abs_diff = 0.0;
  double mean_abs_diff = 0.0;
};

std::vector<SweepRow> encoding_sweep(const std::vector<CubePair>& pairs, const SRF& srf,
                                     const std::vector<EncodingSpec>& encodings);
/// Header `pair_id,encoding,max_abs_diff,mean_abs_diff`.
std::string sweep_csv(const std::vector<SweepRow>& rows);

// ---- config & output tree --------------------------------------------------

/// Flat `key = value` document (a TOML subset: strings, numbers, booleans, # comments).
std::map<std::string, std::string> parse_flat_config(const std::string& text);

struct SynthJob {
  PipelineConfig config;
  std::optional<std::filesystem::path> srf_path;
};

SynthJob synth_job_from_config(const std::map<std::string, std::string>& kv,
                               const std::filesystem::path& base_dir = {});

std::string provenance_json(const Provenance& p);
Provenance provenance_from_json(const std::string& text);

struct SynthSummary {
  std::size_t train_scenes = 0;
  std::size_t val_scenes = 0;
  std::size_t train_pairs = 0;
  std::size_t val_pairs = 0;
};

/// Reads every *.hsc in `in_dir` and writes out_dir/{train,val}/<id>.{hsc,png,json}
/// plus out_dir/split.json. Scenes run in parallel; output is independent of
/// the thread count.
SynthSummary run_synth(const PipelineConfig& config, const SRF* srf, const std::filesystem::path& in_dir,
                       const std::filesystem::path& out_dir);

std::vector<std::filesystem::path> list_cubes(const std::filesystem::path& dir);

}  // namespace specforge
