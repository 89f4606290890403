#include "specforge/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "specforge/colorimetry.hpp"
#include "specforge/errors.hpp"
#include "specforge/metamer.hpp"
#include "specforge/rng.hpp"

namespace specforge {

using nlohmann::json;

std::string to_string(MetamerMode::Kind kind) {
  switch (kind) {
    case MetamerMode::Kind::none: return "none";
    case MetamerMode::Kind::fixed: return "fixed";
    case MetamerMode::Kind::on_the_fly: return "on_the_fly";
  }
  return "none";
}

MetamerMode::Kind parse_metamer_kind(const std::string& name) {
  if (name == "none") return MetamerMode::Kind::none;
  if (name == "fixed") return MetamerMode::Kind::fixed;
  if (name == "on_the_fly") return MetamerMode::Kind::on_the_fly;
  throw ValidationError("unknown metamer mode '" + name + "'");
}

void PipelineConfig::validate() const {
  if (!(split_fraction > 0.0 && split_fraction <= 1.0)) throw ValidationError("split_fraction must lie in (0,1]");
  if (patch_size == 0) throw ValidationError("patch_size must be positive");
  if (stride == 0) throw ValidationError("stride must be positive");
  if (metamer.kind == MetamerMode::Kind::fixed && !std::isfinite(metamer.alpha))
    throw ValidationError("alpha must be finite");
  if (metamer.kind == MetamerMode::Kind::on_the_fly && !(metamer.lo < metamer.hi))
    throw ValidationError("metamer alpha range must satisfy lo < hi");
  if (crop.center && (crop.width == 0 || crop.height == 0)) throw ValidationError("crop size must be positive");
  degradation.validate();
}

// ---- geometry --------------------------------------------------------------

namespace {

template <class Map>
SpectralCube remap(const SpectralCube& cube, std::size_t out_h, std::size_t out_w, Map src_of) {
  SpectralCube out(out_h, out_w, cube.wavelengths(), cube.normalized());
  for (std::size_t k = 0; k < cube.bands(); ++k)
    for (std::size_t y = 0; y < out_h; ++y)
      for (std::size_t x = 0; x < out_w; ++x) {
        auto [sy, sx] = src_of(y, x);
        out.at(y, x, k) = cube.at(sy, sx, k);
      }
  return out;
}

}  // namespace

SpectralCube rot90(const SpectralCube& cube, int quarter_turns) {
  const int t = ((quarter_turns % 4) + 4) % 4;
  const std::size_t h = cube.height(), w = cube.width();
  switch (t) {
    case 1: return remap(cube, w, h, [&](std::size_t y, std::size_t x) { return std::pair{x, w - 1 - y}; });
    case 2: return remap(cube, h, w, [&](std::size_t y, std::size_t x) { return std::pair{h - 1 - y, w - 1 - x}; });
    case 3: return remap(cube, w, h, [&](std::size_t y, std::size_t x) { return std::pair{h - 1 - x, y}; });
    default: return cube;
  }
}

SpectralCube flip_h(const SpectralCube& cube) {
  const std::size_t w = cube.width();
  return remap(cube, cube.height(), w, [&](std::size_t y, std::size_t x) { return std::pair{y, w - 1 - x}; });
}

SpectralCube flip_v(const SpectralCube& cube) {
  const std::size_t h = cube.height();
  return remap(cube, h, cube.width(), [&](std::size_t y, std::size_t x) { return std::pair{h - 1 - y, x}; });
}

SpectralCube apply_augment(const SpectralCube& cube, const AugmentOps& ops) {
  SpectralCube out = rot90(cube, ops.rot90);
  if (ops.flip_h) out = flip_h(out);
  if (ops.flip_v) out = flip_v(out);
  return out;
}

SpectralCube crop_region(const SpectralCube& cube, std::size_t y, std::size_t x, std::size_t height,
                         std::size_t width) {
  if (y + height > cube.height() || x + width > cube.width()) throw ValidationError("crop region exceeds the cube");
  return remap(cube, height, width, [&](std::size_t yy, std::size_t xx) { return std::pair{y + yy, x + xx}; });
}

SpectralCube apply_crop(const SpectralCube& cube, const CropSpec& crop) {
  if (!crop.center) return cube;
  if (crop.height > cube.height() || crop.width > cube.width())
    throw ValidationError("center crop larger than the cube");
  return crop_region(cube, (cube.height() - crop.height) / 2, (cube.width() - crop.width) / 2, crop.height,
                     crop.width);
}

std::vector<std::size_t> patch_origins(std::size_t extent, std::size_t patch, std::size_t stride) {
  if (patch == 0 || stride == 0) throw ValidationError("patch and stride must be positive");
  if (patch > extent) throw ValidationError("patch larger than the image");
  std::vector<std::size_t> origins;
  for (std::size_t o = 0; o + patch <= extent; o += stride) origins.push_back(o);
  if (origins.back() + patch < extent) origins.push_back(extent - patch);
  return origins;
}

std::vector<Patch> extract_patches(const SpectralCube& cube, std::size_t patch, std::size_t stride,
                                   std::uint64_t seed, bool spatial_aug) {
  const auto ys = patch_origins(cube.height(), patch, stride);
  const auto xs = patch_origins(cube.width(), patch, stride);
  std::vector<Patch> patches;
  patches.reserve(ys.size() * xs.size());
  std::uint64_t index = 0;
  for (std::size_t y : ys)
    for (std::size_t x : xs) {
      Patch p;
      p.origin_y = y;
      p.origin_x = x;
      p.seed = derive_seed(seed, index++);
      if (spatial_aug) {
        CounterRng rng(p.seed, 1);
        p.ops.rot90 = static_cast<int>(rng.below(4));
        p.ops.flip_h = rng.below(2) == 1;
        p.ops.flip_v = rng.below(2) == 1;
      }
      p.cube = apply_augment(crop_region(cube, y, x, patch, patch), p.ops);
      patches.push_back(std::move(p));
    }
  return patches;
}

SplitResult split(const std::vector<std::string>& ids, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("split fraction must lie in (0,1]");
  std::vector<std::string> order = ids;
  {
    std::vector<std::string> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ValidationError("duplicate scene id");
  }
  CounterRng rng(seed, 0x5eed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  // Guard against 0.9 * 10 landing a hair above 9.
  const auto n_train = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(order.size()) - 1e-9));
  SplitResult r;
  r.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  r.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return r;
}

// ---- pair synthesis --------------------------------------------------------

SamplePair render_pair(const SpectralCube& cube, const SRF& srf, std::optional<double> alpha,
                       const EncodingSpec& encoding, const DegradationConfig& degradation, Provenance provenance) {
  SamplePair pair;
  if (alpha) {
    MetamerResult m = generate(cube, srf, *alpha);
    provenance.clipped_pixels = m.clipped_pixel_count;
    provenance.exact_metamer = m.exact;
    pair.hsi = std::move(m.cube);
  } else {
    pair.hsi = cube;
  }
  provenance.alpha = alpha;
  provenance.encoding = encoding;
  provenance.degradation = degradation;

  if (encoding.kind == EncodingKind::none) {
    pair.rgb_clean = project(pair.hsi, srf);
  } else {
    pair.rgb_clean = form_aberrated(pair.hsi, make_psf(encoding, pair.hsi.wavelengths()), srf);
  }
  pair.rgb = apply_chain(pair.rgb_clean, degradation);
  pair.id = provenance.pair_id;
  pair.provenance = std::move(provenance);
  return pair;
}

SamplePair synthesize_pair(const SpectralCube& cube, const SRF& srf, const PipelineConfig& config,
                           std::uint64_t pair_seed, Provenance provenance) {
  std::optional<double> alpha;
  switch (config.metamer.kind) {
    case MetamerMode::Kind::none: break;
    case MetamerMode::Kind::fixed: alpha = config.metamer.alpha; break;
    case MetamerMode::Kind::on_the_fly: {
      CounterRng rng(pair_seed, 0);
      alpha = sample_alpha(rng, config.metamer.lo, config.metamer.hi);
      break;
    }
  }
  DegradationConfig degradation = config.degradation;
  degradation.seed = derive_seed(pair_seed, 2);
  provenance.pair_seed = pair_seed;
  return render_pair(cube, srf, alpha, config.encoding, degradation, std::move(provenance));
}

SamplePair replay_pair(const SpectralCube& source, const SRF& srf, const Provenance& provenance) {
  SpectralCube cube = apply_crop(source, provenance.crop);
  if (!provenance.full_frame)
    cube = apply_augment(
        crop_region(cube, provenance.origin_y, provenance.origin_x, provenance.patch_size, provenance.patch_size),
        provenance.ops);
  return render_pair(cube, srf, provenance.alpha, provenance.encoding, provenance.degradation, provenance);
}

std::uint64_t scene_seed(std::uint64_t seed, const std::string& scene_id) {
  return derive_seed(seed, hash_string(scene_id));
}

std::vector<SamplePair> build_validation_set(const std::vector<Scene>& scenes, const SRF& srf,
                                             const PipelineConfig& config) {
  const bool doubled = config.validation_metamers || config.metamer.kind != MetamerMode::Kind::none;
  std::vector<SamplePair> pairs;
  for (const auto& scene : scenes) {
    const std::uint64_t seed = scene_seed(config.seed, scene.id);
    const SpectralCube cube = apply_crop(scene.cube, config.crop);

    PipelineConfig standard = config;
    standard.metamer = {};
    Provenance prov;
    prov.pair_id = scene.id;
    prov.source_id = scene.id;
    prov.crop = config.crop;
    pairs.push_back(synthesize_pair(cube, srf, standard, derive_seed(seed, 0), prov));

    if (doubled) {
      PipelineConfig metamer = config;
      metamer.metamer = {MetamerMode::Kind::fixed, 0.0};
      prov.pair_id = scene.id + "_metamer";
      pairs.push_back(synthesize_pair(cube, srf, metamer, derive_seed(seed, 1), prov));
    }
  }
  return pairs;
}

std::vector<SamplePair> build_training_pairs(const Scene& scene, const SRF& srf, const PipelineConfig& config) {
  const SpectralCube cube = apply_crop(scene.cube, config.crop);
  const std::uint64_t seed = scene_seed(config.seed, scene.id);
  auto patches = extract_patches(cube, config.patch_size, config.stride, seed, config.spatial_aug);
  std::vector<SamplePair> pairs;
  pairs.reserve(patches.size());
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    Provenance prov;
    prov.pair_id = scene.id + "_p" + std::to_string(i);
    prov.source_id = scene.id;
    prov.crop = config.crop;
    prov.full_frame = false;
    prov.origin_y = p.origin_y;
    prov.origin_x = p.origin_x;
    prov.patch_size = config.patch_size;
    prov.ops = p.ops;
    pairs.push_back(synthesize_pair(p.cube, srf, config, p.seed, prov));
  }
  return pairs;
}

std::vector<SweepRow> encoding_sweep(const std::vector<CubePair>& pairs, const SRF& srf,
                                     const std::vector<EncodingSpec>& encodings) {
  std::vector<SweepRow> rows;
  rows.reserve(pairs.size() * encodings.size());
  for (const auto& pair : pairs)
    for (const auto& enc : encodings) {
      SeparabilityReport rep;
      if (enc.kind == EncodingKind::none) {
        rep = separability(pair.a, pair.b, srf, nullptr);
      } else {
        const PSFStack psf = make_psf(enc, pair.a.wavelengths());
        rep = separability(pair.a, pair.b, srf, &psf);
      }
      rows.push_back({pair.id, to_string(enc.kind), rep.max_abs_rgb_diff, rep.mean_abs_rgb_diff});
    }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "pair_id,encoding,max_abs_diff,mean_abs_diff\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.pair_id << ',' << r.encoding << ',' << r.max_abs_diff << ',' << r.mean_abs_diff << '\n';
  return out.str();
}

// ---- config ----------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ValidationError("config key '" + key + "' expects true or false");
}

Padding parse_padding(const std::string& v) {
  if (v == "reflect") return Padding::reflect;
  if (v == "circular") return Padding::circular;
  throw ValidationError("unknown padding '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (!value.empty() && (value[0] == '"' || value[0] == '\'')) {
      const auto close = value.find(value[0], 1);
      if (close == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": unterminated string");
      const std::string rest = trim(value.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw ValidationError("config line " + std::to_string(lineno) + ": trailing text");
      value = value.substr(1, close - 1);
    } else {
      const auto hash = value.find('#');
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ValidationError("config key '" + key + "' given twice");
    kv[key] = value;
  }
  return kv;
}

SynthJob synth_job_from_config(const std::map<std::string, std::string>& kv, const std::filesystem::path& base_dir) {
  SynthJob job;
  PipelineConfig& c = job.config;
  std::optional<bool> validation_metamers;
  std::string crop = "none";
  int bits = 0;
  for (const auto& [key, v] : kv) {
    if (key == "seed") c.seed = to_u64(key, v);
    else if (key == "patch_size") c.patch_size = to_u64(key, v);
    else if (key == "stride") c.stride = to_u64(key, v);
    else if (key == "split_fraction") c.split_fraction = to_double(key, v);
    else if (key == "spatial_aug") c.spatial_aug = to_bool(key, v);
    else if (key == "metamer_mode") c.metamer.kind = parse_metamer_kind(v);
    else if (key == "alpha") c.metamer.alpha = to_double(key, v);
    else if (key == "alpha_lo") c.metamer.lo = to_double(key, v);
    else if (key == "alpha_hi") c.metamer.hi = to_double(key, v);
    else if (key == "validation_metamers") validation_metamers = to_bool(key, v);
    else if (key == "encoding") c.encoding.kind = parse_encoding_kind(v);
    else if (key == "padding") c.encoding.padding = parse_padding(v);
    else if (key == "psf_size") {
      const auto n = to_u64(key, v);
      c.encoding.chromatic.size = c.encoding.grating.size = c.encoding.rotation.size = n;
    } else if (key == "sigma0") c.encoding.chromatic.sigma0 = to_double(key, v);
    else if (key == "sigma_slope") c.encoding.chromatic.sigma_slope = to_double(key, v);
    else if (key == "shift_slope") c.encoding.chromatic.shift_slope = to_double(key, v);
    else if (key == "ref_lambda") c.encoding.chromatic.ref_lambda = c.encoding.grating.ref_lambda = to_double(key, v);
    else if (key == "eta") c.encoding.grating.eta = to_double(key, v);
    else if (key == "disp_slope") c.encoding.grating.disp_slope = to_double(key, v);
    else if (key == "sigma_major") c.encoding.rotation.sigma_major = to_double(key, v);
    else if (key == "sigma_minor") c.encoding.rotation.sigma_minor = to_double(key, v);
    else if (key == "angle_span") c.encoding.rotation.angle_span = to_double(key, v);
    else if (key == "npe") c.degradation.npe = to_double(key, v);
    else if (key == "bits") bits = static_cast<int>(to_u64(key, v));
    else if (key == "codec") c.degradation.codec = CodecCommand{v};
    else if (key == "crop") crop = v;
    else if (key == "crop_width") c.crop.width = to_u64(key, v);
    else if (key == "crop_height") c.crop.height = to_u64(key, v);
    else if (key == "srf") job.srf_path = base_dir / v;
    else throw ValidationError("unknown config key '" + key + "'");
  }
  if (bits != 0) c.degradation.quant = QuantizationSpec{bits};
  if (crop == "center") c.crop.center = true;
  else if (crop != "none") throw ValidationError("crop must be none or center");
  c.validation_metamers = validation_metamers.value_or(c.metamer.kind != MetamerMode::Kind::none);
  c.validate();
  return job;
}

// ---- provenance ------------------------------------------------------------

std::string provenance_json(const Provenance& p) {
  json j;
  j["pair_id"] = p.pair_id;
  j["source_id"] = p.source_id;
  j["crop"] = {{"center", p.crop.center}, {"width", p.crop.width}, {"height", p.crop.height}};
  j["full_frame"] = p.full_frame;
  j["origin"] = {p.origin_y, p.origin_x};
  j["patch_size"] = p.patch_size;
  j["augment"] = {{"rot90", p.ops.rot90}, {"flip_h", p.ops.flip_h}, {"flip_v", p.ops.flip_v}};
  j["alpha"] = p.alpha ? json(*p.alpha) : json(nullptr);
  const auto& e = p.encoding;
  j["encoding"] = {
      {"kind", to_string(e.kind)},
      {"padding", e.padding == Padding::circular ? "circular" : "reflect"},
      {"chromatic",
       {{"sigma0", e.chromatic.sigma0},
        {"sigma_slope", e.chromatic.sigma_slope},
        {"shift_slope", e.chromatic.shift_slope},
        {"ref_lambda", e.chromatic.ref_lambda},
        {"size", e.chromatic.size}}},
      {"grating",
       {{"eta", e.grating.eta},
        {"disp_slope", e.grating.disp_slope},
        {"ref_lambda", e.grating.ref_lambda},
        {"size", e.grating.size}}},
      {"rotation",
       {{"sigma_major", e.rotation.sigma_major},
        {"sigma_minor", e.rotation.sigma_minor},
        {"angle_span", e.rotation.angle_span},
        {"size", e.rotation.size}}},
  };
  const auto& d = p.degradation;
  j["degradation"] = {{"npe", d.npe},
                      {"bits", d.quant ? d.quant->bit_depth : 0},
                      {"codec", d.codec ? json(d.codec->command) : json(nullptr)},
                      {"seed", d.seed}};
  j["pair_seed"] = p.pair_seed;
  j["clipped_pixels"] = p.clipped_pixels;
  j["exact_metamer"] = p.exact_metamer;
  return j.dump(2) + "\n";
}

Provenance provenance_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    Provenance p;
    p.pair_id = j.at("pair_id");
    p.source_id = j.at("source_id");
    p.crop = {j.at("crop").at("center"), j.at("crop").at("width"), j.at("crop").at("height")};
    p.full_frame = j.at("full_frame");
    p.origin_y = j.at("origin").at(0);
    p.origin_x = j.at("origin").at(1);
    p.patch_size = j.at("patch_size");
    p.ops = {j.at("augment").at("rot90"), j.at("augment").at("flip_h"), j.at("augment").at("flip_v")};
    if (!j.at("alpha").is_null()) p.alpha = j.at("alpha").get<double>();
    const auto& e = j.at("encoding");
    p.encoding.kind = parse_encoding_kind(e.at("kind"));
    p.encoding.padding = parse_padding(e.at("padding"));
    const auto& ch = e.at("chromatic");
    p.encoding.chromatic = {ch.at("sigma0"), ch.at("sigma_slope"), ch.at("shift_slope"), ch.at("ref_lambda"),
                            ch.at("size")};
    const auto& gr = e.at("grating");
    p.encoding.grating = {gr.at("eta"), gr.at("disp_slope"), gr.at("ref_lambda"), gr.at("size")};
    const auto& ro = e.at("rotation");
    p.encoding.rotation = {ro.at("sigma_major"), ro.at("sigma_minor"), ro.at("angle_span"), ro.at("size")};
    const auto& d = j.at("degradation");
    p.degradation.npe = d.at("npe");
    if (int bits = d.at("bits"); bits != 0) p.degradation.quant = QuantizationSpec{bits};
    if (!d.at("codec").is_null()) p.degradation.codec = CodecCommand{d.at("codec")};
    p.degradation.seed = d.at("seed");
    p.pair_seed = j.at("pair_seed");
    p.clipped_pixels = j.at("clipped_pixels");
    p.exact_metamer = j.at("exact_metamer");
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad provenance record: ") + e.what());
  }
}

// ---- output tree -----------------------------------------------------------

std::vector<std::filesystem::path> list_cubes(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".hsc") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

void write_pair(const SamplePair& pair, const std::filesystem::path& dir, int bits) {
  write_cube(pair.hsi, dir / (pair.id + ".hsc"));
  write_rgb(pair.rgb, dir / (pair.id + ".png"), bits);
  write_text(dir / (pair.id + ".json"), provenance_json(pair.provenance));
}

}  // namespace

SynthSummary run_synth(const PipelineConfig& config, const SRF* srf, const std::filesystem::path& in_dir,
                       const std::filesystem::path& out_dir) {
  config.validate();
  const auto files = list_cubes(in_dir);
  if (files.empty()) throw ValidationError("no .hsc files in " + in_dir.string());
  std::vector<std::string> ids;
  for (const auto& f : files) ids.push_back(f.stem().string());
  const SplitResult parts = split(ids, config.split_fraction, config.seed);

  std::filesystem::create_directories(out_dir / "train");
  std::filesystem::create_directories(out_dir / "val");
  {
    json j = {{"train", parts.train}, {"val", parts.val}};
    write_text(out_dir / "split.json", j.dump(2) + "\n");
  }

  const int bits = config.degradation.quant ? config.degradation.quant->bit_depth : 16;
  struct Task {
    std::string id;
    bool train;
  };
  std::vector<Task> tasks;
  for (const auto& id : parts.train) tasks.push_back({id, true});
  for (const auto& id : parts.val) tasks.push_back({id, false});
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.id < b.id; });

  std::vector<std::size_t> pair_counts(tasks.size(), 0);
  std::vector<std::exception_ptr> errors(tasks.size());
  const auto n = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    try {
      const auto& task = tasks[t];
      Scene scene{task.id, read_cube(in_dir / (task.id + ".hsc"))};
      const SRF scene_srf = srf ? *srf : default_srf(scene.cube.wavelengths());
      auto pairs = task.train ? build_training_pairs(scene, scene_srf, config)
                              : build_validation_set({scene}, scene_srf, config);
      const auto dir = out_dir / (task.train ? "train" : "val");
      for (const auto& p : pairs) write_pair(p, dir, bits);
      pair_counts[t] = pairs.size();
    } catch (...) {
      errors[t] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SynthSummary s;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (tasks[t].train) {
      ++s.train_scenes;
      s.train_pairs += pair_counts[t];
    } else {
      ++s.val_scenes;
      s.val_pairs += pair_counts[t];
    }
  }
  return s;
}

}  // namespace specforge
