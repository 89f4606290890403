#include "specforge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "specforge/colorimetry.hpp"
#include "specforge/degrade.hpp"
#include "specforge/errors.hpp"
#include "specforge/metamer.hpp"
#include "specforge/metrics.hpp"
#include "specforge/optics.hpp"
#include "specforge/oracle.hpp"
#include "specforge/parallel.hpp"
#include "specforge/pipeline.hpp"

namespace specforge::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::vector<double> parse_wavelength_grid(const std::string& spec) {
  // start:step:stop, inclusive
  std::istringstream in(spec);
  double start = 0, step = 0, stop = 0;
  char c1 = 0, c2 = 0;
  if (!(in >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':' || !(step > 0) || stop < start)
    throw ValidationError("wavelength grid must look like start:step:stop");
  std::vector<double> wl;
  for (int i = 0;; ++i) {
    const double v = start + step * i;
    if (v > stop + 1e-9 * step) break;
    wl.push_back(v);
  }
  return wl;
}

SRF load_srf(const std::string& path, const std::vector<double>& wavelengths) {
  return path.empty() ? default_srf(wavelengths) : read_srf(path);
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ValidationError("range must be lo,hi");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ValidationError("range must be lo,hi");
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral image formation, metamer augmentation, and evaluation toolkit", "specforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("specforge ") + kVersion + " (cube HSC1, psf PSF1)");
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: SPECFORGE_THREADS, else all cores)");

  // project
  auto* project_cmd = app.add_subcommand("project", "Project a cube to RGB with an SRF");
  std::string in_path, out_path, srf_path, psf_path;
  int bits = 16;
  project_cmd->add_option("--in", in_path, "Input cube (.hsc)")->required();
  project_cmd->add_option("--srf", srf_path, "SRF CSV (default: built-in Gaussian RGB)");
  project_cmd->add_option("--out", out_path, "Output PNG")->required();
  project_cmd->add_option("--bits", bits, "PNG bit depth")->check(CLI::IsMember({8, 16}));

  // psf gen
  auto* psf_cmd = app.add_subcommand("psf", "PSF stack tools");
  psf_cmd->require_subcommand(1);
  auto* psf_gen = psf_cmd->add_subcommand("gen", "Generate a parametric PSF stack");
  std::string kind = "chromatic", grid = "400:10:700", like_path, padding = "reflect";
  EncodingSpec enc;
  std::size_t psf_size = 21;
  psf_gen->add_option("--kind", kind)->check(CLI::IsMember({"none", "chromatic", "grating", "rotation"}));
  psf_gen->add_option("--out", out_path)->required();
  psf_gen->add_option("--wavelengths", grid, "start:step:stop in nm");
  psf_gen->add_option("--like", like_path, "Take the wavelength grid from this cube");
  psf_gen->add_option("--size", psf_size);
  psf_gen->add_option("--padding", padding)->check(CLI::IsMember({"reflect", "circular"}));
  psf_gen->add_option("--sigma0", enc.chromatic.sigma0);
  psf_gen->add_option("--sigma-slope", enc.chromatic.sigma_slope);
  psf_gen->add_option("--shift-slope", enc.chromatic.shift_slope);
  psf_gen->add_option("--ref-lambda", enc.chromatic.ref_lambda);
  psf_gen->add_option("--eta", enc.grating.eta);
  psf_gen->add_option("--disp-slope", enc.grating.disp_slope);
  psf_gen->add_option("--sigma-major", enc.rotation.sigma_major);
  psf_gen->add_option("--sigma-minor", enc.rotation.sigma_minor);
  psf_gen->add_option("--angle-span", enc.rotation.angle_span);

  // form
  auto* form_cmd = app.add_subcommand("form", "Aberrated image formation: blur each band, then project");
  form_cmd->add_option("--in", in_path)->required();
  form_cmd->add_option("--psf", psf_path)->required();
  form_cmd->add_option("--srf", srf_path);
  form_cmd->add_option("--out", out_path)->required();
  form_cmd->add_option("--bits", bits)->check(CLI::IsMember({8, 16}));

  // metamer
  auto* metamer_cmd = app.add_subcommand("metamer", "Generate a metamer S* + alpha B");
  std::optional<double> alpha;
  bool random = false;
  std::uint64_t seed = 0;
  std::string range = "-1,2";
  metamer_cmd->add_option("--in", in_path)->required();
  metamer_cmd->add_option("--out", out_path)->required();
  metamer_cmd->add_option("--srf", srf_path);
  auto* alpha_opt = metamer_cmd->add_option("--alpha", alpha);
  auto* random_opt = metamer_cmd->add_flag("--random", random, "Draw alpha uniformly from --range");
  alpha_opt->excludes(random_opt);
  metamer_cmd->add_option("--seed", seed);
  metamer_cmd->add_option("--range", range, "lo,hi");

  // degrade
  auto* degrade_cmd = app.add_subcommand("degrade", "Shot noise, quantization, and optional codec on an RGB PNG");
  double npe = 0.0;
  int degrade_bits = 0;
  std::string codec;
  degrade_cmd->add_option("--in", in_path)->required();
  degrade_cmd->add_option("--out", out_path)->required();
  degrade_cmd->add_option("--npe", npe);
  degrade_cmd->add_option("--bits", degrade_bits, "Quantize to 8 or 16 bits")->check(CLI::IsMember({8, 16}));
  degrade_cmd->add_option("--seed", seed);
  degrade_cmd->add_option("--codec", codec, "Command template with {in} and {out}");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Reconstruction metrics between two cubes");
  std::string est_path, gt_path;
  bool as_json = false;
  double peak = 1.0;
  eval_cmd->add_option("--est", est_path)->required();
  eval_cmd->add_option("--gt", gt_path)->required();
  eval_cmd->add_option("--max", peak, "PSNR peak value");
  eval_cmd->add_flag("--json", as_json);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Build a train/val dataset tree from a directory of cubes");
  std::string config_path, in_dir, out_dir;
  std::optional<std::uint64_t> seed_override;
  synth_cmd->add_option("--config", config_path)->required();
  synth_cmd->add_option("--in", in_dir)->required();
  synth_cmd->add_option("--out", out_dir)->required();
  synth_cmd->add_option("--seed", seed_override, "Override the config seed");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Metamer separability under each spectral encoding (CSV)");
  std::vector<std::string> encodings{"none", "chromatic", "grating", "rotation"};
  double sweep_alpha = 0.0;
  sweep_cmd->add_option("--in", in_dir, "Directory of source cubes")->required();
  sweep_cmd->add_option("--srf", srf_path);
  sweep_cmd->add_option("--alpha", sweep_alpha, "Metamer paired with each source");
  sweep_cmd->add_option("--encodings", encodings)->delimiter(',');
  sweep_cmd->add_option("--out", out_path, "CSV path (default stdout)");

  // oracle-check (hidden)
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare fast paths against dense references");
  oracle_cmd->group("");
  std::size_t oracle_size = 8, oracle_count = 20;
  oracle_cmd->add_option("--size", oracle_size)->check(CLI::Range(1, 64));
  oracle_cmd->add_option("--count", oracle_count);
  oracle_cmd->add_option("--seed", seed);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  set_threads(threads);

  try {
    if (*project_cmd) {
      const SpectralCube cube = read_cube(in_path);
      const SRF srf = load_srf(srf_path, cube.wavelengths());
      write_rgb(quantize(project(cube, srf), {bits}), out_path, bits);
    } else if (*psf_gen) {
      enc.kind = parse_encoding_kind(kind);
      enc.padding = padding == "circular" ? Padding::circular : Padding::reflect;
      enc.chromatic.size = enc.grating.size = enc.rotation.size = psf_size;
      enc.grating.ref_lambda = enc.chromatic.ref_lambda;
      const auto wl = like_path.empty() ? parse_wavelength_grid(grid) : read_cube(like_path).wavelengths();
      PSFStack stack = enc.kind == EncodingKind::none ? delta_stack(wl, psf_size) : make_psf(enc, wl);
      stack.set_padding(enc.padding);
      write_psf(stack, out_path);
    } else if (*form_cmd) {
      const SpectralCube cube = read_cube(in_path);
      const SRF srf = load_srf(srf_path, cube.wavelengths());
      write_rgb(quantize(form_aberrated(cube, read_psf(psf_path), srf), {bits}), out_path, bits);
    } else if (*metamer_cmd) {
      if (!alpha && !random) throw ValidationError("metamer needs --alpha or --random");
      const SpectralCube cube = read_cube(in_path);
      const SRF srf = load_srf(srf_path, cube.wavelengths());
      double a = 0.0;
      if (random) {
        const auto [lo, hi] = parse_range(range);
        CounterRng rng(seed);
        a = sample_alpha(rng, lo, hi);
      } else {
        a = *alpha;
      }
      const MetamerResult r = generate(cube, srf, a);
      write_cube(r.cube, out_path);
      json j = {{"alpha", a},
                {"clipped_pixel_count", r.clipped_pixel_count},
                {"exact", r.exact},
                {"rgb_psnr_vs_source", finite_or_inf(r.rgb_psnr_vs_source)},
                {"max_rgb_deviation", r.max_rgb_deviation}};
      out << j.dump() << '\n';
    } else if (*degrade_cmd) {
      const RGBImage image = read_rgb(in_path);
      DegradationConfig cfg;
      cfg.npe = npe;
      cfg.seed = seed;
      if (degrade_bits) cfg.quant = QuantizationSpec{degrade_bits};
      if (!codec.empty()) cfg.codec = CodecCommand{codec};
      write_rgb(apply_chain(image, cfg), out_path, degrade_bits ? degrade_bits : 16);
    } else if (*eval_cmd) {
      const SpectralCube est = read_cube(est_path);
      const SpectralCube gt = read_cube(gt_path);
      if (est.height() != gt.height() || est.width() != gt.width() || est.bands() != gt.bands())
        throw ValidationError("estimate and ground truth have different dimensions");
      const MetricReport r = report(est, gt, peak);
      if (as_json) {
        json j = {{"mrae", r.mrae},
                  {"rmse", r.rmse},
                  {"psnr_db", finite_or_inf(r.psnr_db)},
                  {"sam_rad", r.sam_rad},
                  {"l1", r.l1},
                  {"pixels_excluded_sam", r.pixels_excluded_sam},
                  {"denom_floored_mrae", r.denom_floored_mrae}};
        out << j.dump() << '\n';
      } else {
        out << std::setprecision(6) << "MRAE  " << r.mrae << "\nRMSE  " << r.rmse << "\nPSNR  " << r.psnr_db
            << " dB\nSAM   " << r.sam_rad << " rad\nL1    " << r.l1 << '\n';
      }
    } else if (*synth_cmd) {
      std::ifstream cf(config_path);
      if (!cf) throw IoError("cannot open " + config_path);
      std::stringstream text;
      text << cf.rdbuf();
      SynthJob job = synth_job_from_config(parse_flat_config(text.str()), fs::path(config_path).parent_path());
      if (seed_override) job.config.seed = *seed_override;
      std::optional<SRF> srf;
      if (job.srf_path) srf = read_srf(*job.srf_path);
      const SynthSummary s = run_synth(job.config, srf ? &*srf : nullptr, in_dir, out_dir);
      err << "synth: " << s.train_scenes << " train scenes -> " << s.train_pairs << " pairs, " << s.val_scenes
          << " val scenes -> " << s.val_pairs << " pairs\n";
    } else if (*sweep_cmd) {
      std::vector<CubePair> pairs;
      std::optional<SRF> srf;
      if (!srf_path.empty()) srf = read_srf(srf_path);
      for (const auto& f : list_cubes(in_dir)) {
        SpectralCube a = read_cube(f);
        if (!srf) srf = default_srf(a.wavelengths());
        SpectralCube b = generate(a, *srf, sweep_alpha).cube;
        pairs.push_back({f.stem().string(), std::move(a), std::move(b)});
      }
      std::vector<EncodingSpec> specs;
      for (const auto& name : encodings) {
        EncodingSpec e;
        e.kind = parse_encoding_kind(name);
        specs.push_back(e);
      }
      const std::string csv = sweep_csv(srf ? encoding_sweep(pairs, *srf, specs) : std::vector<SweepRow>{});
      if (out_path.empty())
        out << csv;
      else
        write_text_file(out_path, csv);
    } else if (*oracle_cmd) {
      const auto s = oracle::run_oracle_check(oracle_size, oracle_count, seed);
      out << "oracle-check: " << s.instances << " instances, max formation error " << s.max_form_error
          << ", max projector error " << s.max_projector_error << (s.passed ? " PASS" : " FAIL") << '\n';
      return s.passed ? kOk : kValidation;
    }
  } catch (const CodecError& e) {
    err << "error: " << e.what() << '\n';
    return kCodec;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace specforge::cli
