#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "specforge/cli.hpp"
#include "specforge/colorimetry.hpp"
#include "specforge/optics.hpp"
#include "support.hpp"

using namespace specforge;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sf(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::map<std::string, std::vector<unsigned char>> tree(const fs::path& root) {
  std::map<std::string, std::vector<unsigned char>> t;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) t[fs::relative(e.path(), root).string()] = testing::file_bytes(e.path());
  return t;
}

}  // namespace

TEST_CASE("version and help") {
  auto r = sf({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find("specforge 1.0.0") != std::string::npos);
  CHECK(sf({"--help"}).code == 0);
  CHECK(sf({}).code == 1);
  CHECK(sf({"evaluate", "--bogus"}).code == 1);
}

TEST_CASE("evaluate") {
  testing::TempDir d("eval");
  auto cube = testing::random_cube(6, 5, default_wavelengths(), 1);
  write_cube(cube, d / "gt.hsc");
  auto r = sf({"evaluate", "--est", (d / "gt.hsc").string(), "--gt", (d / "gt.hsc").string(), "--json"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["mrae"] == 0.0);
  CHECK(j["rmse"] == 0.0);
  CHECK(j["sam_rad"] == 0.0);
  CHECK(j["psnr_db"] == "inf");
  CHECK(j.contains("pixels_excluded_sam"));
  CHECK(j.contains("denom_floored_mrae"));

  auto other = testing::random_cube(6, 4, default_wavelengths(), 2);
  write_cube(other, d / "small.hsc");
  CHECK(sf({"evaluate", "--est", (d / "small.hsc").string(), "--gt", (d / "gt.hsc").string()}).code == 1);
  CHECK(sf({"evaluate", "--est", (d / "missing.hsc").string(), "--gt", (d / "gt.hsc").string()}).code == 2);
  write_text(d / "junk.hsc", "not a cube at all, not even close");
  CHECK(sf({"evaluate", "--est", (d / "junk.hsc").string(), "--gt", (d / "gt.hsc").string()}).code == 2);
}

TEST_CASE("metamer") {
  testing::TempDir d("met");
  auto cube = testing::random_cube(8, 8, default_wavelengths(), 3);
  write_cube(cube, d / "in.hsc");
  auto r = sf({"metamer", "--in", (d / "in.hsc").string(), "--out", (d / "one.hsc").string(), "--alpha", "1"});
  REQUIRE(r.code == 0);
  CHECK(testing::file_bytes(d / "in.hsc") == testing::file_bytes(d / "one.hsc"));
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["exact"] == true);
  CHECK(j["clipped_pixel_count"] == 0);
  CHECK(j["rgb_psnr_vs_source"] == "inf");

  auto a = sf({"metamer", "--in", (d / "in.hsc").string(), "--out", (d / "r1.hsc").string(), "--random", "--seed",
                "5", "--range", "-1,2"});
  auto b = sf({"metamer", "--in", (d / "in.hsc").string(), "--out", (d / "r2.hsc").string(), "--random", "--seed",
                "5", "--range", "-1,2"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(testing::file_bytes(d / "r1.hsc") == testing::file_bytes(d / "r2.hsc"));
  double alpha = nlohmann::json::parse(a.out)["alpha"];
  CHECK(alpha >= -1.0);
  CHECK(alpha <= 2.0);

  CHECK(sf({"metamer", "--in", (d / "in.hsc").string(), "--out", (d / "x.hsc").string()}).code == 1);
  CHECK(sf({"metamer", "--in", (d / "in.hsc").string(), "--out", (d / "x.hsc").string(), "--random", "--range",
             "2,1"})
            .code == 1);
}

TEST_CASE("project, psf gen, form, degrade") {
  testing::TempDir d("img");
  const auto wl = default_wavelengths();
  auto cube = testing::random_cube(32, 30, wl, 4);
  write_cube(cube, d / "c.hsc");
  write_srf(default_srf(wl), d / "srf.csv");

  REQUIRE(sf({"project", "--in", (d / "c.hsc").string(), "--srf", (d / "srf.csv").string(), "--out",
               (d / "p.png").string(), "--bits", "16"})
              .code == 0);
  auto png = read_rgb(d / "p.png");
  CHECK(rgb_bit_depth(d / "p.png") == 16);
  CHECK(png.data().size() == quantize(project(cube, default_srf(wl)), {16}).size());
  CHECK(testing::max_abs_diff(png.data(), quantize(project(cube, default_srf(wl)), {16}).data()) == 0.0);

  REQUIRE(sf({"psf", "gen", "--kind", "chromatic", "--like", (d / "c.hsc").string(), "--out", (d / "k.psf").string(),
               "--sigma-slope", "0.008"})
              .code == 0);
  auto psf = read_psf(d / "k.psf");
  CHECK(psf.bands() == 31);
  REQUIRE(sf({"psf", "gen", "--kind", "none", "--wavelengths", "400:10:700", "--out", (d / "n.psf").string()}).code ==
          0);
  CHECK(sf({"psf", "gen", "--kind", "chromatic", "--wavelengths", "400:10", "--out", (d / "z.psf").string()}).code ==
        1);

  REQUIRE(sf({"form", "--in", (d / "c.hsc").string(), "--psf", (d / "n.psf").string(), "--out",
               (d / "f.png").string(), "--bits", "16"})
              .code == 0);
  CHECK(testing::file_bytes(d / "f.png") == testing::file_bytes(d / "p.png"));
  REQUIRE(sf({"form", "--in", (d / "c.hsc").string(), "--psf", (d / "k.psf").string(), "--out",
               (d / "g.png").string()})
              .code == 0);

  REQUIRE(sf({"degrade", "--in", (d / "p.png").string(), "--out", (d / "n1.png").string(), "--npe", "500", "--seed",
               "3", "--bits", "8"})
              .code == 0);
  REQUIRE(sf({"degrade", "--in", (d / "p.png").string(), "--out", (d / "n2.png").string(), "--npe", "500", "--seed",
               "3", "--bits", "8"})
              .code == 0);
  CHECK(testing::file_bytes(d / "n1.png") == testing::file_bytes(d / "n2.png"));
  CHECK(rgb_bit_depth(d / "n1.png") == 8);
  CHECK(sf({"degrade", "--in", (d / "p.png").string(), "--out", (d / "n3.png").string(), "--codec", "exit 4"}).code ==
        3);
  CHECK(sf({"degrade", "--in", (d / "p.png").string(), "--out", (d / "n3.png").string(), "--npe", "-2"}).code == 1);
}

TEST_CASE("synth is reproducible across runs and thread counts") {
  testing::TempDir d("synth");
  const auto wl = default_wavelengths();
  fs::create_directories(d / "in");
  for (int i = 0; i < 5; ++i) write_cube(testing::random_cube(40, 36, wl, 10 + i), d / "in" / ("s" + std::to_string(i) + ".hsc"));
  write_text(d / "job.toml", R"(seed = 3
patch_size = 32
stride = 16
split_fraction = 0.6
metamer_mode = "on_the_fly"
encoding = "chromatic"
npe = 1000
bits = 8
)");
  auto run = [&](const std::string& out, const std::string& threads) {
    return sf({"--threads", threads, "synth", "--config", (d / "job.toml").string(), "--in", (d / "in").string(),
                "--out", (d / out).string()});
  };
  REQUIRE(run("a", "1").code == 0);
  REQUIRE(run("b", "1").code == 0);
  REQUIRE(run("c", "4").code == 0);
  auto ta = tree(d / "a");
  CHECK(ta.size() > 10);
  CHECK(ta.count("split.json") == 1);
  CHECK(ta == tree(d / "b"));
  CHECK(ta == tree(d / "c"));

  write_text(d / "bad.toml", "seed = 1\nflavour = 2\n");
  CHECK(sf({"synth", "--config", (d / "bad.toml").string(), "--in", (d / "in").string(), "--out",
             (d / "x").string()})
            .code == 1);
  CHECK(sf({"synth", "--config", (d / "missing.toml").string(), "--in", (d / "in").string(), "--out",
             (d / "x").string()})
            .code == 2);
}

TEST_CASE("sweep") {
  testing::TempDir d("sweep");
  const auto wl = default_wavelengths();
  auto srf = default_srf(wl);
  fs::create_directories(d / "in");
  for (int i = 0; i < 2; ++i)
    write_cube(testing::metamer_friendly_cube(24, 24, srf, 40 + i), d / "in" / ("m" + std::to_string(i) + ".hsc"));
  auto r = sf({"sweep", "--in", (d / "in").string(), "--alpha", "0", "--encodings", "none,chromatic,grating,rotation"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("pair_id,encoding,max_abs_diff,mean_abs_diff\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1 + 2 * 4);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    auto parts = line.substr(line.find(',') + 1);
    auto enc = parts.substr(0, parts.find(','));
    double mx = std::stod(parts.substr(parts.find(',') + 1));
    if (enc == "none") CHECK(mx <= 1e-9);
    else CHECK(mx > 0.0);
  }
  CHECK(sf({"sweep", "--in", (d / "in").string(), "--encodings", "prism"}).code == 1);
}

TEST_CASE("oracle-check") {
  auto r = sf({"oracle-check", "--size", "6", "--count", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
}
