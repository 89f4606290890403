// serial vs OpenMP kernels, plus direct vs FFT convolution
#include <benchmark/benchmark.h>

#include <vector>

#include "specforge/cube.hpp"
#include "specforge/kernels.hpp"
#include "specforge/optics.hpp"
#include "specforge/parallel.hpp"
#include "specforge/rng.hpp"

using namespace specforge;

namespace {

constexpr std::size_t kBands = 31;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

template <auto Fn>
void BM_project(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0)), pixels = side * side;
  const auto cube = noise(kBands * pixels, 1);
  const auto q = noise(kBands * 3, 2);
  std::vector<double> out(3 * pixels);
  for (auto _ : state) {
    Fn(cube, kBands, pixels, q, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * cube.size() * sizeof(double)));
}

template <auto Fn>
void BM_band_matrix(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0)), pixels = side * side;
  const auto cube = noise(kBands * pixels, 3);
  const auto mat = noise(kBands * kBands, 4);
  std::vector<double> out(cube.size());
  for (auto _ : state) {
    Fn(cube, kBands, pixels, mat, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Fn>
void BM_convolve(benchmark::State& state) {
  const std::size_t side = 256, k = static_cast<std::size_t>(state.range(0));
  const auto plane = noise(side * side, 5);
  const auto ker = noise(k * k, 6);
  std::vector<double> out(plane.size());
  for (auto _ : state) {
    Fn(plane, {side, side}, ker, {k, k}, Padding::reflect, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_convolve_fft(benchmark::State& state) {
  const std::size_t side = 256, k = static_cast<std::size_t>(state.range(0));
  const auto plane = noise(side * side, 5);
  const auto ker = noise(k * k, 6);
  for (auto _ : state) benchmark::DoNotOptimize(convolve_band_fft(plane, {side, side}, ker, {k, k}, Padding::reflect));
}

void BM_blur_cube(benchmark::State& state) {
  const auto wl = default_wavelengths();
  SpectralCube cube(128, 128, wl, noise(kBands * 128 * 128, 7));
  const auto psf = gen_chromatic(wl, {});
  set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(blur_cube(cube, psf));
  set_threads(0);
}

}  // namespace

BENCHMARK(BM_project<kernels::serial::project>)->Arg(128)->Arg(512);
BENCHMARK(BM_project<kernels::parallel::project>)->Arg(128)->Arg(512);
BENCHMARK(BM_band_matrix<kernels::serial::apply_band_matrix>)->Arg(128)->Arg(256);
BENCHMARK(BM_band_matrix<kernels::parallel::apply_band_matrix>)->Arg(128)->Arg(256);
BENCHMARK(BM_convolve<kernels::serial::convolve>)->Arg(5)->Arg(15)->Arg(21);
BENCHMARK(BM_convolve<kernels::parallel::convolve>)->Arg(5)->Arg(15)->Arg(21);
BENCHMARK(BM_convolve_fft)->Arg(5)->Arg(15)->Arg(21);
BENCHMARK(BM_blur_cube)->Arg(1)->Arg(4);

BENCHMARK_MAIN();
