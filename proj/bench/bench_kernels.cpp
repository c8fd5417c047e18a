// Serial reference vs OpenMP fast-path comparison. Run with
// BLURFORGE_THREADS/OMP_NUM_THREADS to see scaling.

#include <benchmark/benchmark.h>

#include "blurforge/ref.hpp"
#include "blurforge/rng.hpp"
#include "blurforge/synth.hpp"
#include "blurforge/threads.hpp"

using namespace blurforge;

namespace {

Image8 bench_image(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    Image8 img(h, w);
    for (std::size_t i = 0; i < img.size(); ++i)
        img.data()[i] = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return img;
}

InverseCrf bench_crf() {
    InverseCrf inv;
    for (int c = 0; c < 3; ++c) {
        for (int p = 0; p < 256; ++p) {
            const double x = static_cast<double>(p) / 255.0;
            inv.table[c][p] = x * x * (3.0 - 2.0 * x);  // smooth s-curve
        }
        inv.table[c][0] = 0.0;
        inv.table[c][255] = 1.0;
        // Ensure strict monotonicity at the flat ends.
        for (int p = 1; p < 256; ++p)
            if (inv.table[c][p] <= inv.table[c][p - 1])
                inv.table[c][p] = inv.table[c][p - 1] + 1e-9;
        inv.slope[c] = (inv.table[c][251] - inv.table[c][249]) / 2.0;
    }
    return inv;
}

TensorF bench_tensor(int t, int c, int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    TensorF out(t, c, h, w);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.uniform_float(-1, 1);
    return out;
}

constexpr int kH = 480;
constexpr int kW = 640;

void bm_linearize_ref(benchmark::State& state) {
    const Image8 img = bench_image(kH, kW, 1);
    const InverseCrf inv = bench_crf();
    for (auto _ : state) benchmark::DoNotOptimize(ref::linearize(img, inv));
}
BENCHMARK(bm_linearize_ref)->Unit(benchmark::kMillisecond);

void bm_linearize_omp(benchmark::State& state) {
    const Image8 img = bench_image(kH, kW, 1);
    const InverseCrf inv = bench_crf();
    for (auto _ : state) benchmark::DoNotOptimize(linearize(img, inv));
}
BENCHMARK(bm_linearize_omp)->Unit(benchmark::kMillisecond);

void bm_encode_ref(benchmark::State& state) {
    const InverseCrf inv = bench_crf();
    const LinearImage lin = ref::linearize(bench_image(kH, kW, 2), inv);
    for (auto _ : state) benchmark::DoNotOptimize(ref::encode(lin, inv));
}
BENCHMARK(bm_encode_ref)->Unit(benchmark::kMillisecond);

void bm_encode_omp(benchmark::State& state) {
    const InverseCrf inv = bench_crf();
    const LinearImage lin = linearize(bench_image(kH, kW, 2), inv);
    for (auto _ : state) benchmark::DoNotOptimize(encode(lin, inv));
}
BENCHMARK(bm_encode_omp)->Unit(benchmark::kMillisecond);

void bm_average_window_ref(benchmark::State& state) {
    const InverseCrf inv = bench_crf();
    std::vector<LinearImage> window;
    for (int i = 0; i < 32; ++i) window.push_back(linearize(bench_image(240, 320, 3 + i), inv));
    for (auto _ : state) benchmark::DoNotOptimize(ref::average_window(window));
}
BENCHMARK(bm_average_window_ref)->Unit(benchmark::kMillisecond);

void bm_average_window_omp(benchmark::State& state) {
    const InverseCrf inv = bench_crf();
    std::vector<LinearImage> window;
    for (int i = 0; i < 32; ++i) window.push_back(linearize(bench_image(240, 320, 3 + i), inv));
    for (auto _ : state) benchmark::DoNotOptimize(average_window(window));
}
BENCHMARK(bm_average_window_omp)->Unit(benchmark::kMillisecond);

void bm_psnr_ref(benchmark::State& state) {
    const Image8 a = bench_image(kH, kW, 4);
    const Image8 b = bench_image(kH, kW, 5);
    for (auto _ : state) benchmark::DoNotOptimize(ref::psnr(a, b));
}
BENCHMARK(bm_psnr_ref)->Unit(benchmark::kMillisecond);

void bm_psnr_omp(benchmark::State& state) {
    const Image8 a = bench_image(kH, kW, 4);
    const Image8 b = bench_image(kH, kW, 5);
    for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
}
BENCHMARK(bm_psnr_omp)->Unit(benchmark::kMillisecond);

void bm_ssim_ref(benchmark::State& state) {
    const Image8 a = bench_image(240, 320, 6);
    const Image8 b = bench_image(240, 320, 7);
    for (auto _ : state) benchmark::DoNotOptimize(ref::ssim(a, b));
}
BENCHMARK(bm_ssim_ref)->Unit(benchmark::kMillisecond);

void bm_ssim_omp(benchmark::State& state) {
    const Image8 a = bench_image(240, 320, 6);
    const Image8 b = bench_image(240, 320, 7);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(bm_ssim_omp)->Unit(benchmark::kMillisecond);

void bm_temporal_shift_ref(benchmark::State& state) {
    const TensorF f = bench_tensor(8, 64, 60, 80, 8);
    for (auto _ : state) benchmark::DoNotOptimize(ref::temporal_shift(f, ShiftDirection::Forward));
}
BENCHMARK(bm_temporal_shift_ref)->Unit(benchmark::kMillisecond);

void bm_temporal_shift_omp(benchmark::State& state) {
    const TensorF f = bench_tensor(8, 64, 60, 80, 8);
    for (auto _ : state) benchmark::DoNotOptimize(temporal_shift(f, ShiftDirection::Forward));
}
BENCHMARK(bm_temporal_shift_omp)->Unit(benchmark::kMillisecond);

void bm_gss_ref(benchmark::State& state) {
    const TensorF f = bench_tensor(8, 63, 60, 80, 9);
    const GssConfig cfg = GssConfig::grid9(63, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ref::grouped_spatial_shift(f, cfg));
}
BENCHMARK(bm_gss_ref)->Unit(benchmark::kMillisecond);

void bm_gss_omp(benchmark::State& state) {
    const TensorF f = bench_tensor(8, 63, 60, 80, 9);
    const GssConfig cfg = GssConfig::grid9(63, 1);
    for (auto _ : state) benchmark::DoNotOptimize(grouped_spatial_shift(f, cfg));
}
BENCHMARK(bm_gss_omp)->Unit(benchmark::kMillisecond);

void bm_dat_block_ref(benchmark::State& state) {
    Rng rng(10);
    const DatWeights w = random_dat_weights(rng, 16, 16, 4);
    const TensorF fi = bench_tensor(1, 16, 48, 64, 11);
    const TensorF fd = bench_tensor(1, 16, 48, 64, 12);
    for (auto _ : state) benchmark::DoNotOptimize(ref::dat_block(fi, fd, w));
}
BENCHMARK(bm_dat_block_ref)->Unit(benchmark::kMillisecond);

void bm_dat_block_omp(benchmark::State& state) {
    Rng rng(10);
    const DatWeights w = random_dat_weights(rng, 16, 16, 4);
    const TensorF fi = bench_tensor(1, 16, 48, 64, 11);
    const TensorF fd = bench_tensor(1, 16, 48, 64, 12);
    for (auto _ : state) benchmark::DoNotOptimize(dat_block(fi, fd, w));
}
BENCHMARK(bm_dat_block_omp)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
    configure_threads(0);
    benchmark::Initialize(&argc, argv);
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
