// Serial and OpenMP verification of batches of generated instances.

#include <benchmark/benchmark.h>

#include <vector>

#include "ssw/workbench.hpp"

namespace {

std::vector<ssw::InstanceFile> batch(int count) {
    std::vector<ssw::InstanceFile> out;
    for (int seed = 0; seed < count; ++seed) {
        out.push_back(ssw::gen_instance(-2, "conormal", seed));
        out.push_back(ssw::gen_instance(-1, "critlocus", seed));
    }
    return out;
}

ssw::VerifyOptions options() {
    ssw::VerifyOptions opt;
    opt.threads = ssw::threads_from_env();
    return opt;
}

void BM_VerifyBatchSerial(benchmark::State& state) {
    auto files = batch((int)state.range(0));
    auto opt = options();
    for (auto _ : state) benchmark::DoNotOptimize(ssw::verify_batch_serial(files, opt));
    state.SetItemsProcessed(state.iterations() * (long)files.size());
}

void BM_VerifyBatchParallel(benchmark::State& state) {
    auto files = batch((int)state.range(0));
    auto opt = options();
    for (auto _ : state) benchmark::DoNotOptimize(ssw::verify_batch(files, opt));
    state.SetItemsProcessed(state.iterations() * (long)files.size());
}

void BM_VerifyGoldenSerial(benchmark::State& state) {
    auto f = ssw::load_instance(std::string(SSW_DATA_DIR) + "/golden/twisted_conormal_k2.json");
    auto opt = options();
    for (auto _ : state) benchmark::DoNotOptimize(ssw::run_verify_serial(f, opt));
}

void BM_VerifyGoldenParallel(benchmark::State& state) {
    auto f = ssw::load_instance(std::string(SSW_DATA_DIR) + "/golden/twisted_conormal_k2.json");
    auto opt = options();
    for (auto _ : state) benchmark::DoNotOptimize(ssw::run_verify(f, opt));
}

void BM_Normalize(benchmark::State& state) {
    auto f = ssw::gen_instance((int)state.range(0), "obfuscated", 3);
    for (auto _ : state) benchmark::DoNotOptimize(ssw::run_normalize(f));
}

}  // namespace

BENCHMARK(BM_VerifyBatchSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyBatchParallel)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyGoldenSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyGoldenParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Normalize)->Arg(-2)->Arg(-4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
