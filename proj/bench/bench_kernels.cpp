// Serial reference vs OpenMP kernel for each parallel stage.

#include "fixtures.hpp"

#include "ncdkit/taxonomy.hpp"
#include "ncdkit/traffic.hpp"

#include <benchmark/benchmark.h>

using namespace ncdkit;

namespace {

const std::vector<Sample>& corpus()
{
    static const auto c = fixtures::family_corpus(4, 4, 16384, 0.03, 3);
    return c;
}

const DistanceMatrix& matrix()
{
    static const auto m = distance_matrix(corpus(), CompressorKind::deflate);
    return m;
}

SearchParams search(int workers)
{
    SearchParams p;
    p.restarts = 16;
    p.mutation_cap = 2000;
    p.workers = workers;
    return p;
}

const std::vector<Session>& sessions()
{
    static const auto s = [] {
        std::vector<fixtures::SessionScript> scripts;
        for (int i = 0; i < 64; ++i)
            scripts.push_back(i % 8 == 0 ? fixtures::attack_session(i, 50000 + i)
                                         : fixtures::web_session(i, 50000 + i, 2048 + 256 * (i % 16)));
        return reassemble(fixtures::render_capture(scripts));
    }();
    return s;
}

const std::vector<DetectionRule>& rules()
{
    static const auto r = [] {
        DetectionRule ncd_rule;
        ncd_rule.id = "exploit";
        ncd_rule.detector = NcdProximity{fixtures::attack_session(0, 1).request, "attack-0", 0.8,
                                         CompressorKind::deflate};
        DetectionRule ratio_rule;
        ratio_rule.id = "cleartext";
        ratio_rule.detector = RatioWindow{0.3, 2.0, CompressorKind::deflate};
        return std::vector<DetectionRule>{ncd_rule, ratio_rule};
    }();
    return r;
}

void BM_MatrixSerial(benchmark::State& state)
{
    const auto& c = corpus();
    for (auto _ : state)
        benchmark::DoNotOptimize(distance_matrix_serial(c, CompressorKind::deflate));
}

void BM_MatrixParallel(benchmark::State& state)
{
    const int workers = static_cast<int>(state.range(0));
    const auto& c = corpus();
    for (auto _ : state)
        benchmark::DoNotOptimize(distance_matrix(c, CompressorKind::deflate, workers));
}

void BM_FitSerial(benchmark::State& state)
{
    const auto& m = matrix();
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_tree_serial(m, search(1)));
}

void BM_FitParallel(benchmark::State& state)
{
    const int workers = static_cast<int>(state.range(0));
    const auto& m = matrix();
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_tree(m, search(workers)));
}

void BM_DetectSerial(benchmark::State& state)
{
    const auto& s = sessions();
    const auto& r = rules();
    for (auto _ : state)
        benchmark::DoNotOptimize(run_detection_serial(s, r));
}

void BM_DetectParallel(benchmark::State& state)
{
    DetectionConfig cfg;
    cfg.workers = static_cast<int>(state.range(0));
    const auto& s = sessions();
    const auto& r = rules();
    for (auto _ : state)
        benchmark::DoNotOptimize(run_detection(s, r, cfg));
}

} // namespace

BENCHMARK(BM_MatrixSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MatrixParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FitSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_FitParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DetectSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DetectParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
