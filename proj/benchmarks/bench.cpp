#include <benchmark/benchmark.h>

#include <random>

#include "grapho/clustering.hpp"
#include "grapho/kinematics.hpp"
#include "grapho/synth.hpp"
#include "grapho/velocity_scoring.hpp"

namespace {

grapho::Session session_for(grapho::TaskKind task) {
    auto spec = grapho::default_spec(task);
    spec.seed = 7;
    return grapho::generate_session(spec);
}

std::vector<grapho::FeatureVector> random_points(std::size_t n, std::size_t dims) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<grapho::FeatureVector> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i].subject_id = "P" + std::to_string(i);
        for (std::size_t d = 0; d < dims; ++d) pts[i].values.push_back(u(rng));
    }
    return pts;
}

void BM_SpeedProfile(benchmark::State& state) {
    const auto session = session_for(grapho::TaskKind::Circle);
    for (auto _ : state) {
        auto kin = grapho::analyze_kinematics(session);
        benchmark::DoNotOptimize(kin.profile.speed.data());
    }
}
BENCHMARK(BM_SpeedProfile);

void BM_ScoreTaskElel(benchmark::State& state) {
    const auto session = session_for(grapho::TaskKind::Elel);
    for (auto _ : state) benchmark::DoNotOptimize(grapho::score_task(session));
}
BENCHMARK(BM_ScoreTaskElel);

void BM_GenerateSquare(benchmark::State& state) {
    auto spec = grapho::default_spec(grapho::TaskKind::Square);
    spec.time_jitter = spec.amp_jitter = 0.3;
    for (auto _ : state) {
        auto s = grapho::generate_session(spec);
        benchmark::DoNotOptimize(s.strokes.data());
    }
}
BENCHMARK(BM_GenerateSquare);

void BM_KMeans(benchmark::State& state) {
    const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(grapho::kmeans(pts, 4, 1));
}
BENCHMARK(BM_KMeans)->Arg(12)->Arg(100)->Arg(1000);

void BM_Silhouette(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pts = random_points(n, 2);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 4);
    for (auto _ : state) benchmark::DoNotOptimize(grapho::silhouette(pts, labels));
}
BENCHMARK(BM_Silhouette)->Arg(12)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
