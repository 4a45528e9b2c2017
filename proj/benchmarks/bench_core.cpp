// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths. The bfgs_update benchmark doubles n so
// the O(n^2) cost of the rank-two update is visible directly; newton_step
// shows the O(n^3) factorization it is paired with.

#include <benchmark/benchmark.h>

#include <random>

#include "bdcest/bfgs.hpp"
#include "bdcest/cfnn.hpp"
#include "bdcest/estimator.hpp"
#include "bdcest/motor_model.hpp"
#include "bdcest/simulator.hpp"

using namespace bdcest;

namespace {

Matrix random_spd(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
    Matrix spd(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += a(k, i) * a(k, j);
            spd(i, j) = s;
        }
    for (std::size_t i = 0; i < n; ++i) spd(i, i) += static_cast<double>(n);
    return spd;
}

void BM_BfgsUpdate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(1);
    const Matrix h = random_spd(rng, n);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = g(rng);
        y[i] = s[i] + 0.1 * g(rng);
    }
    for (auto _ : state) {
        Matrix out = opt::bfgs_update(h, s, y);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_NewtonStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(2);
    const Matrix h = random_spd(rng, n);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector grad(n);
    for (auto& v : grad) v = g(rng);
    for (auto _ : state) {
        Vector p = opt::newton_step(h, grad);
        benchmark::DoNotOptimize(p.data());
    }
    state.SetComplexityN(state.range(0));
}

void BM_LossAndGradient(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Dataset data;
    data.input_width = 2;
    for (std::size_t r = 0; r < rows; ++r) {
        for (int c = 0; c < 2; ++c) data.inputs.push_back(u(rng));
        for (int c = 0; c < 3; ++c) data.targets.push_back(u(rng));
    }
    for (int c = 0; c < 2; ++c) data.norm.inputs.push_back({-1.0, 1.0});
    for (int c = 0; c < 3; ++c) data.norm.targets.push_back({-1.0, 1.0});

    const nn::CfnnTopology t = nn::CfnnTopology::full_cascade({2, 10, 10, 3});
    const nn::ParamVector p = nn::init_weights(t, 4);
    nn::ParamVector grad;
    for (auto _ : state) {
        const double loss = nn::sse_loss_and_gradient(t, p, data, grad);
        benchmark::DoNotOptimize(loss);
    }
    state.SetComplexityN(state.range(0));
}

void BM_Rk4Steps(benchmark::State& state) {
    const motor::MotorParams params = motor::default_params();
    const auto steps = static_cast<std::size_t>(state.range(0));
    const double dt = 1e-3;
    const sim::DutyProfile duty{{{static_cast<double>(steps) * dt, 240.0, 11.0}}};
    for (auto _ : state) {
        const sim::Trajectory t = sim::integrate_rk4(params, {}, duty, dt, steps);
        benchmark::DoNotOptimize(t.theta.back());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(steps));
}

}  // namespace

BENCHMARK(BM_BfgsUpdate)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);
BENCHMARK(BM_NewtonStep)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNCubed);
BENCHMARK(BM_LossAndGradient)->RangeMultiplier(4)->Range(256, 4096)->Complexity(benchmark::oN);
BENCHMARK(BM_Rk4Steps)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
