// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "bdcest/cfnn.hpp"
#include "bdcest/errors.hpp"
#include "reference_ffnn.hpp"
#include "test_support.hpp"

using namespace bdcest;
using namespace bdcest::nn;
using testsupport::compute_layout;
using testsupport::random_dataset;

using testsupport::to_ffnn;
using testsupport::zero_cascade_blocks;

TEST_CASE("param_count hand examples") {
    CHECK(param_count(CfnnTopology::full_cascade({2, 3, 3})) == 27);
    CHECK(param_count(CfnnTopology::adjacent_only({2, 3, 3})) == 21);
    CHECK(param_count(CfnnTopology::full_cascade({1, 1})) == 2);
    CHECK(param_count(CfnnTopology::full_cascade({2, 10, 10, 3})) == 229);
}

TEST_CASE("tansig") {
    CHECK(tansig(0.0) == 0.0);
    CHECK(tansig(1.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
    CHECK(tansig(1.0) == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    for (double x : {0.1, 0.7, 2.0, 5.5, 14.0}) {
        CHECK(tansig(-x) == -tansig(x));  // odd by construction
        CHECK(tansig(x) < 1.0);
        CHECK(tansig(x) > -1.0);
        CHECK(tansig(x) == doctest::Approx(std::tanh(x)).epsilon(1e-14));
    }
    // no overflow anywhere on the double range
    CHECK(std::isfinite(tansig(1e308)));
    CHECK(std::isfinite(tansig(-1e308)));
    CHECK(tansig(1e308) <= 1.0);
}

TEST_CASE("forward") {
    SUBCASE("all-zero parameters give the zero row") {
        const CfnnTopology t = CfnnTopology::full_cascade({2, 3, 3});
        const ParamVector p(param_count(t), 0.0);
        const auto y = forward(t, p, std::vector<double>{0.3, -0.8});
        REQUIRE(y.size() == 3);
        for (double v : y) CHECK(v == 0.0);
    }
    SUBCASE("hand computation on [1,1,1] with unit parameters") {
        const CfnnTopology t = CfnnTopology::full_cascade({1, 1, 1});
        const ParamVector p(param_count(t), 1.0);
        const auto y = forward(t, p, std::vector<double>{0.0});
        const double hidden = tansig(1.0);
        CHECK(y[0] == doctest::Approx(hidden + 1.0).epsilon(1e-15));
        CHECK(y[0] == doctest::Approx(1.7615941559557649).epsilon(1e-12));
    }
    SUBCASE("dimension mismatches throw") {
        const CfnnTopology t = CfnnTopology::full_cascade({2, 3, 3});
        const ParamVector p(param_count(t), 0.0);
        CHECK_THROWS_AS(forward(t, p, std::vector<double>{1.0}), DimensionMismatch);
        const ParamVector bad(5, 0.0);
        CHECK_THROWS_AS(forward(t, bad, std::vector<double>{1.0, 2.0}), DimensionMismatch);
    }
}

TEST_CASE("cascade-off equivalence with an independent feed-forward oracle") {
    std::mt19937_64 rng(99);
    const std::vector<std::vector<std::size_t>> shapes = {
        {2, 3, 3}, {4, 6, 3}, {2, 5, 4, 3}, {6, 8, 8, 3}, {1, 2, 2, 3}};
    for (const auto& sizes : shapes) {
        const CfnnTopology t = CfnnTopology::full_cascade(sizes);
        const ParamVector p = zero_cascade_blocks(t, init_weights(t, rng()));
        const refnet::Ffnn ref = to_ffnn(t, p);
        const Dataset data = random_dataset(rng, 16, sizes.front());

        // forward equivalence
        for (std::size_t r = 0; r < data.rows(); ++r) {
            const std::vector<double> x(data.input_row(r), data.input_row(r) + sizes.front());
            const auto y = forward(t, p, x);
            const auto yref = ref.forward(x);
            for (std::size_t i = 0; i < y.size(); ++i)
                CHECK(std::abs(y[i] - yref[i]) <= 1e-12);
        }
        // gradient equivalence on adjacent blocks and biases
        std::vector<std::vector<double>> xs, ys;
        for (std::size_t r = 0; r < data.rows(); ++r) {
            xs.emplace_back(data.input_row(r), data.input_row(r) + sizes.front());
            ys.emplace_back(data.target_row(r), data.target_row(r) + 3);
        }
        const auto gref = ref.sse_gradient(xs, ys);
        const ParamVector g = gradient(t, p, data);
        const auto lay = compute_layout(t);
        for (std::size_t d = 1; d < sizes.size(); ++d) {
            const auto& b = lay.weight[d - 1][d - 1];
            for (std::size_t k = 0; k < b.rows * b.cols; ++k)
                CHECK(std::abs(g[b.offset + k] - gref.w[d - 1][k]) <= 1e-12);
            for (std::size_t i = 0; i < sizes[d]; ++i)
                CHECK(std::abs(g[lay.bias_offset[d - 1] + i] - gref.bias[d - 1][i]) <= 1e-12);
        }
    }
}

TEST_CASE("sse_loss") {
    const CfnnTopology t = CfnnTopology::full_cascade({2, 3, 3});
    const ParamVector zero(param_count(t), 0.0);

    SUBCASE("hand value") {
        Dataset d;
        d.input_width = 2;
        d.inputs = {0.5, -0.5};
        d.targets = {1.0, 2.0, 0.0};
        d.norm.inputs = {{-1, 1}, {-1, 1}};
        d.norm.targets = {{-1, 1}, {-1, 1}, {-1, 1}};
        CHECK(sse_loss(t, zero, d) == 5.0);
    }
    SUBCASE("additivity and row-order invariance") {
        std::mt19937_64 rng(5);
        const Dataset all = random_dataset(rng, 24, 2);
        Dataset head = all, tail = all, reversed = all;
        head.inputs.resize(10 * 2);
        head.targets.resize(10 * 3);
        tail.inputs.erase(tail.inputs.begin(), tail.inputs.begin() + 10 * 2);
        tail.targets.erase(tail.targets.begin(), tail.targets.begin() + 10 * 3);
        for (std::size_t r = 0; r < all.rows(); ++r) {
            const std::size_t q = all.rows() - 1 - r;
            for (std::size_t c = 0; c < 2; ++c)
                reversed.inputs[r * 2 + c] = all.inputs[q * 2 + c];
            for (std::size_t c = 0; c < 3; ++c)
                reversed.targets[r * 3 + c] = all.targets[q * 3 + c];
        }
        const ParamVector p = init_weights(t, 77);
        const double full = sse_loss(t, p, all);
        CHECK(full == doctest::Approx(sse_loss(t, p, head) + sse_loss(t, p, tail))
                          .epsilon(1e-12));
        CHECK(full == doctest::Approx(sse_loss(t, p, reversed)).epsilon(1e-12));
    }
    SUBCASE("loss is zero when the network reproduces the targets") {
        // zero network reproduces zero targets
        Dataset d;
        d.input_width = 2;
        d.inputs = {0.2, 0.4, -0.1, 0.9};
        d.targets = {0, 0, 0, 0, 0, 0};
        d.norm.inputs = {{-1, 1}, {-1, 1}};
        d.norm.targets = {{-1, 1}, {-1, 1}, {-1, 1}};
        CHECK(sse_loss(t, zero, d) == 0.0);
        const ParamVector g = gradient(t, zero, d);
        for (double v : g) CHECK(v == 0.0);
    }
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937_64 rng(123);
    const std::vector<std::vector<std::size_t>> shapes = {{2, 4, 3}, {3, 5, 4, 3}, {2, 2, 3}};
    for (const auto& sizes : shapes) {
        CfnnTopology t = CfnnTopology::full_cascade(sizes);
        const Dataset data = random_dataset(rng, 12, sizes.front());
        ParamVector p = init_weights(t, rng());
        const ParamVector g = gradient(t, p, data);
        const double h = 1e-6;
        for (std::size_t k = 0; k < p.size(); ++k) {
            ParamVector plus = p, minus = p;
            plus[k] += h;
            minus[k] -= h;
            const double fd = (sse_loss(t, plus, data) - sse_loss(t, minus, data)) / (2 * h);
            CHECK(std::abs(fd - g[k]) <= 1e-8 + 1e-6 * std::abs(g[k]));
        }
    }
}

TEST_CASE("init_weights") {
    const CfnnTopology t = CfnnTopology::full_cascade({2, 4, 4, 3});

    SUBCASE("fixed constant zero gives the zero vector") {
        const ParamVector p = init_weights(t, 9, InitScheme::fixed_constant, 0.0);
        for (double v : p) CHECK(v == 0.0);
    }
    SUBCASE("same seed, same vector; different seed differs") {
        const ParamVector a = init_weights(t, 4);
        const ParamVector b = init_weights(t, 4);
        const ParamVector c = init_weights(t, 5);
        CHECK(a == b);
        CHECK(a != c);
    }
    SUBCASE("uniform-scaled respects the fan-in bound per destination") {
        const ParamVector p = init_weights(t, 31);
        const auto lay = compute_layout(t);
        const std::size_t depth = t.layer_sizes.size() - 1;
        for (std::size_t d = 1; d <= depth; ++d) {
            std::size_t fan_in = 0;
            for (std::size_t s = 0; s < d; ++s)
                if (t.connected(d, s)) fan_in += t.layer_sizes[s];
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            for (std::size_t s = 0; s < d; ++s) {
                const auto& b = lay.weight[d - 1][s];
                for (std::size_t k = 0; k < b.rows * b.cols; ++k) {
                    CHECK(p[b.offset + k] >= -bound);
                    CHECK(p[b.offset + k] <= bound);
                }
            }
        }
    }
}

TEST_CASE("model file round trip") {
    testsupport::TempDir dir("bdcest-model");
    Model m;
    m.topology = CfnnTopology::full_cascade({2, 4, 3});
    m.norm.inputs = {{230.0, 250.0}, {8.5, 9.5}};
    m.norm.targets = {{0.0, 25.0}, {0.0, 80.0}, {3.5, 4.7}};
    m.params = init_weights(m.topology, 17);

    const std::string path = dir.file("model.txt");
    save_model(m, path);
    const Model r = load_model(path);
    CHECK(r.topology.layer_sizes == m.topology.layer_sizes);
    CHECK(r.topology.connections == m.topology.connections);
    CHECK(r.params == m.params);
    CHECK(r.norm.targets[2].max == m.norm.targets[2].max);

    SUBCASE("wrong parameter count is rejected") {
        std::string text = model_to_text(m);
        const auto pos = text.find("params ");
        text = text.substr(0, pos) + "params 7\n1\n2\n3\n4\n5\n6\n7\n";
        CHECK_THROWS_AS(model_from_text(text, "inline"), IoError);
    }
    SUBCASE("garbage is rejected") {
        CHECK_THROWS_AS(model_from_text("not a model\n", "inline"), IoError);
    }
}
