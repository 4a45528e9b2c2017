// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "bdcest/bfgs.hpp"
#include "bdcest/errors.hpp"
#include "test_support.hpp"

using namespace bdcest;
using namespace bdcest::opt;

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

double rosenbrock(const Vector& w) {
    const double a = 1.0 - w[0];
    const double b = w[1] - w[0] * w[0];
    return a * a + 100.0 * b * b;
}

Vector rosenbrock_grad(const Vector& w) {
    const double b = w[1] - w[0] * w[0];
    return {-2.0 * (1.0 - w[0]) - 400.0 * w[0] * b, 200.0 * b};
}

}  // namespace

TEST_CASE("bfgs_update hand examples are exact") {
    SUBCASE("identity-preserving case: s = y = e1") {
        const Matrix h = Matrix::identity(2);
        const Matrix out = bfgs_update(h, {1.0, 0.0}, {1.0, 0.0});
        CHECK(out(0, 0) == 1.0);
        CHECK(out(0, 1) == 0.0);
        CHECK(out(1, 0) == 0.0);
        CHECK(out(1, 1) == 1.0);
    }
    SUBCASE("2-D case: s = e1, y = 2 e1") {
        const Matrix out = bfgs_update(Matrix::identity(2), {1.0, 0.0}, {2.0, 0.0});
        CHECK(out(0, 0) == 2.0);
        CHECK(out(0, 1) == 0.0);
        CHECK(out(1, 0) == 0.0);
        CHECK(out(1, 1) == 1.0);
    }
}

TEST_CASE("bfgs_update properties and errors") {
    std::mt19937_64 rng(11);
    SUBCASE("output is exactly symmetric") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 5;
            const Matrix h = random_spd(rng, n);
            std::normal_distribution<double> g(0.0, 1.0);
            Vector s(n), y(n);
            for (auto& v : s) v = g(rng);
            // make y share direction with s so curvature holds
            for (std::size_t i = 0; i < n; ++i) y[i] = s[i] + 0.3 * g(rng);
            if (dot(y, s) <= 1e-8) continue;
            const Matrix out = bfgs_update(h, s, y);
            CHECK(symmetry_error(out) == 0.0);
        }
    }
    SUBCASE("curvature violation throws") {
        CHECK_THROWS_AS(bfgs_update(Matrix::identity(2), {1.0, 0.0}, {-1.0, 0.0}),
                        CurvatureViolation);
    }
    SUBCASE("negative-definite H throws SingularDenominator") {
        Matrix h(2, 2);
        h(0, 0) = -1.0;
        h(1, 1) = -1.0;
        CHECK_THROWS_AS(bfgs_update(h, {1.0, 0.0}, {1.0, 0.0}), SingularDenominator);
    }
}

TEST_CASE("newton_step") {
    SUBCASE("identity gives steepest descent") {
        const Vector p = newton_step(Matrix::identity(3), {1.0, -2.0, 3.0});
        CHECK(p == Vector{-1.0, 2.0, -3.0});
    }
    SUBCASE("diagonal hand solve") {
        Matrix h(2, 2);
        h(0, 0) = 2.0;
        h(1, 1) = 4.0;
        const Vector p = newton_step(h, {2.0, 4.0});
        CHECK(p[0] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(p[1] == doctest::Approx(-1.0).epsilon(1e-15));
    }
    SUBCASE("residual on random SPD systems up to n = 50") {
        std::mt19937_64 rng(3);
        for (std::size_t n : {5u, 20u, 50u}) {
            const Matrix h = random_spd(rng, n);
            std::normal_distribution<double> g(0.0, 1.0);
            Vector grad(n);
            for (auto& v : grad) v = g(rng);
            const Vector p = newton_step(h, grad);
            Vector res = matvec(h, p);
            axpy(1.0, grad, res);  // H p + grad
            CHECK(norm2(res) <= 1e-10 * norm2(grad));
        }
    }
    SUBCASE("indefinite matrix throws") {
        Matrix h(2, 2);
        h(0, 0) = 1.0;
        h(1, 1) = -1.0;
        CHECK_THROWS_AS(newton_step(h, {1.0, 1.0}), NotPositiveDefinite);
    }
}

TEST_CASE("wolfe_line_search") {
    const ObjectiveFn f = [](const Vector& w) { return 0.5 * dot(w, w); };
    const GradientFn g = [](const Vector& w) { return w; };

    SUBCASE("quadratic from (1,0) along -w accepts the exact minimizer") {
        const Vector w{1.0, 0.0};
        const Vector p{-1.0, 0.0};
        const LineSearchResult r = wolfe_line_search(f, g, w, p, 1e-4, 0.9, 30);
        CHECK(r.alpha == 1.0);
        CHECK(r.f_new == 0.0);
        CHECK(r.grad_new == Vector{0.0, 0.0});
    }
    SUBCASE("non-descent direction throws") {
        CHECK_THROWS_AS(wolfe_line_search(f, g, {1.0, 0.0}, {1.0, 0.0}, 1e-4, 0.9, 30),
                        NotDescent);
    }
    SUBCASE("accepted step satisfies both strong Wolfe conditions") {
        const ObjectiveFn f4 = [](const Vector& w) {
            double s = 0.0;
            for (double x : w) s += std::cosh(x) + 0.1 * x * x * x * x;
            return s;
        };
        const GradientFn g4 = [](const Vector& w) {
            Vector out(w.size());
            for (std::size_t i = 0; i < w.size(); ++i)
                out[i] = std::sinh(w[i]) + 0.4 * w[i] * w[i] * w[i];
            return out;
        };
        std::mt19937_64 rng(21);
        std::normal_distribution<double> dist(0.0, 1.5);
        const double c1 = 1e-4, c2 = 0.9;
        for (int trial = 0; trial < 25; ++trial) {
            Vector w(4);
            for (auto& v : w) v = dist(rng);
            Vector grad = g4(w);
            Vector p(4);
            for (std::size_t i = 0; i < 4; ++i) p[i] = -grad[i];
            const double f0 = f4(w);
            const double dphi0 = dot(grad, p);
            const LineSearchResult r = wolfe_line_search(f4, g4, w, p, c1, c2, 40);
            CHECK(r.f_new <= f0 + c1 * r.alpha * dphi0);
            CHECK(std::abs(dot(r.grad_new, p)) <= c2 * std::abs(dphi0));
        }
    }
}

TEST_CASE("minimize: quadratic finite termination") {
    // f(w) = 0.5 (w - w*)^T A (w - w*) with SPD A, so f >= 0 with minimum 0.
    std::mt19937_64 rng(8);
    const std::size_t n = 5;
    const Matrix a = random_spd(rng, n);
    const Vector wstar{1.0, -2.0, 0.5, 3.0, -1.0};

    const ObjectiveFn f = [&](const Vector& w) {
        Vector e = w;
        axpy(-1.0, wstar, e);
        return 0.5 * dot(e, matvec(a, e));
    };
    const GradientFn g = [&](const Vector& w) {
        Vector e = w;
        axpy(-1.0, wstar, e);
        return matvec(a, e);
    };

    TrainConfig cfg;
    cfg.max_iterations = 50;
    cfg.grad_tol = 1e-12;
    cfg.loss_goal = 1e-300;
    cfg.wolfe_c2 = 1e-3;  // near-exact line search
    const MinimizeResult r = minimize(f, g, Vector(n, 0.0), cfg);
    CHECK(r.iterations <= n + 1);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.w[i] - wstar[i]) <= 1e-10);
}

TEST_CASE("minimize: Rosenbrock benchmark") {
    // gradient sanity against central differences first (oracle hygiene)
    {
        const Vector w{-0.7, 1.3};
        const Vector g = rosenbrock_grad(w);
        for (std::size_t k = 0; k < 2; ++k) {
            Vector p = w, m = w;
            p[k] += 1e-7;
            m[k] -= 1e-7;
            const double fd = (rosenbrock(p) - rosenbrock(m)) / 2e-7;
            CHECK(fd == doctest::Approx(g[k]).epsilon(1e-5));
        }
    }
    TrainConfig cfg;
    cfg.max_iterations = 200;
    cfg.grad_tol = 1e-10;
    const MinimizeResult r = minimize(rosenbrock, rosenbrock_grad, {-1.2, 1.0}, cfg);
    CHECK(r.iterations <= 200);
    CHECK(std::abs(r.w[0] - 1.0) <= 1e-6);
    CHECK(std::abs(r.w[1] - 1.0) <= 1e-6);
}

TEST_CASE("minimize: edge behavior") {
    SUBCASE("stationary start returns immediately") {
        const ObjectiveFn f = [](const Vector& w) { return 0.5 * dot(w, w); };
        const GradientFn g = [](const Vector& w) { return w; };
        TrainConfig cfg;
        const MinimizeResult r = minimize(f, g, Vector(3, 0.0), cfg);
        CHECK(r.iterations == 0);
        CHECK(r.stop == StopReason::gradient_tolerance);
    }
    SUBCASE("loss never increases across accepted iterations") {
        TrainConfig cfg;
        cfg.max_iterations = 150;
        const MinimizeResult r = minimize(rosenbrock, rosenbrock_grad, {-1.2, 1.0}, cfg);
        double prev = std::numeric_limits<double>::infinity();
        for (const IterationRecord& rec : r.history.records) {
            CHECK(rec.loss <= prev);
            prev = rec.loss;
        }
    }
    SUBCASE("invalid config is rejected") {
        TrainConfig cfg;
        cfg.wolfe_c2 = 2.0;
        CHECK_THROWS_AS(minimize([](const Vector&) { return 0.0; },
                                 [](const Vector& w) { return w; }, Vector(1, 1.0), cfg),
                        ConfigError);
    }
}

TEST_CASE("train on a representable dataset reaches the loss goal") {
    using namespace bdcest::nn;
    std::mt19937_64 rng(42);
    const CfnnTopology t = CfnnTopology::full_cascade({2, 3, 3});
    const ParamVector planted = init_weights(t, 1001);

    Dataset data = testsupport::random_dataset(rng, 16, 2);
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const std::vector<double> x(data.input_row(r), data.input_row(r) + 2);
        const auto y = forward(t, planted, x);
        for (std::size_t c = 0; c < 3; ++c) data.targets[r * 3 + c] = y[c];
    }

    ParamVector w0 = planted;
    std::normal_distribution<double> g(0.0, 0.05);
    for (auto& v : w0) v += g(rng);

    TrainConfig cfg;
    cfg.max_iterations = 500;
    cfg.loss_goal = 1e-10;
    const TrainResult res = train(t, data, w0, cfg);
    CHECK(res.loss <= 1e-8);

    SUBCASE("identical run gives identical history") {
        const TrainResult res2 = train(t, data, w0, cfg);
        REQUIRE(res2.history.records.size() == res.history.records.size());
        for (std::size_t k = 0; k < res.history.records.size(); ++k) {
            CHECK(res2.history.records[k].loss == res.history.records[k].loss);
            CHECK(res2.history.records[k].alpha == res.history.records[k].alpha);
        }
        CHECK(res2.params == res.params);
    }
}

TEST_CASE("minimize: line-search failure is a terminal status, not a throw") {
    // |w| has no point satisfying the strong curvature condition, so the
    // search fails, the identity reset is retried once, then minimize stops.
    const ObjectiveFn f = [](const Vector& w) { return std::abs(w[0]); };
    const GradientFn g = [](const Vector& w) { return Vector{w[0] >= 0.0 ? 1.0 : -1.0}; };
    TrainConfig cfg;
    cfg.max_iterations = 20;
    const MinimizeResult r = minimize(f, g, {1.0}, cfg);
    CHECK(r.stop == StopReason::line_search_failed);
    CHECK(!r.diagnostic.empty());
    CHECK(r.loss == 1.0);  // the start point is returned untouched
}

TEST_CASE("history CSV has the documented columns") {
    TrainConfig cfg;
    cfg.max_iterations = 5;
    const MinimizeResult r = minimize(rosenbrock, rosenbrock_grad, {-1.2, 1.0}, cfg);
    const std::string csv = r.history.to_csv();
    CHECK(csv.rfind("iteration,loss,grad_norm,alpha,curvature,updated_flag\n", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == r.history.records.size() + 1);
}
