// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bdcest/cfnn.hpp"
#include "bdcest/dataset.hpp"
#include "bdcest/linalg.hpp"

namespace bdcest::opt {

/// Quasi-Newton iteration state: current point, Hessian approximation H_k
/// (symmetrized after every update), current gradient and diagnostics.
struct BfgsState {
    Vector w;
    Matrix hessian_approx;
    Vector grad;
    std::size_t iteration = 0;
    double loss = 0.0;
};

struct TrainConfig {
    std::size_t max_iterations = 2000;
    double grad_tol = 1e-6;   // infinity norm of the gradient
    double loss_goal = 1e-12;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    std::size_t max_line_search_steps = 50;
    double curvature_eps = 1e-10;

    /// Throws ConfigError unless 0 < c1 < c2 < 1 and the tolerances are > 0.
    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;
    double loss = 0.0;
    double grad_norm = 0.0;   // infinity norm
    double alpha = 0.0;
    double curvature = 0.0;   // y . s
    bool updated = false;     // BFGS update applied (curvature held)
    // diagnostics, not serialized
    bool hessian_reset = false;  // H was reset to identity this iteration
    bool spd_ok = false;         // H factorized as SPD when the step was computed
    double hessian_asym = 0.0;   // max |H_ij - H_ji| before the step
};

struct TrainHistory {
    std::vector<IterationRecord> records;

    /// CSV columns: iteration,loss,grad_norm,alpha,curvature,updated_flag
    std::string to_csv() const;
    void save_csv(const std::string& path) const;
};

enum class StopReason {
    gradient_tolerance,
    loss_goal,
    max_iterations,
    line_search_failed,
};

const char* to_string(StopReason r);

using ObjectiveFn = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
/// Evaluates loss and gradient together; used by the hot path.
using FusedFn = std::function<void(const Vector& w, double& f, Vector& g)>;

/// One rank-two Hessian-approximation update,
///   H' = H + (y y^T)/(y^T s) - (H s s^T H)/(s^T H s),
/// followed by exact symmetrization (H' + H'^T)/2.
/// Throws CurvatureViolation when y^T s <= curvature_eps * |s| * |y| and
/// SingularDenominator when s^T H s <= 0.
Matrix bfgs_update(const Matrix& h, const Vector& s, const Vector& y,
                   double curvature_eps = 1e-10);

/// Solves H p = -grad by Cholesky factorization (no explicit inverse).
/// Throws NotPositiveDefinite when H is not SPD.
Vector newton_step(const Matrix& h, const Vector& grad);

struct LineSearchResult {
    double alpha = 0.0;
    double f_new = 0.0;
    Vector grad_new;
    std::size_t evaluations = 0;
};

/// Strong-Wolfe line search (bracketing plus zoom with safeguarded cubic
/// interpolation). The returned evaluations at w + alpha p are handed back so
/// the caller never recomputes them. Throws NotDescent when grad.p >= 0 and
/// LineSearchFailed when no admissible step is found within max_steps.
LineSearchResult wolfe_line_search(const ObjectiveFn& f, const GradientFn& grad_f,
                                   const Vector& w, const Vector& p, double c1, double c2,
                                   std::size_t max_steps);

struct MinimizeResult {
    Vector w;
    double loss = 0.0;
    Vector grad;
    std::size_t iterations = 0;
    StopReason stop = StopReason::max_iterations;
    std::string diagnostic;
    TrainHistory history;
};

/// BFGS minimization: H_0 = I, p_k from newton_step, alpha_k from the Wolfe
/// search, H updated when the curvature condition holds and kept otherwise.
/// A failed line search resets H to the identity and retries once; a second
/// failure stops with StopReason::line_search_failed and a diagnostic.
MinimizeResult minimize(const ObjectiveFn& f, const GradientFn& grad_f, const Vector& w0,
                        const TrainConfig& config);
MinimizeResult minimize_fused(const FusedFn& eval, const Vector& w0, const TrainConfig& config);

struct TrainResult {
    nn::ParamVector params;
    double loss = 0.0;
    StopReason stop = StopReason::max_iterations;
    std::string diagnostic;
    TrainHistory history;
};

/// Batch training of the cascade network: minimize with f = sse_loss and
/// grad_f = its exact gradient over the full dataset. Deterministic given w0.
TrainResult train(const nn::CfnnTopology& topology, const Dataset& data,
                  const nn::ParamVector& w0, const TrainConfig& config);

}  // namespace bdcest::opt
