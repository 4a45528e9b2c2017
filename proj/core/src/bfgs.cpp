// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/bfgs.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"

namespace bdcest::opt {

void TrainConfig::validate() const {
    if (!(wolfe_c1 > 0.0 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
        throw ConfigError("line search constants must satisfy 0 < c1 < c2 < 1");
    if (!(grad_tol > 0.0) || !(loss_goal > 0.0) || !(curvature_eps > 0.0))
        throw ConfigError("tolerances must be strictly positive");
    if (max_line_search_steps == 0) throw ConfigError("max_line_search_steps must be >= 1");
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::gradient_tolerance: return "gradient_tolerance";
        case StopReason::loss_goal: return "loss_goal";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::line_search_failed: return "line_search_failed";
    }
    return "unknown";
}

std::string TrainHistory::to_csv() const {
    std::ostringstream out;
    out << "iteration,loss,grad_norm,alpha,curvature,updated_flag\n";
    for (const IterationRecord& r : records)
        out << r.iteration << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm)
            << ',' << format_double(r.alpha) << ',' << format_double(r.curvature) << ','
            << (r.updated ? 1 : 0) << '\n';
    return out.str();
}

void TrainHistory::save_csv(const std::string& path) const { write_file(path, to_csv()); }

Matrix bfgs_update(const Matrix& h, const Vector& s, const Vector& y, double curvature_eps) {
    const std::size_t n = h.rows();
    if (h.cols() != n || s.size() != n || y.size() != n)
        throw DimensionMismatch("bfgs_update: dimension mismatch");

    const double ys = dot(y, s);
    if (!(ys > curvature_eps * norm2(s) * norm2(y)))
        throw CurvatureViolation("bfgs_update: curvature y.s = " + format_double(ys) +
                                 " below threshold");
    const Vector hs = matvec(h, s);
    const double shs = dot(s, hs);
    if (!(shs > 0.0))
        throw SingularDenominator("bfgs_update: s^T H s = " + format_double(shs) +
                                  " is not positive");

    Matrix out = h;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) += y[i] * y[j] / ys - hs[i] * hs[j] / shs;
    // Exact symmetrization.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (out(i, j) + out(j, i));
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

Vector newton_step(const Matrix& h, const Vector& grad) {
    if (h.rows() != h.cols() || grad.size() != h.rows())
        throw DimensionMismatch("newton_step: dimension mismatch");
    const CholeskyFactor chol = CholeskyFactor::compute(h);
    Vector rhs(grad.size());
    for (std::size_t i = 0; i < grad.size(); ++i) rhs[i] = -grad[i];
    return chol.solve(rhs);
}

namespace {

struct Probe {
    double alpha = 0.0;
    double f = 0.0;
    double dphi = 0.0;  // directional derivative grad(w + alpha p) . p
    Vector grad;
};

/// Minimizer of the cubic Hermite interpolant through two probes. Returns
/// NaN when the interpolant has no interior minimizer.
double cubic_minimizer(const Probe& a, const Probe& b) {
    const double d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.dphi * b.dphi;
    if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.dphi - a.dphi + 2.0 * d2;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
}

class WolfeSearch {
public:
    WolfeSearch(const FusedFn& eval, const Vector& w, const Vector& p, double f0, double dphi0,
                double c1, double c2, std::size_t max_steps)
        : eval_(eval), w_(w), p_(p), f0_(f0), dphi0_(dphi0), c1_(c1), c2_(c2),
          max_steps_(max_steps) {}

    LineSearchResult run() {
        if (!(dphi0_ < 0.0))
            throw NotDescent("line search needs a descent direction, grad.p = " +
                             format_double(dphi0_));

        Probe prev{0.0, f0_, dphi0_, {}};
        double alpha = 1.0;
        for (std::size_t step = 0; step < max_steps_; ++step) {
            Probe cur = probe(alpha);
            const bool insufficient =
                !std::isfinite(cur.f) || cur.f > f0_ + c1_ * cur.alpha * dphi0_ ||
                (step > 0 && cur.f >= prev.f);
            if (insufficient) return zoom(prev, cur);
            if (std::abs(cur.dphi) <= -c2_ * dphi0_) return accept(cur);
            if (cur.dphi >= 0.0) return zoom(cur, prev);
            prev = std::move(cur);
            alpha *= 2.0;
        }
        throw LineSearchFailed("no Wolfe step within " + std::to_string(max_steps_) +
                               " bracketing steps");
    }

private:
    Probe probe(double alpha) {
        Vector x = w_;
        axpy(alpha, p_, x);
        Probe pr;
        pr.alpha = alpha;
        eval_(x, pr.f, pr.grad);
        pr.dphi = dot(pr.grad, p_);
        ++evaluations_;
        return pr;
    }

    LineSearchResult accept(Probe& pr) {
        return {pr.alpha, pr.f, std::move(pr.grad), evaluations_};
    }

    /// lo always satisfies sufficient decrease with the lowest f seen; the
    /// minimizer is bracketed between lo and hi.
    LineSearchResult zoom(Probe lo, Probe hi) {
        while (evaluations_ < max_steps_) {
            const double width = hi.alpha - lo.alpha;
            double alpha = std::numeric_limits<double>::quiet_NaN();
            if (std::isfinite(hi.f)) alpha = cubic_minimizer(lo, hi);
            // Safeguard: keep strictly inside the bracket.
            const double margin = 0.1 * std::abs(width);
            if (!std::isfinite(alpha) ||
                alpha <= std::min(lo.alpha, hi.alpha) + margin ||
                alpha >= std::max(lo.alpha, hi.alpha) - margin)
                alpha = lo.alpha + 0.5 * width;

            if (std::abs(width) < 1e-14 * std::max(1.0, std::abs(lo.alpha)) ||
                alpha == lo.alpha || alpha == hi.alpha)
                throw LineSearchFailed("zoom interval collapsed at alpha = " +
                                       format_double(lo.alpha));

            Probe cur = probe(alpha);
            if (!std::isfinite(cur.f) || cur.f > f0_ + c1_ * cur.alpha * dphi0_ ||
                cur.f >= lo.f) {
                hi = std::move(cur);
            } else {
                if (std::abs(cur.dphi) <= -c2_ * dphi0_) return accept(cur);
                if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = std::move(cur);
            }
        }
        throw LineSearchFailed("no Wolfe step within " + std::to_string(max_steps_) +
                               " evaluations");
    }

    const FusedFn& eval_;
    const Vector& w_;
    const Vector& p_;
    double f0_, dphi0_, c1_, c2_;
    std::size_t max_steps_;
    std::size_t evaluations_ = 0;
};

FusedFn fuse(const ObjectiveFn& f, const GradientFn& grad_f) {
    return [&f, &grad_f](const Vector& w, double& fx, Vector& gx) {
        fx = f(w);
        gx = grad_f(w);
    };
}

}  // namespace

LineSearchResult wolfe_line_search(const ObjectiveFn& f, const GradientFn& grad_f,
                                   const Vector& w, const Vector& p, double c1, double c2,
                                   std::size_t max_steps) {
    if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0))
        throw ConfigError("line search constants must satisfy 0 < c1 < c2 < 1");
    const FusedFn eval = fuse(f, grad_f);
    const double f0 = f(w);
    const Vector g0 = grad_f(w);
    WolfeSearch search(eval, w, p, f0, dot(g0, p), c1, c2, max_steps);
    return search.run();
}

MinimizeResult minimize_fused(const FusedFn& eval, const Vector& w0,
                              const TrainConfig& config) {
    config.validate();
    const std::size_t n = w0.size();

    BfgsState state;
    state.w = w0;
    state.hessian_approx = Matrix::identity(n);
    eval(state.w, state.loss, state.grad);

    MinimizeResult result;
    auto finish = [&](StopReason reason, std::string diagnostic = {}) {
        result.w = state.w;
        result.loss = state.loss;
        result.grad = state.grad;
        result.iterations = state.iteration;
        result.stop = reason;
        result.diagnostic = std::move(diagnostic);
        return result;
    };

    if (norm_inf(state.grad) <= config.grad_tol)
        return finish(StopReason::gradient_tolerance);

    bool identity_hessian = true;
    while (state.iteration < config.max_iterations) {
        IterationRecord rec;
        rec.iteration = state.iteration + 1;
        rec.hessian_asym = symmetry_error(state.hessian_approx);

        Vector p;
        try {
            p = newton_step(state.hessian_approx, state.grad);
            rec.spd_ok = true;
        } catch (const NotPositiveDefinite&) {
            state.hessian_approx = Matrix::identity(n);
            identity_hessian = true;
            rec.hessian_reset = true;
            rec.spd_ok = false;
            p = newton_step(state.hessian_approx, state.grad);
        }
        if (!(dot(state.grad, p) < 0.0)) {
            state.hessian_approx = Matrix::identity(n);
            identity_hessian = true;
            rec.hessian_reset = true;
            p = newton_step(state.hessian_approx, state.grad);
        }

        LineSearchResult ls;
        bool have_step = false;
        for (int attempt = 0; attempt < 2 && !have_step; ++attempt) {
            try {
                WolfeSearch search(eval, state.w, p, state.loss, dot(state.grad, p),
                                   config.wolfe_c1, config.wolfe_c2,
                                   config.max_line_search_steps);
                ls = search.run();
                have_step = true;
            } catch (const LineSearchFailed& e) {
                if (identity_hessian)
                    return finish(StopReason::line_search_failed,
                                  std::string("line search failed with identity Hessian: ") +
                                      e.what());
                // Reset and retry once along steepest descent.
                state.hessian_approx = Matrix::identity(n);
                identity_hessian = true;
                rec.hessian_reset = true;
                p = newton_step(state.hessian_approx, state.grad);
            }
        }
        if (!have_step)
            return finish(StopReason::line_search_failed, "line search failed after reset");

        Vector s = p;
        for (double& v : s) v *= ls.alpha;
        Vector y = ls.grad_new;
        for (std::size_t i = 0; i < n; ++i) y[i] -= state.grad[i];
        rec.curvature = dot(y, s);
        rec.alpha = ls.alpha;

        if (rec.curvature > config.curvature_eps * norm2(s) * norm2(y)) {
            try {
                state.hessian_approx =
                    bfgs_update(state.hessian_approx, s, y, config.curvature_eps);
                identity_hessian = false;
                rec.updated = true;
            } catch (const SingularDenominator&) {
                state.hessian_approx = Matrix::identity(n);
                identity_hessian = true;
                rec.hessian_reset = true;
            }
        }
        // else: curvature too small, keep H (skip update)

        axpy(ls.alpha, p, state.w);
        state.loss = ls.f_new;
        state.grad = std::move(ls.grad_new);
        ++state.iteration;

        rec.loss = state.loss;
        rec.grad_norm = norm_inf(state.grad);
        result.history.records.push_back(rec);

        if (rec.grad_norm <= config.grad_tol) return finish(StopReason::gradient_tolerance);
        if (state.loss <= config.loss_goal) return finish(StopReason::loss_goal);
    }
    return finish(StopReason::max_iterations);
}

MinimizeResult minimize(const ObjectiveFn& f, const GradientFn& grad_f, const Vector& w0,
                        const TrainConfig& config) {
    return minimize_fused(fuse(f, grad_f), w0, config);
}

TrainResult train(const nn::CfnnTopology& topology, const Dataset& data,
                  const nn::ParamVector& w0, const TrainConfig& config) {
    const FusedFn eval = [&](const Vector& w, double& fx, Vector& gx) {
        fx = nn::sse_loss_and_gradient(topology, w, data, gx);
    };
    MinimizeResult r = minimize_fused(eval, w0, config);
    return {std::move(r.w), r.loss, r.stop, std::move(r.diagnostic), std::move(r.history)};
}

}  // namespace bdcest::opt
