// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/motor_model.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"
#include "bdcest/linalg.hpp"

namespace bdcest::motor {

namespace {

struct Field {
    const char* name;
    double MotorParams::*member;
};

// Order is the canonical file order.
constexpr Field kFields[] = {
    {"v_rated", &MotorParams::v_rated},   {"p_rated", &MotorParams::p_rated},
    {"t_l_rated", &MotorParams::t_l_rated}, {"r_a0", &MotorParams::r_a0},
    {"l_a", &MotorParams::l_a},           {"alpha_cu", &MotorParams::alpha_cu},
    {"k_e", &MotorParams::k_e},           {"j", &MotorParams::j},
    {"b", &MotorParams::b},               {"k_ir", &MotorParams::k_ir},
    {"k_0", &MotorParams::k_0},           {"k_t", &MotorParams::k_t},
    {"h", &MotorParams::h},
};

}  // namespace

void MotorParams::validate() const {
    for (const Field& f : kFields) {
        const double v = this->*(f.member);
        if (!(v > 0.0) || !std::isfinite(v))
            throw InfeasibleTarget(std::string("motor parameter '") + f.name +
                                   "' must be strictly positive, got " + format_double(v));
    }
}

MotorState steady_state(const MotorParams& p, double v_a, double t_l) {
    p.validate();

    // Starting guess: solve the electro-mechanical balance at theta = 0,
    // then the thermal balance for theta at that operating point.
    MotorState s;
    {
        const double r = resistance(p, 0.0);
        const double den = p.b * r + p.k_e * p.k_e;
        s.omega = (p.k_e * v_a - r * t_l) / den;
        s.i_a = (p.b * v_a + p.k_e * t_l) / den;
        const double flow = p.k_0 * (1.0 + p.k_t * s.omega);
        s.theta = flow > 0.0 ? power_losses(p, s) / flow : 0.0;
    }

    const MotorInput u{v_a, t_l};
    auto residual_norm = [&](const MotorState& st) {
        const StateDerivative d = derivatives(p, st, u);
        return std::max({std::abs(d.di_a_dt), std::abs(d.domega_dt), std::abs(d.dtheta_dt)});
    };

    constexpr int kMaxIterations = 200;
    // Contract tolerance is 1e-9 per component; iterate to rounding level so
    // the loss/dissipation balance at the solution is exact to ~1e-12 W.
    constexpr double kTol = 1e-13;

    double fnorm = residual_norm(s);
    for (int it = 0; it < kMaxIterations; ++it) {
        if (fnorm <= kTol || !std::isfinite(fnorm)) break;

        const StateDerivative d = derivatives(p, s, u);
        const double r = resistance(p, s.theta);
        double jac[3][3] = {
            {-r / p.l_a, -p.k_e / p.l_a, -p.r_a0 * p.alpha_cu * s.i_a / p.l_a},
            {p.k_e / p.j, -p.b / p.j, 0.0},
            {2.0 * r * s.i_a / p.h,
             (2.0 * p.k_ir * s.omega - p.k_0 * p.k_t * s.theta) / p.h,
             (p.r_a0 * p.alpha_cu * s.i_a * s.i_a - p.k_0 * (1.0 + p.k_t * s.omega)) / p.h}};
        double rhs[3] = {-d.di_a_dt, -d.domega_dt, -d.dtheta_dt};
        double step[3];
        solve3(jac, rhs, step);

        // Backtracking on the residual norm.
        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= 1e-12) {
            MotorState trial{s.i_a + lambda * step[0], s.omega + lambda * step[1],
                             s.theta + lambda * step[2]};
            const double tnorm = residual_norm(trial);
            if (std::isfinite(tnorm) && tnorm < fnorm) {
                s = trial;
                fnorm = tnorm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        // A stall only happens at the rounding floor; the tolerance check
        // below decides whether that floor is good enough.
        if (!accepted) break;
    }
    if (!(fnorm <= 1e-9) || !std::isfinite(fnorm))
        throw NoConvergence("steady_state: no equilibrium within iteration cap, residual " +
                            format_double(fnorm));
    return s;
}

MotorParams calibrate(const CalibrationTargets& targets, double v_a, double t_l,
                      const MotorParams& fixed) {
    if (!(targets.omega_ss > 0.0) || !(targets.theta_ss > 0.0))
        throw InfeasibleTarget("calibrate: targets must be strictly positive");

    MotorParams p = fixed;
    const double w = targets.omega_ss;
    const double theta = targets.theta_ss;
    const double r = resistance(p, theta);

    const double copper = p.k_0 * (1.0 + p.k_t * w) * theta - p.k_ir * w * w;
    if (!(copper > 0.0))
        throw InfeasibleTarget("calibrate: thermal balance implies non-positive copper loss");
    const double i_ss = std::sqrt(copper / r);

    const double k_e = (v_a - r * i_ss) / w;
    if (!(k_e > 0.0))
        throw InfeasibleTarget("calibrate: electrical balance implies non-positive k_e");

    const double b = (k_e * i_ss - t_l) / w;
    if (!(b > 0.0))
        throw InfeasibleTarget("calibrate: mechanical balance implies non-positive friction");

    p.k_e = k_e;
    p.b = b;
    p.j = 0.5 * b;  // mechanical time constant j/b = 0.5 s
    p.validate();
    return p;
}

MotorParams default_params() {
    MotorParams fixed;
    return calibrate(CalibrationTargets{}, fixed.v_rated, fixed.t_l_rated, fixed);
}

std::string params_to_text(const MotorParams& p) {
    std::ostringstream out;
    out << "# brushed DC machine electro-thermal parameters (SI units)\n";
    for (const Field& f : kFields)
        out << f.name << " = " << format_double(p.*(f.member)) << "\n";
    return out.str();
}

MotorParams parse_params(const std::string& text, const std::string& origin) {
    MotorParams p;
    std::map<std::string, bool> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);

        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'name = value', got '" + line + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        const Field* field = nullptr;
        for (const Field& f : kFields)
            if (key == f.name) field = &f;
        if (!field) throw ConfigError(where + ": unknown parameter '" + key + "'");
        if (seen[key]) throw ConfigError(where + ": duplicate parameter '" + key + "'");
        seen[key] = true;
        try {
            p.*(field->member) = parse_double(value, where);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
    }
    p.validate();
    return p;
}

MotorParams load_params(const std::string& path) {
    return parse_params(read_file(path), path);
}

void save_params(const MotorParams& p, const std::string& path) {
    write_file(path, params_to_text(p));
}

}  // namespace bdcest::motor
