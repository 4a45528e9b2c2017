// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace bdcest::motor {

/// Physical constants of the electro-thermal brushed DC machine model.
///
/// Electrical:   v_a = R(theta) i_a + l_a di_a/dt + k_e omega,
///               with R(theta) = r_a0 (1 + alpha_cu theta).
/// Mechanical:   j domega/dt + b omega + t_l = k_e i_a.
/// Thermal:      R(theta) i_a^2 + k_ir omega^2
///               = k_0 (1 + k_t omega) theta + h dtheta/dt.
///
/// theta is the armature temperature rise above ambient. k_e, b and j carry
/// no catalogue value here; they are normally filled in by calibrate().
struct MotorParams {
    double v_rated = 240.0;   // V
    double p_rated = 3000.0;  // W
    double t_l_rated = 11.0;  // N.m

    double r_a0 = 3.5;        // ohm, armature resistance at ambient
    double l_a = 0.034;       // H
    double alpha_cu = 0.004;  // 1/degC, copper temperature coefficient

    double k_e = 0.0;         // V.s/rad, torque / back-EMF constant (calibrated)
    double j = 0.0;           // kg.m^2, total inertia (calibrated)
    double b = 0.0;           // N.m.s/rad, viscous friction (calibrated)

    double k_ir = 0.0041;     // W/(rad/s)^2, iron-loss constant
    double k_0 = 4.33;        // W/degC, zero-speed thermal transfer
    double k_t = 0.0028;      // s/rad, speed dependence of thermal transfer
    double h = 18000.0;       // J/degC, thermal capacity

    /// Throws InfeasibleTarget naming the first field that is not > 0.
    void validate() const;
};

struct MotorState {
    double i_a = 0.0;    // A
    double omega = 0.0;  // rad/s
    double theta = 0.0;  // degC above ambient
};

struct MotorInput {
    double v_a = 0.0;  // V
    double t_l = 0.0;  // N.m
};

struct StateDerivative {
    double di_a_dt = 0.0;    // A/s
    double domega_dt = 0.0;  // rad/s^2
    double dtheta_dt = 0.0;  // degC/s
};

/// Armature resistance at temperature rise theta.
inline double resistance(const MotorParams& p, double theta) {
    return p.r_a0 * (1.0 + p.alpha_cu * theta);
}

/// Copper plus iron losses, W.
inline double power_losses(const MotorParams& p, const MotorState& s) {
    return resistance(p, s.theta) * s.i_a * s.i_a + p.k_ir * s.omega * s.omega;
}

/// Convective heat flow from the armature to the cooling air, W.
inline double heat_dissipation(const MotorParams& p, const MotorState& s) {
    return p.k_0 * (1.0 + p.k_t * s.omega) * s.theta;
}

/// Right-hand side of the coupled electrical/mechanical/thermal state equations.
inline StateDerivative derivatives(const MotorParams& p, const MotorState& s,
                                   const MotorInput& u) {
    StateDerivative d;
    d.di_a_dt = (u.v_a - resistance(p, s.theta) * s.i_a - p.k_e * s.omega) / p.l_a;
    d.domega_dt = (p.k_e * s.i_a - p.b * s.omega - u.t_l) / p.j;
    d.dtheta_dt = (power_losses(p, s) - heat_dissipation(p, s)) / p.h;
    return d;
}

/// Equilibrium of the state equations for a constant (v_a, t_l).
///
/// Damped Newton iteration on the 3-component residual with the analytic
/// Jacobian; converges to |residual| <= 1e-9 in each component's natural
/// units (and in practice to rounding level). Throws NoConvergence when the
/// iteration cap of 200 is hit.
MotorState steady_state(const MotorParams& p, double v_a, double t_l);

struct CalibrationTargets {
    double omega_ss = 23.24;  // rad/s (~222 rpm)
    double theta_ss = 80.0;   // degC above ambient
};

/// Solves the three steady-state balances in closed form for k_e, b and the
/// steady current, given the thermal/electrical constants in `fixed`:
///
///   thermal:    i_ss^2 = (k_0 (1 + k_t w) theta - k_ir w^2) / R(theta)
///   electrical: k_e    = (v_a - R(theta) i_ss) / w
///   mechanical: b      = (k_e i_ss - t_l) / w
///
/// j is set so the mechanical time constant j/b is 0.5 s, far below the
/// thermal time constant h/k_0. Throws InfeasibleTarget when any of i_ss^2,
/// k_e or b comes out non-positive.
MotorParams calibrate(const CalibrationTargets& targets, double v_a, double t_l,
                      const MotorParams& fixed);

/// The default parameter set: the built-in constants calibrated to
/// omega_ss = 23.24 rad/s and theta_ss = 80 degC at rated voltage and load.
MotorParams default_params();

/// Flat `name = value` parameter file ('#' comments allowed, SI units as in
/// MotorParams). Unknown keys are an error naming the offending line.
MotorParams load_params(const std::string& path);
void save_params(const MotorParams& p, const std::string& path);
MotorParams parse_params(const std::string& text, const std::string& origin);
std::string params_to_text(const MotorParams& p);

}  // namespace bdcest::motor
