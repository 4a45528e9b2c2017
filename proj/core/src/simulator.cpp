// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/simulator.hpp"

#include <cmath>
#include <sstream>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"
#include "bdcest/rng.hpp"

namespace bdcest::sim {

namespace {

constexpr double kThetaGuard = 200.0;  // degC, conservative ceiling for the dt guard

std::size_t steps_for(double duration, double dt, std::size_t record_stride,
                      std::size_t segment_index) {
    const double exact = duration / dt;
    const double rounded = std::round(exact);
    if (rounded < 0.5 || std::abs(exact - rounded) > 1e-6 * std::max(1.0, rounded))
        throw ConfigError("duty segment " + std::to_string(segment_index + 1) +
                          ": duration " + format_double(duration) +
                          " is not an integer multiple of dt = " + format_double(dt));
    const auto steps = static_cast<std::size_t>(rounded);
    if (steps % record_stride != 0)
        throw ConfigError("duty segment " + std::to_string(segment_index + 1) +
                          ": duration is not a multiple of dt * record_stride");
    return steps;
}

}  // namespace

double DutyProfile::total_duration() const {
    double t = 0.0;
    for (const DutySegment& s : segments) t += s.duration;
    return t;
}

void DutyProfile::validate(double dt, std::size_t record_stride) const {
    if (segments.empty()) throw ConfigError("duty profile has no segments");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (record_stride == 0) throw ConfigError("record_stride must be >= 1");
    for (std::size_t k = 0; k < segments.size(); ++k) {
        if (!(segments[k].duration > 0.0))
            throw ConfigError("duty segment " + std::to_string(k + 1) +
                              ": duration must be positive");
        (void)steps_for(segments[k].duration, dt, record_stride, k);
    }
}

Trajectory integrate_rk4(const motor::MotorParams& params, const motor::MotorState& init,
                         const DutyProfile& profile, double dt, std::size_t record_stride) {
    params.validate();
    profile.validate(dt, record_stride);

    const double dt_max = 0.5 * params.l_a / motor::resistance(params, kThetaGuard);
    if (!(dt < dt_max))
        throw UnstableStep("dt = " + format_double(dt) +
                           " violates the electrical stability guard dt < " +
                           format_double(dt_max));

    std::size_t total_steps = 0;
    for (std::size_t k = 0; k < profile.segments.size(); ++k)
        total_steps += steps_for(profile.segments[k].duration, dt, record_stride, k);

    Trajectory traj;
    traj.dt = dt * static_cast<double>(record_stride);
    const std::size_t rows = total_steps / record_stride + 1;
    for (auto* col : {&traj.time, &traj.v_a, &traj.t_l, &traj.i_a, &traj.omega, &traj.theta,
                      &traj.r_a})
        col->reserve(rows);

    motor::MotorState s = init;
    auto record = [&](std::size_t step, const motor::MotorInput& u) {
        traj.time.push_back(static_cast<double>(step) * dt);
        traj.v_a.push_back(u.v_a);
        traj.t_l.push_back(u.t_l);
        traj.i_a.push_back(s.i_a);
        traj.omega.push_back(s.omega);
        traj.theta.push_back(s.theta);
        traj.r_a.push_back(motor::resistance(params, s.theta));
    };

    std::size_t step = 0;
    record(0, {profile.segments.front().v_a, profile.segments.front().t_l});

    for (std::size_t seg = 0; seg < profile.segments.size(); ++seg) {
        const motor::MotorInput u{profile.segments[seg].v_a, profile.segments[seg].t_l};
        const std::size_t seg_steps =
            steps_for(profile.segments[seg].duration, dt, record_stride, seg);
        for (std::size_t k = 0; k < seg_steps; ++k) {
            const motor::StateDerivative k1 = motor::derivatives(params, s, u);
            const motor::MotorState s2{s.i_a + 0.5 * dt * k1.di_a_dt,
                                       s.omega + 0.5 * dt * k1.domega_dt,
                                       s.theta + 0.5 * dt * k1.dtheta_dt};
            const motor::StateDerivative k2 = motor::derivatives(params, s2, u);
            const motor::MotorState s3{s.i_a + 0.5 * dt * k2.di_a_dt,
                                       s.omega + 0.5 * dt * k2.domega_dt,
                                       s.theta + 0.5 * dt * k2.dtheta_dt};
            const motor::StateDerivative k3 = motor::derivatives(params, s3, u);
            const motor::MotorState s4{s.i_a + dt * k3.di_a_dt, s.omega + dt * k3.domega_dt,
                                       s.theta + dt * k3.dtheta_dt};
            const motor::StateDerivative k4 = motor::derivatives(params, s4, u);

            s.i_a += dt / 6.0 * (k1.di_a_dt + 2.0 * (k2.di_a_dt + k3.di_a_dt) + k4.di_a_dt);
            s.omega +=
                dt / 6.0 * (k1.domega_dt + 2.0 * (k2.domega_dt + k3.domega_dt) + k4.domega_dt);
            s.theta +=
                dt / 6.0 * (k1.dtheta_dt + 2.0 * (k2.dtheta_dt + k3.dtheta_dt) + k4.dtheta_dt);
            ++step;

            if (!(std::isfinite(s.i_a) && std::isfinite(s.omega) && std::isfinite(s.theta)))
                throw NonFinite("state left the finite range at t = " +
                                format_double(static_cast<double>(step) * dt));

            if (step % record_stride == 0) {
                // A sample landing on a segment boundary reports the input of
                // the segment that is about to start (right-continuous), except
                // at the very end of the profile.
                motor::MotorInput shown = u;
                if (k + 1 == seg_steps && seg + 1 < profile.segments.size())
                    shown = {profile.segments[seg + 1].v_a, profile.segments[seg + 1].t_l};
                record(step, shown);
            }
        }
    }
    return traj;
}

Trajectory add_awgn(const Trajectory& traj, double sigma_v, double sigma_i,
                    std::uint64_t seed) {
    if (sigma_v < 0.0 || sigma_i < 0.0)
        throw ConfigError("noise sigmas must be non-negative");
    Trajectory out = traj;
    Rng rng(seed);
    for (std::size_t k = 0; k < out.size(); ++k) {
        // Draw both channels every row so each channel's realization does not
        // depend on the other channel's sigma.
        const double gv = rng.gaussian();
        const double gi = rng.gaussian();
        if (sigma_v > 0.0) out.v_a[k] += sigma_v * gv;
        if (sigma_i > 0.0) out.i_a[k] += sigma_i * gi;
    }
    return out;
}

Dataset make_dataset(const Trajectory& traj, std::size_t decimate, std::size_t delay_taps) {
    if (decimate < 1) throw ConfigError("decimate must be >= 1");

    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < traj.size(); k += decimate) kept.push_back(k);
    if (kept.size() < delay_taps + 2)
        throw EmptyDataset("fewer than 2 dataset rows survive decimation/windowing");

    const std::size_t taps = delay_taps + 1;  // current sample plus delay taps
    Dataset d;
    d.input_width = 2 * taps;
    const std::size_t rows = kept.size() - delay_taps;
    d.inputs.resize(rows * d.input_width);
    d.targets.resize(rows * 3);

    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t pos = r + delay_taps;  // index into kept, newest sample
        double* in = d.inputs.data() + r * d.input_width;
        for (std::size_t tap = 0; tap < taps; ++tap) {
            const std::size_t src = kept[pos - tap];
            in[2 * tap] = traj.v_a[src];
            in[2 * tap + 1] = traj.i_a[src];
        }
        const std::size_t src = kept[pos];
        double* tg = d.targets.data() + r * 3;
        tg[0] = traj.omega[src];
        tg[1] = traj.theta[src];
        tg[2] = traj.r_a[src];
    }

    for (std::size_t tap = 0; tap < taps; ++tap) {
        d.input_names.push_back("v_a_k" + std::to_string(tap));
        d.input_names.push_back("i_a_k" + std::to_string(tap));
    }

    auto column_range = [](const std::vector<double>& flat, std::size_t width,
                           std::size_t col) {
        ColumnRange r{flat[col], flat[col]};
        for (std::size_t k = col; k < flat.size(); k += width) {
            r.min = std::min(r.min, flat[k]);
            r.max = std::max(r.max, flat[k]);
        }
        return r;
    };
    for (std::size_t c = 0; c < d.input_width; ++c)
        d.norm.inputs.push_back(column_range(d.inputs, d.input_width, c));
    for (std::size_t c = 0; c < 3; ++c)
        d.norm.targets.push_back(column_range(d.targets, 3, c));

    for (std::size_t c = 0; c < d.input_width; ++c)
        for (std::size_t k = c; k < d.inputs.size(); k += d.input_width)
            d.inputs[k] = normalize_value(d.inputs[k], d.norm.inputs[c]);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t k = c; k < d.targets.size(); k += 3)
            d.targets[k] = normalize_value(d.targets[k], d.norm.targets[c]);

    return d;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream out;
    out << "time,v_a,t_l,i_a,omega,theta,r_a\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_double(traj.time[k]) << ',' << format_double(traj.v_a[k]) << ','
            << format_double(traj.t_l[k]) << ',' << format_double(traj.i_a[k]) << ','
            << format_double(traj.omega[k]) << ',' << format_double(traj.theta[k]) << ','
            << format_double(traj.r_a[k]) << '\n';
    }
    return out.str();
}

Trajectory trajectory_from_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError(origin + ": empty trajectory file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "time,v_a,t_l,i_a,omega,theta,r_a")
        throw IoError(origin + ": unexpected trajectory header '" + line + "'");

    Trajectory traj;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (fields.size() != 7) throw IoError(where + ": expected 7 columns");
        traj.time.push_back(parse_double(fields[0], where));
        traj.v_a.push_back(parse_double(fields[1], where));
        traj.t_l.push_back(parse_double(fields[2], where));
        traj.i_a.push_back(parse_double(fields[3], where));
        traj.omega.push_back(parse_double(fields[4], where));
        traj.theta.push_back(parse_double(fields[5], where));
        traj.r_a.push_back(parse_double(fields[6], where));
    }
    if (traj.size() < 2) throw IoError(origin + ": trajectory needs at least 2 samples");
    traj.dt = traj.time[1] - traj.time[0];
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double step = traj.time[k] - traj.time[k - 1];
        if (std::abs(step - traj.dt) > 1e-9 * std::max(1.0, std::abs(traj.dt)))
            throw IoError(origin + ": non-uniform time grid at row " + std::to_string(k + 1));
    }
    return traj;
}

void save_trajectory_csv(const Trajectory& traj, const std::string& path) {
    write_file(path, trajectory_to_csv(traj));
}

Trajectory load_trajectory_csv(const std::string& path) {
    return trajectory_from_csv(read_file(path), path);
}

}  // namespace bdcest::sim
