// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdcest/dataset.hpp"
#include "bdcest/motor_model.hpp"

namespace bdcest::sim {

struct DutySegment {
    double duration = 0.0;  // s
    double v_a = 0.0;       // V
    double t_l = 0.0;       // N.m
};

/// Piecewise-constant supply/load profile. A continuous-running (S1) profile
/// is a single segment held long enough to reach thermal equilibrium.
struct DutyProfile {
    std::vector<DutySegment> segments;

    double total_duration() const;
    /// Throws ConfigError unless there is at least one segment, all durations
    /// are positive and every duration is an integer number of dt*record_stride.
    void validate(double dt, std::size_t record_stride) const;
};

/// Uniformly sampled simulation output. `dt` is the sample spacing of the
/// stored columns (integration step times the record stride) and `r_a[k]`
/// is exactly resistance(theta[k]).
struct Trajectory {
    double dt = 0.0;
    std::vector<double> time, v_a, t_l, i_a, omega, theta, r_a;

    std::size_t size() const { return time.size(); }
};

/// Classical fixed-step RK4 over the duty profile from the given initial
/// state. Steps at dt; stores every record_stride-th step (plus the initial
/// state). The electrical-stability guard requires
/// dt < 0.5 * l_a / resistance(200 degC); durations must be integer
/// multiples of dt * record_stride so segment switches land on stored
/// samples. Throws UnstableStep / NonFinite / ConfigError.
Trajectory integrate_rk4(const motor::MotorParams& params, const motor::MotorState& init,
                         const DutyProfile& profile, double dt, std::size_t record_stride = 1);

/// Adds independent zero-mean Gaussian noise to the v_a and i_a columns
/// only; state and r_a columns are returned untouched. A sigma of exactly 0
/// leaves that channel bit-identical. Reproducible given the seed.
Trajectory add_awgn(const Trajectory& traj, double sigma_v, double sigma_i, std::uint64_t seed);

/// Builds a supervised dataset from a trajectory: keeps every decimate-th
/// sample, attaches delay_taps preceding kept samples of each input channel
/// (rows without full history are dropped), records per-column min/max and
/// stores values normalized to [-1, 1]. Throws EmptyDataset when fewer than
/// two rows survive.
Dataset make_dataset(const Trajectory& traj, std::size_t decimate, std::size_t delay_taps);

/// CSV with the exact header time,v_a,t_l,i_a,omega,theta,r_a and
/// shortest-round-trip number formatting.
void save_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory_csv(const std::string& path);
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(const std::string& text, const std::string& origin);

}  // namespace bdcest::sim
