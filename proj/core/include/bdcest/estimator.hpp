// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdcest/bfgs.hpp"
#include "bdcest/cfnn.hpp"
#include "bdcest/motor_model.hpp"
#include "bdcest/simulator.hpp"

namespace bdcest::est {

/// Steady-state PASS/FAIL thresholds used by the CLI `run` command.
struct Thresholds {
    double speed_rpm = 0.8;
    double theta_c = 1.0;
    double r_ohm = 1.2e-2;
    double speed_pct = 0.4;
    double theta_pct = 1.25;
    double r_pct = 0.3;
};

/// Everything needed to reproduce one experiment bit for bit.
struct ExperimentConfig {
    // Motor: either explicit parameters, or calibration of (k_e, b, j) so the
    // first duty segment settles at the targets.
    std::optional<motor::MotorParams> explicit_params;
    motor::CalibrationTargets targets;
    motor::MotorParams fixed;  // constants/ratings used when calibrating

    // Continuous running at rated supply and load until thermal equilibrium.
    sim::DutyProfile duty{{{20785.0, 240.0, 11.0}}};
    double dt = 1e-3;
    std::size_t record_stride = 1000;

    double sigma_v = 0.06;      // V, 0.025% of rated voltage
    double sigma_i = 0.003125;  // A, 0.025% of rated current
    std::uint64_t noise_seed = 2024;

    std::size_t decimate = 8;
    std::size_t delay_taps = 0;

    std::vector<std::size_t> hidden = {10, 10};
    bool full_cascade = true;
    std::uint64_t init_seed = 7;

    opt::TrainConfig train;
    double window_fraction = 0.10;
    double ambient = 0.0;  // display-only offset for reports
    Thresholds thresholds;

    /// The network shape implied by the dataset settings: n_in = 2*(taps+1),
    /// hidden layers, 3 outputs.
    nn::CfnnTopology topology() const;

    /// The parameter set the experiment runs with.
    motor::MotorParams motor_params() const;

    static ExperimentConfig defaults() { return {}; }
};

struct OutputMetrics {
    double rmse = 0.0;
    double max_abs_error = 0.0;
    double steady_state_error = 0.0;  // mean signed error over the tail window
    double percent_of_final = 0.0;    // steady_state_error / clean final * 100
    double clean_final = 0.0;
};

struct EvalReport {
    OutputMetrics omega;      // rad/s
    OutputMetrics omega_rpm;  // same metrics scaled to rpm
    OutputMetrics theta;      // degC above ambient
    OutputMetrics r_a;        // ohm
    /// max |r_hat - resistance(theta_hat)| over the evaluation set; how
    /// compatible the independent resistance output is with the temperature
    /// output under the armature resistance law.
    double resistance_consistency = 0.0;
    std::size_t samples = 0;
    std::size_t tail_samples = 0;
};

/// Denormalized network outputs over every row of a trajectory. With delay
/// taps the history index is clamped at the first sample so the series stays
/// aligned with the trajectory grid.
struct Estimates {
    std::vector<double> omega, theta, r_a;
};

Estimates predict(const nn::Model& model, const sim::Trajectory& noisy);

/// Compares predictions on the noisy inputs against the clean trajectory.
/// Steady-state metrics use the final window_fraction of samples; window
/// fraction must lie in (0, 0.5]. Throws GridMismatch when the two
/// trajectories are not on the same grid.
EvalReport evaluate(const nn::Model& model, const motor::MotorParams& params,
                    const sim::Trajectory& clean, const sim::Trajectory& noisy,
                    double window_fraction);

/// Same metrics from an already-computed estimate series.
EvalReport evaluate_series(const motor::MotorParams& params, const sim::Trajectory& clean,
                           const Estimates& est, double window_fraction);

struct ExperimentResult {
    motor::MotorParams params;
    sim::Trajectory clean;
    sim::Trajectory noisy;
    Dataset dataset;
    nn::Model model;
    opt::TrainHistory history;
    opt::StopReason stop = opt::StopReason::max_iterations;
    double final_loss = 0.0;
    EvalReport report;
    Estimates estimates;
};

/// Full pipeline: calibrate -> integrate -> add noise -> build dataset ->
/// init -> train -> evaluate against the clean trajectory. Deterministic
/// given the config's seeds. Stage failures are rethrown as PipelineError
/// naming the stage.
ExperimentResult run_experiment(const ExperimentConfig& config);

constexpr double kRadPerSecToRpm = 60.0 / (2.0 * 3.14159265358979323846);

std::string report_to_text(const EvalReport& r, double ambient);
std::string report_to_csv(const EvalReport& r);
void save_report(const EvalReport& r, double ambient, const std::string& text_path,
                 const std::string& csv_path);

/// fig2_speed.csv (rpm), fig3_temperature.csv (degC), fig4_resistance.csv
/// (ohm): columns time,simulated,estimated,error. fig5_errors.csv gathers the
/// three error series: time,speed_error_rpm,temperature_error_c,resistance_error_ohm.
void save_figure_csvs(const sim::Trajectory& clean, const Estimates& est,
                      const std::string& dir);

}  // namespace bdcest::est
