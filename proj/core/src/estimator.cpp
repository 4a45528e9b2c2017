// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"

namespace bdcest::est {

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(name, e.what());
    }
}

OutputMetrics metrics_for(const std::vector<double>& est, const std::vector<double>& sim,
                          std::size_t tail) {
    OutputMetrics m;
    const std::size_t n = est.size();
    double sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = est[k] - sim[k];
        sum2 += e * e;
        m.max_abs_error = std::max(m.max_abs_error, std::abs(e));
    }
    m.rmse = std::sqrt(sum2 / static_cast<double>(n));
    double tail_sum = 0.0;
    for (std::size_t k = n - tail; k < n; ++k) tail_sum += est[k] - sim[k];
    m.steady_state_error = tail_sum / static_cast<double>(tail);
    m.clean_final = sim.back();
    m.percent_of_final = m.clean_final != 0.0
                             ? m.steady_state_error / m.clean_final * 100.0
                             : std::numeric_limits<double>::quiet_NaN();
    return m;
}

OutputMetrics scaled(const OutputMetrics& m, double factor) {
    OutputMetrics out = m;
    out.rmse *= factor;
    out.max_abs_error *= factor;
    out.steady_state_error *= factor;
    out.clean_final *= factor;
    // percent_of_final is scale-free
    return out;
}

void append_metrics_row(std::ostringstream& out, const char* name, const OutputMetrics& m) {
    out << name << ',' << format_double(m.rmse) << ',' << format_double(m.max_abs_error)
        << ',' << format_double(m.steady_state_error) << ','
        << format_double(m.percent_of_final) << ',' << format_double(m.clean_final) << '\n';
}

}  // namespace

nn::CfnnTopology ExperimentConfig::topology() const {
    std::vector<std::size_t> sizes;
    sizes.push_back(2 * (delay_taps + 1));
    for (std::size_t hs : hidden) sizes.push_back(hs);
    sizes.push_back(3);
    return full_cascade ? nn::CfnnTopology::full_cascade(sizes)
                        : nn::CfnnTopology::adjacent_only(sizes);
}

motor::MotorParams ExperimentConfig::motor_params() const {
    if (explicit_params) {
        explicit_params->validate();
        return *explicit_params;
    }
    // The targets describe the machine at rated supply and load; a duty
    // profile matching the ratings then settles on them.
    return motor::calibrate(targets, fixed.v_rated, fixed.t_l_rated, fixed);
}

Estimates predict(const nn::Model& model, const sim::Trajectory& noisy) {
    model.topology.validate();
    const std::size_t n_in = model.topology.n_in();
    if (n_in % 2 != 0 || model.norm.inputs.size() != n_in || model.norm.targets.size() != 3)
        throw DimensionMismatch("model input layout does not describe (v, i) tap pairs");
    const std::size_t taps = n_in / 2 - 1;

    Estimates est;
    const std::size_t n = noisy.size();
    est.omega.reserve(n);
    est.theta.reserve(n);
    est.r_a.reserve(n);

    std::vector<double> x(n_in);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t t = 0; t <= taps; ++t) {
            const std::size_t src = k >= t ? k - t : 0;
            x[2 * t] = normalize_value(noisy.v_a[src], model.norm.inputs[2 * t]);
            x[2 * t + 1] = normalize_value(noisy.i_a[src], model.norm.inputs[2 * t + 1]);
        }
        const std::vector<double> y = nn::forward(model.topology, model.params, x);
        est.omega.push_back(denormalize_value(y[0], model.norm.targets[0]));
        est.theta.push_back(denormalize_value(y[1], model.norm.targets[1]));
        est.r_a.push_back(denormalize_value(y[2], model.norm.targets[2]));
    }
    return est;
}

EvalReport evaluate(const nn::Model& model, const motor::MotorParams& params,
                    const sim::Trajectory& clean, const sim::Trajectory& noisy,
                    double window_fraction) {
    if (clean.size() != noisy.size())
        throw GridMismatch("clean and noisy trajectories differ in length");
    if (clean.dt != noisy.dt || clean.time.front() != noisy.time.front())
        throw GridMismatch("clean and noisy trajectories are on different grids");
    return evaluate_series(params, clean, predict(model, noisy), window_fraction);
}

EvalReport evaluate_series(const motor::MotorParams& params, const sim::Trajectory& clean,
                           const Estimates& est, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction <= 0.5))
        throw ConfigError("window fraction must lie in (0, 0.5]");
    if (clean.size() < 2) throw GridMismatch("trajectories need at least 2 samples");
    if (est.omega.size() != clean.size())
        throw GridMismatch("estimate series and trajectory differ in length");

    EvalReport r;
    r.samples = clean.size();
    r.tail_samples = std::max<std::size_t>(
        1, static_cast<std::size_t>(window_fraction * static_cast<double>(clean.size())));
    r.omega = metrics_for(est.omega, clean.omega, r.tail_samples);
    r.omega_rpm = scaled(r.omega, kRadPerSecToRpm);
    r.theta = metrics_for(est.theta, clean.theta, r.tail_samples);
    r.r_a = metrics_for(est.r_a, clean.r_a, r.tail_samples);
    for (std::size_t k = 0; k < est.r_a.size(); ++k)
        r.resistance_consistency =
            std::max(r.resistance_consistency,
                     std::abs(est.r_a[k] - motor::resistance(params, est.theta[k])));
    return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ExperimentResult res;
    res.params = stage("calibrate", [&] { return config.motor_params(); });
    res.clean = stage("simulate", [&] {
        return sim::integrate_rk4(res.params, motor::MotorState{}, config.duty, config.dt,
                                  config.record_stride);
    });
    res.noisy = stage("noise", [&] {
        return sim::add_awgn(res.clean, config.sigma_v, config.sigma_i, config.noise_seed);
    });
    res.dataset = stage("dataset", [&] {
        return sim::make_dataset(res.noisy, config.decimate, config.delay_taps);
    });

    const nn::CfnnTopology topology = config.topology();
    const nn::ParamVector w0 = stage("init", [&] {
        return nn::init_weights(topology, config.init_seed);
    });
    opt::TrainResult tr = stage("train", [&] {
        return opt::train(topology, res.dataset, w0, config.train);
    });
    res.history = std::move(tr.history);
    res.stop = tr.stop;
    res.final_loss = tr.loss;
    res.model = nn::Model{topology, res.dataset.norm, std::move(tr.params)};

    res.estimates = stage("evaluate", [&] { return predict(res.model, res.noisy); });
    res.report = stage("evaluate", [&] {
        return evaluate_series(res.params, res.clean, res.estimates, config.window_fraction);
    });
    return res;
}

std::string report_to_text(const EvalReport& r, double ambient) {
    std::ostringstream out;
    out << std::fixed;
    out << "estimation report (" << r.samples << " samples, steady-state window "
        << r.tail_samples << " samples)\n\n";

    auto line = [&](const char* name, const char* unit, const OutputMetrics& m, int prec) {
        out << std::setprecision(prec);
        out << "  " << name << ":\n";
        out << "    rmse:               " << m.rmse << ' ' << unit << '\n';
        out << "    max abs error:      " << m.max_abs_error << ' ' << unit << '\n';
        out << "    steady-state error: " << m.steady_state_error << ' ' << unit << " ("
            << std::setprecision(4) << m.percent_of_final << "% of final "
            << std::setprecision(prec) << m.clean_final << ' ' << unit << ")\n";
    };
    line("speed (rad/s)", "rad/s", r.omega, 4);
    line("speed (rpm)", "rpm", r.omega_rpm, 3);
    if (ambient != 0.0) {
        OutputMetrics shifted = r.theta;
        shifted.clean_final += ambient;
        out << std::setprecision(3);
        out << "  temperature displayed with ambient offset " << ambient << " degC\n";
        line("temperature", "degC", shifted, 3);
    } else {
        line("temperature", "degC", r.theta, 3);
    }
    line("resistance", "ohm", r.r_a, 5);
    out << std::setprecision(6);
    out << "  resistance/temperature consistency: max |r_hat - R(theta_hat)| = "
        << r.resistance_consistency << " ohm\n";
    return out.str();
}

std::string report_to_csv(const EvalReport& r) {
    std::ostringstream out;
    out << "quantity,rmse,max_abs_error,steady_state_error,percent_of_final,clean_final\n";
    append_metrics_row(out, "omega_rad_s", r.omega);
    append_metrics_row(out, "omega_rpm", r.omega_rpm);
    append_metrics_row(out, "theta_degC", r.theta);
    append_metrics_row(out, "r_a_ohm", r.r_a);
    out << "resistance_consistency," << format_double(r.resistance_consistency) << ",,,,\n";
    return out.str();
}

void save_report(const EvalReport& r, double ambient, const std::string& text_path,
                 const std::string& csv_path) {
    write_file(text_path, report_to_text(r, ambient));
    write_file(csv_path, report_to_csv(r));
}

void save_figure_csvs(const sim::Trajectory& clean, const Estimates& est,
                      const std::string& dir) {
    if (est.omega.size() != clean.size())
        throw GridMismatch("estimates and trajectory differ in length");

    auto figure = [&](const std::string& name, const std::vector<double>& sim_col,
                      const std::vector<double>& est_col, double factor) {
        std::ostringstream out;
        out << "time,simulated,estimated,error\n";
        for (std::size_t k = 0; k < clean.size(); ++k) {
            const double s = sim_col[k] * factor;
            const double e = est_col[k] * factor;
            out << format_double(clean.time[k]) << ',' << format_double(s) << ','
                << format_double(e) << ',' << format_double(e - s) << '\n';
        }
        write_file(dir + "/" + name, out.str());
    };
    figure("fig2_speed.csv", clean.omega, est.omega, kRadPerSecToRpm);
    figure("fig3_temperature.csv", clean.theta, est.theta, 1.0);
    figure("fig4_resistance.csv", clean.r_a, est.r_a, 1.0);

    std::ostringstream out;
    out << "time,speed_error_rpm,temperature_error_c,resistance_error_ohm\n";
    for (std::size_t k = 0; k < clean.size(); ++k) {
        out << format_double(clean.time[k]) << ','
            << format_double((est.omega[k] - clean.omega[k]) * kRadPerSecToRpm) << ','
            << format_double(est.theta[k] - clean.theta[k]) << ','
            << format_double(est.r_a[k] - clean.r_a[k]) << '\n';
    }
    write_file(dir + "/fig5_errors.csv", out.str());
}

}  // namespace bdcest::est
