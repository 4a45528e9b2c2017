// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the brushed DC machine simulation/estimation
// pipeline. Subcommands expose the stages individually (simulate, dataset,
// train, eval) and end to end (run); every run is driven by a sectioned
// key=value config file and explicit seeds so reruns are byte-identical.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"
#include "bdcest/estimator.hpp"
#include "bdcest/run_config.hpp"

namespace fs = std::filesystem;
using namespace bdcest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThresholdFail = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericError = 3;
constexpr int kExitIoError = 4;

struct CommonArgs {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed_override;
};

cli::RunConfig load_config(const CommonArgs& args) {
    cli::RunConfig cfg = cli::load_run_config(args.config_path);
    if (args.seed_override) cli::override_seeds(cfg, *args.seed_override);
    return cfg;
}

void write_resolved(const cli::RunConfig& cfg, unsigned sections, const std::string& path) {
    write_file(path, cfg.resolved_text(sections));
}

int cmd_simulate(const CommonArgs& args) {
    cli::RunConfig cfg = load_config(args);
    cfg.require(cli::kMotor | cli::kDuty);
    const motor::MotorParams params = cfg.experiment.motor_params();
    const sim::Trajectory traj =
        sim::integrate_rk4(params, motor::MotorState{}, cfg.experiment.duty,
                           cfg.experiment.dt, cfg.experiment.record_stride);
    sim::save_trajectory_csv(traj, args.out);
    write_resolved(cfg, cli::kMotor | cli::kDuty, args.out + ".resolved-config");
    std::cout << "wrote " << traj.size() << " samples to " << args.out << "\n";
    return kExitOk;
}

int cmd_dataset(const CommonArgs& args, const std::string& traj_in) {
    cli::RunConfig cfg = load_config(args);
    cfg.require(cli::kNoise | cli::kDataset);
    const sim::Trajectory clean = sim::load_trajectory_csv(traj_in);
    const sim::Trajectory noisy = sim::add_awgn(clean, cfg.experiment.sigma_v,
                                                cfg.experiment.sigma_i,
                                                cfg.experiment.noise_seed);
    const Dataset data =
        sim::make_dataset(noisy, cfg.experiment.decimate, cfg.experiment.delay_taps);
    save_dataset(data, args.out);
    write_resolved(cfg, cli::kNoise | cli::kDataset, args.out + ".resolved-config");
    std::cout << "wrote " << data.rows() << " dataset rows to " << args.out << "\n";
    return kExitOk;
}

int cmd_train(const CommonArgs& args, const std::string& dataset_in,
              const std::string& history_out) {
    cli::RunConfig cfg = load_config(args);
    cfg.require(cli::kNetwork | cli::kTrain);
    const Dataset data = load_dataset(dataset_in);
    if (data.input_width != 2 * (cfg.experiment.delay_taps + 1))
        throw DimensionMismatch("dataset input width " + std::to_string(data.input_width) +
                                " does not match [dataset] delay_taps = " +
                                std::to_string(cfg.experiment.delay_taps));
    const nn::CfnnTopology topology = cfg.experiment.topology();
    const nn::ParamVector w0 = nn::init_weights(topology, cfg.experiment.init_seed);
    const opt::TrainResult result = opt::train(topology, data, w0, cfg.experiment.train);

    nn::save_model(nn::Model{topology, data.norm, result.params}, args.out);
    if (!history_out.empty()) result.history.save_csv(history_out);
    write_resolved(cfg, cli::kNetwork | cli::kTrain | cli::kDataset,
                   args.out + ".resolved-config");

    std::cout << "training stopped: " << opt::to_string(result.stop)
              << ", final sse = " << format_double(result.loss) << "\n";
    if (result.stop == opt::StopReason::max_iterations)
        std::cout << "warning: max_iterations reached before any tolerance\n";
    if (result.stop == opt::StopReason::line_search_failed)
        std::cout << "warning: " << result.diagnostic << "\n";
    return kExitOk;
}

int cmd_eval(const CommonArgs& args, const std::string& model_in,
             const std::string& traj_in) {
    cli::RunConfig cfg = load_config(args);
    cfg.require(cli::kMotor | cli::kNoise | cli::kEval);
    const nn::Model model = nn::load_model(model_in);
    const sim::Trajectory clean = sim::load_trajectory_csv(traj_in);
    const sim::Trajectory noisy = sim::add_awgn(clean, cfg.experiment.sigma_v,
                                                cfg.experiment.sigma_i,
                                                cfg.experiment.noise_seed);
    const motor::MotorParams params = cfg.experiment.motor_params();
    const est::EvalReport report =
        est::evaluate(model, params, clean, noisy, cfg.experiment.window_fraction);
    const est::Estimates estimates = est::predict(model, noisy);

    fs::create_directories(args.out);
    const std::string dir = args.out;
    est::save_report(report, cfg.experiment.ambient, dir + "/report.txt", dir + "/report.csv");
    est::save_figure_csvs(clean, estimates, dir);
    write_resolved(cfg, cli::kMotor | cli::kNoise | cli::kEval, dir + "/resolved-config");
    std::cout << est::report_to_text(report, cfg.experiment.ambient);
    return kExitOk;
}

int cmd_run(const CommonArgs& args) {
    cli::RunConfig cfg = load_config(args);
    cfg.require(cli::kMotor | cli::kDuty | cli::kNoise | cli::kDataset | cli::kNetwork |
                cli::kTrain | cli::kEval);
    const est::ExperimentResult res = est::run_experiment(cfg.experiment);

    fs::create_directories(args.out);
    const std::string dir = args.out;
    write_resolved(cfg, cli::kAllSections, dir + "/resolved-config");
    motor::save_params(res.params, dir + "/motor-params.txt");
    sim::save_trajectory_csv(res.clean, dir + "/trajectory_clean.csv");
    sim::save_trajectory_csv(res.noisy, dir + "/trajectory_noisy.csv");
    save_dataset(res.dataset, dir + "/dataset.csv");
    nn::save_model(res.model, dir + "/model.txt");
    res.history.save_csv(dir + "/history.csv");
    est::save_report(res.report, cfg.experiment.ambient, dir + "/report.txt",
                     dir + "/report.csv");
    est::save_figure_csvs(res.clean, res.estimates, dir);

    const est::Thresholds& thr = cfg.experiment.thresholds;
    const est::EvalReport& r = res.report;
    struct Check {
        const char* label;
        double value;
        double pct;
        double abs_limit;
        double pct_limit;
        const char* unit;
    };
    const Check checks[] = {
        {"speed", r.omega_rpm.steady_state_error, r.omega_rpm.percent_of_final, thr.speed_rpm,
         thr.speed_pct, "rpm"},
        {"temperature", r.theta.steady_state_error, r.theta.percent_of_final, thr.theta_c,
         thr.theta_pct, "degC"},
        {"resistance", r.r_a.steady_state_error, r.r_a.percent_of_final, thr.r_ohm, thr.r_pct,
         "ohm"},
    };
    bool pass = true;
    for (const Check& c : checks) {
        const bool ok = std::isfinite(c.value) && std::isfinite(c.pct) &&
                        std::abs(c.value) <= c.abs_limit && std::abs(c.pct) <= c.pct_limit;
        pass = pass && ok;
        std::cout << "steady-state " << c.label << " error: " << format_double(c.value) << ' '
                  << c.unit << " (" << format_double(c.pct) << "% of final), limits "
                  << format_double(c.abs_limit) << ' ' << c.unit << " / "
                  << format_double(c.pct_limit) << "% -> " << (ok ? "PASS" : "FAIL") << "\n";
    }
    std::cout << "training stopped: " << opt::to_string(res.stop)
              << ", final sse = " << format_double(res.final_loss) << "\n";
    std::cout << "RESULT: " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kExitOk : kExitThresholdFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bdcest: brushed DC machine electro-thermal simulation and "
                 "neural speed/temperature/resistance estimation"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string traj_in, dataset_in, model_in, history_out;

    auto add_common = [&](CLI::App* cmd, bool out_is_dir) {
        cmd->add_option("--config", args.config_path, "run configuration file")->required();
        cmd->add_option("--out", args.out,
                        out_is_dir ? "output directory" : "output file path")
            ->required();
        cmd->add_option("--seed-override", args.seed_override,
                        "replace all config seeds (testing only)");
    };

    CLI::App* simulate = app.add_subcommand(
        "simulate", "integrate the duty profile and write the trajectory CSV");
    add_common(simulate, false);

    CLI::App* dataset = app.add_subcommand(
        "dataset", "add measurement noise and build the training dataset");
    add_common(dataset, false);
    dataset->add_option("--in", traj_in, "clean trajectory CSV")->required();

    CLI::App* train = app.add_subcommand("train", "train the estimator on a dataset");
    add_common(train, false);
    train->add_option("--in", dataset_in, "dataset file")->required();
    train->add_option("--history", history_out, "write per-iteration history CSV here");

    CLI::App* eval = app.add_subcommand(
        "eval", "evaluate a trained model against a clean trajectory");
    add_common(eval, true);
    eval->add_option("--model", model_in, "model file")->required();
    eval->add_option("--in", traj_in, "clean trajectory CSV")->required();

    CLI::App* run = app.add_subcommand("run", "full pipeline with PASS/FAIL verdict");
    add_common(run, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(args);
        if (dataset->parsed()) return cmd_dataset(args, traj_in);
        if (train->parsed()) return cmd_train(args, dataset_in, history_out);
        if (eval->parsed()) return cmd_eval(args, model_in, traj_in);
        if (run->parsed()) return cmd_run(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const PipelineError& e) {
        std::cerr << "error " << e.what() << "\n";
        return kExitNumericError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericError;
    }
    return kExitConfigError;
}
