// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/run_config.hpp"

#include <charconv>
#include <set>
#include <sstream>
#include <vector>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"

namespace bdcest::cli {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

using SectionMap = std::map<std::string, Entry>;

struct Raw {
    std::map<std::string, SectionMap> sections;
    std::string origin;
};

const std::set<std::string> kSectionNames = {"motor", "duty",  "noise", "dataset",
                                             "network", "train", "eval"};

bool known_key(const std::string& section, const std::string& key) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"motor",
         {"mode", "omega_ss", "theta_ss", "v_rated", "p_rated", "t_l_rated", "r_a0", "l_a",
          "alpha_cu", "k_ir", "k_0", "k_t", "h", "k_e", "j", "b"}},
        {"duty", {"dt", "record_stride", "segments"}},
        {"noise", {"sigma_v", "sigma_i", "seed"}},
        {"dataset", {"decimate", "delay_taps"}},
        {"network", {"hidden", "cascade", "seed"}},
        {"train",
         {"max_iterations", "grad_tol", "loss_goal", "wolfe_c1", "wolfe_c2",
          "max_line_search_steps", "curvature_eps"}},
        {"eval",
         {"window_fraction", "ambient", "threshold_speed_rpm", "threshold_theta_c",
          "threshold_r_ohm", "threshold_speed_pct", "threshold_theta_pct",
          "threshold_r_pct"}},
    };
    const auto it = schema.find(section);
    if (it == schema.end()) return false;
    if (it->second.count(key)) return true;
    // segment<k>_{duration,v_a,t_l} keys are validated against the segment
    // count after parsing.
    if (section == "duty" && key.rfind("segment", 0) == 0) return true;
    return false;
}

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

Raw parse_raw(const std::string& text, const std::string& origin) {
    Raw raw;
    raw.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!kSectionNames.count(section))
                throw ConfigError(where + ": unknown section [" + section + "]");
            raw.sections[section];  // mark present even if empty
            continue;
        }
        if (section.empty())
            throw ConfigError(where + ": key outside of any [section]");
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(where + ": empty key or value");
        if (!known_key(section, key))
            throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
        if (raw.sections[section].count(key))
            throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
        raw.sections[section][key] = Entry{value, lineno};
    }
    return raw;
}

class Reader {
public:
    Reader(const Raw& raw, const std::string& section) : raw_(raw), section_(section) {
        const auto it = raw.sections.find(section);
        entries_ = it == raw.sections.end() ? nullptr : &it->second;
    }

    bool has(const std::string& key) const { return entries_ && entries_->count(key); }

    std::string where(const std::string& key) const {
        return raw_.origin + ":" + std::to_string(entries_->at(key).line);
    }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        return to_double(key);
    }

    std::size_t integer(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        return to_size(key);
    }

    std::uint64_t required_seed(const std::string& key) const {
        if (!has(key))
            throw ConfigError(raw_.origin + ": [" + section_ + "] requires '" + key +
                              "' (seeds have no defaults)");
        return to_size(key);
    }

    std::string word(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        return entries_->at(key).value;
    }

    double to_double(const std::string& key) const {
        try {
            return parse_double(entries_->at(key).value, where(key));
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
    }

    std::size_t to_size(const std::string& key) const {
        try {
            return parse_size(entries_->at(key).value, where(key));
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
    }

private:
    const Raw& raw_;
    std::string section_;
    const SectionMap* entries_;
};

void read_motor(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "motor");
    motor::MotorParams p;  // built-in defaults
    p.v_rated = r.number("v_rated", p.v_rated);
    p.p_rated = r.number("p_rated", p.p_rated);
    p.t_l_rated = r.number("t_l_rated", p.t_l_rated);
    p.r_a0 = r.number("r_a0", p.r_a0);
    p.l_a = r.number("l_a", p.l_a);
    p.alpha_cu = r.number("alpha_cu", p.alpha_cu);
    p.k_ir = r.number("k_ir", p.k_ir);
    p.k_0 = r.number("k_0", p.k_0);
    p.k_t = r.number("k_t", p.k_t);
    p.h = r.number("h", p.h);

    const std::string mode = r.word("mode", "calibrate");
    if (mode == "calibrate") {
        for (const char* key : {"k_e", "j", "b"})
            if (r.has(key))
                throw ConfigError(r.where(key) + ": '" + key +
                                  "' is only valid with mode = explicit");
        cfg.experiment.targets.omega_ss = r.number("omega_ss", cfg.experiment.targets.omega_ss);
        cfg.experiment.targets.theta_ss = r.number("theta_ss", cfg.experiment.targets.theta_ss);
        cfg.experiment.fixed = p;
        cfg.motor_explicit = false;
    } else if (mode == "explicit") {
        for (const char* key : {"omega_ss", "theta_ss"})
            if (r.has(key))
                throw ConfigError(r.where(key) + ": '" + key +
                                  "' is only valid with mode = calibrate");
        for (const char* key : {"k_e", "j", "b"})
            if (!r.has(key))
                throw ConfigError(raw.origin + ": [motor] mode = explicit requires '" +
                                  std::string(key) + "'");
        p.k_e = r.to_double("k_e");
        p.j = r.to_double("j");
        p.b = r.to_double("b");
        p.validate();
        cfg.experiment.explicit_params = p;
        cfg.experiment.fixed = p;
        cfg.motor_explicit = true;
    } else {
        throw ConfigError(r.where("mode") + ": mode must be 'calibrate' or 'explicit'");
    }
}

void read_duty(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "duty");
    cfg.experiment.dt = r.number("dt", cfg.experiment.dt);
    cfg.experiment.record_stride = r.integer("record_stride", cfg.experiment.record_stride);
    const std::size_t count = r.integer("segments", cfg.experiment.duty.segments.size());
    if (count == 0) throw ConfigError(raw.origin + ": [duty] needs at least one segment");

    if (r.has("segments") || r.has("segment1_duration")) {
        sim::DutyProfile profile;
        for (std::size_t k = 1; k <= count; ++k) {
            const std::string base = "segment" + std::to_string(k) + "_";
            sim::DutySegment seg;
            for (const char* suffix : {"duration", "v_a", "t_l"})
                if (!r.has(base + suffix))
                    throw ConfigError(raw.origin + ": [duty] missing key '" + base + suffix +
                                      "'");
            seg.duration = r.to_double(base + "duration");
            seg.v_a = r.to_double(base + "v_a");
            seg.t_l = r.to_double(base + "t_l");
            profile.segments.push_back(seg);
        }
        cfg.experiment.duty = profile;
    }
    // Reject segment keys beyond the declared count.
    const auto it = raw.sections.find("duty");
    if (it != raw.sections.end()) {
        for (const auto& [key, entry] : it->second) {
            if (key == "segments" || key.rfind("segment", 0) != 0) continue;
            std::size_t idx = 0;
            const char* begin = key.data() + 7;
            auto res = std::from_chars(begin, key.data() + key.size(), idx);
            const std::string rest(res.ptr, key.data() + key.size());
            const bool valid_suffix =
                rest == "_duration" || rest == "_v_a" || rest == "_t_l";
            if (res.ec != std::errc() || !valid_suffix || idx < 1 || idx > count)
                throw ConfigError(raw.origin + ":" + std::to_string(entry.line) +
                                  ": unknown key '" + key + "' in [duty]");
        }
    }
}

void read_noise(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "noise");
    cfg.experiment.sigma_v = r.number("sigma_v", cfg.experiment.sigma_v);
    cfg.experiment.sigma_i = r.number("sigma_i", cfg.experiment.sigma_i);
    if (cfg.experiment.sigma_v < 0.0 || cfg.experiment.sigma_i < 0.0)
        throw ConfigError(raw.origin + ": [noise] sigmas must be non-negative");
    if (raw.sections.count("noise")) cfg.experiment.noise_seed = r.required_seed("seed");
}

void read_dataset(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "dataset");
    cfg.experiment.decimate = r.integer("decimate", cfg.experiment.decimate);
    cfg.experiment.delay_taps = r.integer("delay_taps", cfg.experiment.delay_taps);
    if (cfg.experiment.decimate < 1)
        throw ConfigError(raw.origin + ": [dataset] decimate must be >= 1");
}

void read_network(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "network");
    if (r.has("hidden")) {
        std::vector<std::size_t> hidden;
        const std::string value = r.word("hidden", "");
        for (std::string_view field : split(value, ',')) {
            const std::string f = trim(std::string(field));
            if (f.empty()) throw ConfigError(r.where("hidden") + ": empty layer size");
            try {
                hidden.push_back(parse_size(f, r.where("hidden")));
            } catch (const IoError& e) {
                throw ConfigError(e.what());
            }
        }
        if (hidden.empty()) throw ConfigError(r.where("hidden") + ": no hidden layers listed");
        cfg.experiment.hidden = hidden;
    }
    const std::string cascade = r.word("cascade", "full");
    if (cascade == "full") cfg.experiment.full_cascade = true;
    else if (cascade == "adjacent") cfg.experiment.full_cascade = false;
    else throw ConfigError(r.where("cascade") + ": cascade must be 'full' or 'adjacent'");
    if (raw.sections.count("network")) cfg.experiment.init_seed = r.required_seed("seed");
}

void read_train(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "train");
    opt::TrainConfig& t = cfg.experiment.train;
    t.max_iterations = r.integer("max_iterations", t.max_iterations);
    t.grad_tol = r.number("grad_tol", t.grad_tol);
    t.loss_goal = r.number("loss_goal", t.loss_goal);
    t.wolfe_c1 = r.number("wolfe_c1", t.wolfe_c1);
    t.wolfe_c2 = r.number("wolfe_c2", t.wolfe_c2);
    t.max_line_search_steps = r.integer("max_line_search_steps", t.max_line_search_steps);
    t.curvature_eps = r.number("curvature_eps", t.curvature_eps);
    t.validate();
}

void read_eval(const Raw& raw, RunConfig& cfg) {
    Reader r(raw, "eval");
    est::ExperimentConfig& e = cfg.experiment;
    e.window_fraction = r.number("window_fraction", e.window_fraction);
    if (!(e.window_fraction > 0.0 && e.window_fraction <= 0.5))
        throw ConfigError(raw.origin + ": [eval] window_fraction must lie in (0, 0.5]");
    e.ambient = r.number("ambient", e.ambient);
    e.thresholds.speed_rpm = r.number("threshold_speed_rpm", e.thresholds.speed_rpm);
    e.thresholds.theta_c = r.number("threshold_theta_c", e.thresholds.theta_c);
    e.thresholds.r_ohm = r.number("threshold_r_ohm", e.thresholds.r_ohm);
    e.thresholds.speed_pct = r.number("threshold_speed_pct", e.thresholds.speed_pct);
    e.thresholds.theta_pct = r.number("threshold_theta_pct", e.thresholds.theta_pct);
    e.thresholds.r_pct = r.number("threshold_r_pct", e.thresholds.r_pct);
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    const Raw raw = parse_raw(text, origin);
    RunConfig cfg;
    read_motor(raw, cfg);
    read_duty(raw, cfg);
    read_noise(raw, cfg);
    read_dataset(raw, cfg);
    read_network(raw, cfg);
    read_train(raw, cfg);
    read_eval(raw, cfg);
    for (const auto& [name, entries] : raw.sections) {
        unsigned bit = 0;
        if (name == "motor") bit = kMotor;
        else if (name == "duty") bit = kDuty;
        else if (name == "noise") bit = kNoise;
        else if (name == "dataset") bit = kDataset;
        else if (name == "network") bit = kNetwork;
        else if (name == "train") bit = kTrain;
        else if (name == "eval") bit = kEval;
        cfg.sections_present |= bit;
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path), path);
}

void RunConfig::require(unsigned sections) const {
    struct Named {
        unsigned bit;
        const char* name;
    };
    for (const Named& n : {Named{kMotor, "motor"}, Named{kDuty, "duty"}, Named{kNoise, "noise"},
                           Named{kDataset, "dataset"}, Named{kNetwork, "network"},
                           Named{kTrain, "train"}, Named{kEval, "eval"}}) {
        if ((sections & n.bit) && !(sections_present & n.bit))
            throw ConfigError(std::string("config is missing the required [") + n.name +
                              "] section");
    }
}

void override_seeds(RunConfig& cfg, std::uint64_t seed) {
    cfg.experiment.noise_seed = seed;
    cfg.experiment.init_seed = seed;
}

std::string RunConfig::resolved_text(unsigned sections) const {
    const est::ExperimentConfig& e = experiment;
    std::ostringstream out;
    out << "# resolved configuration (every value in effect)\n";
    if (sections & kMotor) {
        out << "[motor]\n";
        const motor::MotorParams& p = motor_explicit ? *e.explicit_params : e.fixed;
        out << "mode = " << (motor_explicit ? "explicit" : "calibrate") << "\n";
        if (!motor_explicit) {
            out << "omega_ss = " << format_double(e.targets.omega_ss) << "\n";
            out << "theta_ss = " << format_double(e.targets.theta_ss) << "\n";
        }
        out << "v_rated = " << format_double(p.v_rated) << "\n";
        out << "p_rated = " << format_double(p.p_rated) << "\n";
        out << "t_l_rated = " << format_double(p.t_l_rated) << "\n";
        out << "r_a0 = " << format_double(p.r_a0) << "\n";
        out << "l_a = " << format_double(p.l_a) << "\n";
        out << "alpha_cu = " << format_double(p.alpha_cu) << "\n";
        if (motor_explicit) {
            out << "k_e = " << format_double(p.k_e) << "\n";
            out << "j = " << format_double(p.j) << "\n";
            out << "b = " << format_double(p.b) << "\n";
        }
        out << "k_ir = " << format_double(p.k_ir) << "\n";
        out << "k_0 = " << format_double(p.k_0) << "\n";
        out << "k_t = " << format_double(p.k_t) << "\n";
        out << "h = " << format_double(p.h) << "\n";
    }
    if (sections & kDuty) {
        out << "[duty]\n";
        out << "dt = " << format_double(e.dt) << "\n";
        out << "record_stride = " << e.record_stride << "\n";
        out << "segments = " << e.duty.segments.size() << "\n";
        for (std::size_t k = 0; k < e.duty.segments.size(); ++k) {
            const std::string base = "segment" + std::to_string(k + 1) + "_";
            out << base << "duration = " << format_double(e.duty.segments[k].duration) << "\n";
            out << base << "v_a = " << format_double(e.duty.segments[k].v_a) << "\n";
            out << base << "t_l = " << format_double(e.duty.segments[k].t_l) << "\n";
        }
    }
    if (sections & kNoise) {
        out << "[noise]\n";
        out << "sigma_v = " << format_double(e.sigma_v) << "\n";
        out << "sigma_i = " << format_double(e.sigma_i) << "\n";
        out << "seed = " << e.noise_seed << "\n";
    }
    if (sections & kDataset) {
        out << "[dataset]\n";
        out << "decimate = " << e.decimate << "\n";
        out << "delay_taps = " << e.delay_taps << "\n";
    }
    if (sections & kNetwork) {
        out << "[network]\n";
        out << "hidden = ";
        for (std::size_t k = 0; k < e.hidden.size(); ++k)
            out << (k ? "," : "") << e.hidden[k];
        out << "\ncascade = " << (e.full_cascade ? "full" : "adjacent") << "\n";
        out << "seed = " << e.init_seed << "\n";
    }
    if (sections & kTrain) {
        out << "[train]\n";
        out << "max_iterations = " << e.train.max_iterations << "\n";
        out << "grad_tol = " << format_double(e.train.grad_tol) << "\n";
        out << "loss_goal = " << format_double(e.train.loss_goal) << "\n";
        out << "wolfe_c1 = " << format_double(e.train.wolfe_c1) << "\n";
        out << "wolfe_c2 = " << format_double(e.train.wolfe_c2) << "\n";
        out << "max_line_search_steps = " << e.train.max_line_search_steps << "\n";
        out << "curvature_eps = " << format_double(e.train.curvature_eps) << "\n";
    }
    if (sections & kEval) {
        out << "[eval]\n";
        out << "window_fraction = " << format_double(e.window_fraction) << "\n";
        out << "ambient = " << format_double(e.ambient) << "\n";
        out << "threshold_speed_rpm = " << format_double(e.thresholds.speed_rpm) << "\n";
        out << "threshold_theta_c = " << format_double(e.thresholds.theta_c) << "\n";
        out << "threshold_r_ohm = " << format_double(e.thresholds.r_ohm) << "\n";
        out << "threshold_speed_pct = " << format_double(e.thresholds.speed_pct) << "\n";
        out << "threshold_theta_pct = " << format_double(e.thresholds.theta_pct) << "\n";
        out << "threshold_r_pct = " << format_double(e.thresholds.r_pct) << "\n";
    }
    return out.str();
}

}  // namespace bdcest::cli
