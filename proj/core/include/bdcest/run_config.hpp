// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "bdcest/estimator.hpp"

namespace bdcest::cli {

/// Which config sections a command consumes (and echoes into its
/// resolved-config file).
enum Section : unsigned {
    kMotor = 1u << 0,
    kDuty = 1u << 1,
    kNoise = 1u << 2,
    kDataset = 1u << 3,
    kNetwork = 1u << 4,
    kTrain = 1u << 5,
    kEval = 1u << 6,
    kAllSections = (1u << 7) - 1,
};

/// Sectioned `key = value` run configuration.
///
/// Sections and keys are validated against the schema; an unknown section,
/// unknown key, duplicate key or malformed line raises ConfigError naming the
/// file and line. Seeds ([noise] seed, [network] seed) have no defaults: a
/// command that consumes those sections fails without them.
struct RunConfig {
    est::ExperimentConfig experiment;
    bool motor_explicit = false;     // [motor] mode = explicit
    unsigned sections_present = 0;   // Section bits seen in the file

    /// Throws ConfigError when a section the command needs is absent.
    void require(unsigned sections) const;

    /// Canonical echo of every value in effect for the given sections.
    std::string resolved_text(unsigned sections) const;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::string& path);

/// Replaces both seeds (testing aid for the CLI's --seed-override).
void override_seeds(RunConfig& cfg, std::uint64_t seed);

}  // namespace bdcest::cli
