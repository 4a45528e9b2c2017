// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace bdcest {

/// Seeded random stream with portable output.
///
/// std::uniform_real_distribution and std::normal_distribution are
/// implementation-defined, so experiments seeded through them would not be
/// reproducible across standard libraries. This draws raw 64-bit words from
/// mt19937_64 and maps them to doubles itself.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller. Uses two uniforms per draw and keeps
    /// no spare, so the stream position is a pure function of the draw count.
    double gaussian() {
        // u1 in (0, 1] so the log is finite.
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bdcest
