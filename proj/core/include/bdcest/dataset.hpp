// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bdcest {

struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
};

/// Per-column min/max maps onto [-1, 1]; a constant column maps to 0.
inline double normalize_value(double x, const ColumnRange& r) {
    const double span = r.max - r.min;
    if (span == 0.0) return 0.0;
    return 2.0 * (x - r.min) / span - 1.0;
}

inline double denormalize_value(double xn, const ColumnRange& r) {
    const double span = r.max - r.min;
    if (span == 0.0) return r.min;
    return r.min + (xn + 1.0) * 0.5 * span;
}

struct Normalization {
    std::vector<ColumnRange> inputs;   // one per input column
    std::vector<ColumnRange> targets;  // omega, theta, r_a
};

/// Supervised rows in normalized form. Input columns are the voltage and
/// current channels, each repeated once per delay tap (newest first);
/// targets are (omega, theta, r_a). Values are stored normalized to [-1, 1]
/// with the ranges recorded in `norm`.
struct Dataset {
    std::size_t input_width = 0;
    std::vector<double> inputs;   // rows() x input_width, row-major
    std::vector<double> targets;  // rows() x 3, row-major
    Normalization norm;

    std::size_t rows() const { return input_width ? inputs.size() / input_width : 0; }
    const double* input_row(std::size_t k) const { return inputs.data() + k * input_width; }
    const double* target_row(std::size_t k) const { return targets.data() + k * 3; }

    std::vector<std::string> input_names;  // e.g. v_a_k0, i_a_k0, v_a_k1, ...
};

void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace bdcest
