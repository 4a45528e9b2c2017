// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdcest/dataset.hpp"
#include "bdcest/linalg.hpp"

namespace bdcest::nn {

enum class Activation { tansig, purelin };

/// Cascade-forward topology: a feed-forward stack augmented with optional
/// connections from the input and every earlier layer to every later layer.
///
/// layer_sizes is [n_in, h_1, ..., h_L, n_out]; activations has one entry per
/// non-input layer and the output activation must be purelin. connections[d-1]
/// holds one flag per source layer 0..d-1 for destination layer d; the
/// adjacent connection (d-1 -> d) is always present.
struct CfnnTopology {
    std::vector<std::size_t> layer_sizes;
    std::vector<Activation> activations;
    std::vector<std::vector<std::uint8_t>> connections;

    static CfnnTopology full_cascade(std::vector<std::size_t> sizes);
    static CfnnTopology adjacent_only(std::vector<std::size_t> sizes);

    std::size_t depth() const { return layer_sizes.empty() ? 0 : layer_sizes.size() - 1; }
    std::size_t n_in() const { return layer_sizes.front(); }
    std::size_t n_out() const { return layer_sizes.back(); }
    bool connected(std::size_t dest, std::size_t src) const {
        return connections[dest - 1][src] != 0;
    }

    /// Throws DimensionMismatch on any structural violation.
    void validate() const;
};

/// Flat weight/bias vector in canonical order: for each destination layer in
/// order, for each connected source layer in order, the row-major weight
/// block (destination-size x source-size), then the destination's bias block.
using ParamVector = Vector;

std::size_t param_count(const CfnnTopology& t);

/// Hyperbolic tangent sigmoid, 2/(1+e^(-2x)) - 1. Evaluated on the
/// non-overflowing side and exactly odd by construction.
inline double tansig(double x) {
    const double t = 2.0 / (1.0 + std::exp(-2.0 * std::abs(x))) - 1.0;
    return x < 0.0 ? -t : t;
}

/// Evaluates the network on one input row (normalized units).
std::vector<double> forward(const CfnnTopology& t, const ParamVector& params,
                            std::span<const double> x);

/// Sum squared error over every dataset row and output.
double sse_loss(const CfnnTopology& t, const ParamVector& params, const Dataset& data);

/// Exact gradient of sse_loss in canonical parameter order. Backpropagation
/// routes error through the cascade connections: a layer's delta accumulates
/// contributions from every later layer it feeds.
ParamVector gradient(const CfnnTopology& t, const ParamVector& params, const Dataset& data);

/// Loss and gradient in one pass over the data (what the optimizer calls).
double sse_loss_and_gradient(const CfnnTopology& t, const ParamVector& params,
                             const Dataset& data, ParamVector& grad_out);

enum class InitScheme { uniform_scaled, fixed_constant };

/// uniform_scaled draws every parameter of a destination layer uniformly in
/// +-1/sqrt(fan_in) where fan_in is the layer's total number of incoming
/// units; fixed_constant fills the vector with `constant` (tests only).
ParamVector init_weights(const CfnnTopology& t, std::uint64_t seed,
                         InitScheme scheme = InitScheme::uniform_scaled,
                         double constant = 0.0);

/// A trained estimator: topology, the normalization captured when its
/// training set was built, and the parameter vector.
struct Model {
    CfnnTopology topology;
    Normalization norm;
    ParamVector params;
};

/// Text model file: header (sizes, activations, cascade mask, normalization
/// ranges) followed by the canonical parameter vector at full precision.
/// Loading validates the parameter count against the topology.
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);
std::string model_to_text(const Model& m);
Model model_from_text(const std::string& text, const std::string& origin);

}  // namespace bdcest::nn
