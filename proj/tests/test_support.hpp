// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bdcest/cfnn.hpp"
#include "bdcest/dataset.hpp"
#include "reference_ffnn.hpp"

namespace testsupport {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int k = 0;; ++k) {
            path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(k));
            std::error_code ec;
            if (std::filesystem::create_directory(path_, ec)) break;
        }
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Canonical flat-parameter layout of a cascade network, re-derived
/// independently of the library so tests can address individual blocks.
struct BlockAddress {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
};

struct TestLayout {
    // weight[(dest-1)][src] valid where connected
    std::vector<std::vector<BlockAddress>> weight;
    std::vector<std::size_t> bias_offset;
    std::size_t total = 0;
};

inline TestLayout compute_layout(const bdcest::nn::CfnnTopology& t) {
    TestLayout lay;
    std::size_t off = 0;
    for (std::size_t d = 1; d < t.layer_sizes.size(); ++d) {
        lay.weight.emplace_back(d);
        for (std::size_t s = 0; s < d; ++s) {
            if (!t.connected(d, s)) continue;
            lay.weight[d - 1][s] = {off, t.layer_sizes[d], t.layer_sizes[s]};
            off += t.layer_sizes[d] * t.layer_sizes[s];
        }
        lay.bias_offset.push_back(off);
        off += t.layer_sizes[d];
    }
    lay.total = off;
    return lay;
}

/// Zeroes every non-adjacent weight block of a full-cascade parameter vector.
inline bdcest::nn::ParamVector zero_cascade_blocks(const bdcest::nn::CfnnTopology& t,
                                                   bdcest::nn::ParamVector p) {
    const TestLayout lay = compute_layout(t);
    for (std::size_t d = 1; d < t.layer_sizes.size(); ++d)
        for (std::size_t s = 0; s + 1 < d; ++s) {
            const BlockAddress& b = lay.weight[d - 1][s];
            for (std::size_t k = 0; k < b.rows * b.cols; ++k) p[b.offset + k] = 0.0;
        }
    return p;
}

/// Copies the adjacent blocks/biases of a cascade ParamVector into a plain
/// feed-forward net with the same sizes.
inline refnet::Ffnn to_ffnn(const bdcest::nn::CfnnTopology& t,
                            const bdcest::nn::ParamVector& p) {
    const TestLayout lay = compute_layout(t);
    refnet::Ffnn net(t.layer_sizes);
    for (std::size_t d = 1; d < t.layer_sizes.size(); ++d) {
        const BlockAddress& b = lay.weight[d - 1][d - 1];
        for (std::size_t k = 0; k < b.rows * b.cols; ++k) net.w[d - 1][k] = p[b.offset + k];
        for (std::size_t i = 0; i < t.layer_sizes[d]; ++i)
            net.bias[d - 1][i] = p[lay.bias_offset[d - 1] + i];
    }
    return net;
}

/// Random dataset with rows in [-1, 1]; norm ranges set to the identity map.
inline bdcest::Dataset random_dataset(std::mt19937_64& rng, std::size_t rows,
                                      std::size_t input_width) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    bdcest::Dataset d;
    d.input_width = input_width;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < input_width; ++c) d.inputs.push_back(u(rng));
        for (std::size_t c = 0; c < 3; ++c) d.targets.push_back(u(rng));
    }
    for (std::size_t c = 0; c < input_width; ++c) {
        d.norm.inputs.push_back({-1.0, 1.0});
        d.input_names.push_back("in" + std::to_string(c));
    }
    for (std::size_t c = 0; c < 3; ++c) d.norm.targets.push_back({-1.0, 1.0});
    return d;
}

}  // namespace testsupport
