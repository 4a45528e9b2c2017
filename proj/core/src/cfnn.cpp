// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/cfnn.hpp"

#include <sstream>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"
#include "bdcest/rng.hpp"

namespace bdcest::nn {

namespace {

struct WeightBlock {
    std::size_t dest;    // destination layer index, 1-based over layers
    std::size_t src;     // source layer index, 0 = input
    std::size_t offset;  // into the flat parameter vector
    std::size_t rows;    // destination size
    std::size_t cols;    // source size
};

/// Canonical flat layout of weight blocks and biases.
struct Layout {
    std::vector<WeightBlock> blocks;
    std::vector<std::size_t> bias_offset;  // per destination layer (index dest-1)
    std::size_t total = 0;
};

Layout make_layout(const CfnnTopology& t) {
    Layout lay;
    std::size_t off = 0;
    for (std::size_t d = 1; d <= t.depth(); ++d) {
        for (std::size_t s = 0; s < d; ++s) {
            if (!t.connected(d, s)) continue;
            const WeightBlock b{d, s, off, t.layer_sizes[d], t.layer_sizes[s]};
            off += b.rows * b.cols;
            lay.blocks.push_back(b);
        }
        lay.bias_offset.push_back(off);
        off += t.layer_sizes[d];
    }
    lay.total = off;
    return lay;
}

struct Workspace {
    std::vector<std::vector<double>> act;    // act[0..depth]
    std::vector<std::vector<double>> delta;  // delta[1..depth], index by layer

    explicit Workspace(const CfnnTopology& t) {
        act.resize(t.depth() + 1);
        delta.resize(t.depth() + 1);
        for (std::size_t l = 0; l <= t.depth(); ++l) {
            act[l].resize(t.layer_sizes[l]);
            if (l >= 1) delta[l].resize(t.layer_sizes[l]);
        }
    }
};

void forward_row(const CfnnTopology& t, const Layout& lay, const ParamVector& p,
                 const double* x, Workspace& ws) {
    std::copy(x, x + t.n_in(), ws.act[0].begin());
    std::size_t block = 0;
    for (std::size_t d = 1; d <= t.depth(); ++d) {
        std::vector<double>& out = ws.act[d];
        std::copy(p.begin() + static_cast<std::ptrdiff_t>(lay.bias_offset[d - 1]),
                  p.begin() + static_cast<std::ptrdiff_t>(lay.bias_offset[d - 1] + out.size()),
                  out.begin());
        for (; block < lay.blocks.size() && lay.blocks[block].dest == d; ++block) {
            const WeightBlock& b = lay.blocks[block];
            const double* w = p.data() + b.offset;
            const std::vector<double>& src = ws.act[b.src];
            for (std::size_t i = 0; i < b.rows; ++i) {
                double s = 0.0;
                const double* wrow = w + i * b.cols;
                for (std::size_t j = 0; j < b.cols; ++j) s += wrow[j] * src[j];
                out[i] += s;
            }
        }
        if (t.activations[d - 1] == Activation::tansig)
            for (double& v : out) v = tansig(v);
    }
}

/// Accumulates this row's gradient into grad; returns the row's squared error.
double backward_row(const CfnnTopology& t, const Layout& lay, const ParamVector& p,
                    const double* target, Workspace& ws, ParamVector& grad) {
    const std::size_t depth = t.depth();
    double err2 = 0.0;
    {
        std::vector<double>& dl = ws.delta[depth];
        const std::vector<double>& y = ws.act[depth];
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double e = y[i] - target[i];
            err2 += e * e;
            dl[i] = 2.0 * e;  // purelin output
        }
    }
    // Hidden deltas, newest first; every later layer the hidden layer feeds
    // contributes through its weight block.
    for (std::size_t l = depth - 1; l >= 1; --l) {
        std::vector<double>& dl = ws.delta[l];
        std::fill(dl.begin(), dl.end(), 0.0);
        for (const WeightBlock& b : lay.blocks) {
            if (b.src != l) continue;
            const double* w = p.data() + b.offset;
            const std::vector<double>& dd = ws.delta[b.dest];
            for (std::size_t i = 0; i < b.rows; ++i) {
                const double di = dd[i];
                const double* wrow = w + i * b.cols;
                for (std::size_t j = 0; j < b.cols; ++j) dl[j] += wrow[j] * di;
            }
        }
        if (t.activations[l - 1] == Activation::tansig) {
            const std::vector<double>& a = ws.act[l];
            for (std::size_t j = 0; j < dl.size(); ++j) dl[j] *= 1.0 - a[j] * a[j];
        }
    }
    for (const WeightBlock& b : lay.blocks) {
        double* g = grad.data() + b.offset;
        const std::vector<double>& dd = ws.delta[b.dest];
        const std::vector<double>& src = ws.act[b.src];
        for (std::size_t i = 0; i < b.rows; ++i) {
            const double di = dd[i];
            double* grow = g + i * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) grow[j] += di * src[j];
        }
    }
    for (std::size_t d = 1; d <= depth; ++d) {
        double* g = grad.data() + lay.bias_offset[d - 1];
        const std::vector<double>& dd = ws.delta[d];
        for (std::size_t i = 0; i < dd.size(); ++i) g[i] += dd[i];
    }
    return err2;
}

void check_dims(const CfnnTopology& t, const ParamVector& params, const Dataset& data) {
    t.validate();
    if (params.size() != param_count(t))
        throw DimensionMismatch("parameter vector has " + std::to_string(params.size()) +
                                " entries, topology needs " + std::to_string(param_count(t)));
    if (data.input_width != t.n_in())
        throw DimensionMismatch("dataset input width " + std::to_string(data.input_width) +
                                " != network n_in " + std::to_string(t.n_in()));
    if (t.n_out() != 3)
        throw DimensionMismatch("dataset targets are 3-wide, network n_out is " +
                                std::to_string(t.n_out()));
}

}  // namespace

CfnnTopology CfnnTopology::full_cascade(std::vector<std::size_t> sizes) {
    CfnnTopology t;
    t.layer_sizes = std::move(sizes);
    const std::size_t depth = t.layer_sizes.size() - 1;
    for (std::size_t d = 1; d <= depth; ++d) {
        t.activations.push_back(d == depth ? Activation::purelin : Activation::tansig);
        t.connections.emplace_back(d, std::uint8_t{1});
    }
    t.validate();
    return t;
}

CfnnTopology CfnnTopology::adjacent_only(std::vector<std::size_t> sizes) {
    CfnnTopology t = full_cascade(std::move(sizes));
    for (std::size_t d = 1; d <= t.depth(); ++d)
        for (std::size_t s = 0; s + 1 < d; ++s) t.connections[d - 1][s] = 0;
    return t;
}

void CfnnTopology::validate() const {
    if (layer_sizes.size() < 2)
        throw DimensionMismatch("topology needs an input and an output layer");
    for (std::size_t n : layer_sizes)
        if (n < 1) throw DimensionMismatch("every layer size must be >= 1");
    if (activations.size() != depth())
        throw DimensionMismatch("need one activation per non-input layer");
    if (activations.back() != Activation::purelin)
        throw DimensionMismatch("output layer activation must be purelin");
    if (connections.size() != depth())
        throw DimensionMismatch("connection mask must cover every non-input layer");
    for (std::size_t d = 1; d <= depth(); ++d) {
        if (connections[d - 1].size() != d)
            throw DimensionMismatch("connection mask for layer " + std::to_string(d) +
                                    " must list sources 0.." + std::to_string(d - 1));
        if (!connections[d - 1][d - 1])
            throw DimensionMismatch("adjacent connection " + std::to_string(d - 1) + "->" +
                                    std::to_string(d) + " must be present");
    }
}

std::size_t param_count(const CfnnTopology& t) {
    t.validate();
    return make_layout(t).total;
}

std::vector<double> forward(const CfnnTopology& t, const ParamVector& params,
                            std::span<const double> x) {
    t.validate();
    const Layout lay = make_layout(t);
    if (params.size() != lay.total)
        throw DimensionMismatch("parameter vector has " + std::to_string(params.size()) +
                                " entries, topology needs " + std::to_string(lay.total));
    if (x.size() != t.n_in())
        throw DimensionMismatch("input row has " + std::to_string(x.size()) +
                                " entries, network n_in is " + std::to_string(t.n_in()));
    Workspace ws(t);
    forward_row(t, lay, params, x.data(), ws);
    return ws.act[t.depth()];
}

double sse_loss(const CfnnTopology& t, const ParamVector& params, const Dataset& data) {
    check_dims(t, params, data);
    const Layout lay = make_layout(t);
    Workspace ws(t);
    double loss = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        forward_row(t, lay, params, data.input_row(r), ws);
        const double* target = data.target_row(r);
        const std::vector<double>& y = ws.act[t.depth()];
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double e = y[i] - target[i];
            loss += e * e;
        }
    }
    return loss;
}

double sse_loss_and_gradient(const CfnnTopology& t, const ParamVector& params,
                             const Dataset& data, ParamVector& grad_out) {
    check_dims(t, params, data);
    const Layout lay = make_layout(t);
    Workspace ws(t);
    grad_out.assign(lay.total, 0.0);
    double loss = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        forward_row(t, lay, params, data.input_row(r), ws);
        loss += backward_row(t, lay, params, data.target_row(r), ws, grad_out);
    }
    return loss;
}

ParamVector gradient(const CfnnTopology& t, const ParamVector& params, const Dataset& data) {
    ParamVector g;
    sse_loss_and_gradient(t, params, data, g);
    return g;
}

ParamVector init_weights(const CfnnTopology& t, std::uint64_t seed, InitScheme scheme,
                         double constant) {
    t.validate();
    const Layout lay = make_layout(t);
    ParamVector p(lay.total, constant);
    if (scheme == InitScheme::fixed_constant) return p;

    Rng rng(seed);
    std::vector<double> bound(t.depth() + 1, 0.0);
    for (std::size_t d = 1; d <= t.depth(); ++d) {
        std::size_t fan_in = 0;
        for (std::size_t s = 0; s < d; ++s)
            if (t.connected(d, s)) fan_in += t.layer_sizes[s];
        bound[d] = 1.0 / std::sqrt(static_cast<double>(fan_in));
    }
    // Canonical order so the draw sequence is part of the file contract.
    for (const WeightBlock& b : lay.blocks)
        for (std::size_t k = 0; k < b.rows * b.cols; ++k)
            p[b.offset + k] = rng.uniform(-bound[b.dest], bound[b.dest]);
    for (std::size_t d = 1; d <= t.depth(); ++d)
        for (std::size_t i = 0; i < t.layer_sizes[d]; ++i)
            p[lay.bias_offset[d - 1] + i] = rng.uniform(-bound[d], bound[d]);
    return p;
}

std::string model_to_text(const Model& m) {
    m.topology.validate();
    std::ostringstream out;
    out << "bdcest-cfnn v1\n";
    out << "layers";
    for (std::size_t n : m.topology.layer_sizes) out << ' ' << n;
    out << "\nactivations";
    for (Activation a : m.topology.activations)
        out << ' ' << (a == Activation::tansig ? "tansig" : "purelin");
    out << '\n';
    for (std::size_t d = 1; d <= m.topology.depth(); ++d) {
        out << "cascade " << d;
        for (std::size_t s = 0; s < d; ++s) out << ' ' << (m.topology.connected(d, s) ? 1 : 0);
        out << '\n';
    }
    for (const ColumnRange& r : m.norm.inputs)
        out << "norm_input " << format_double(r.min) << ' ' << format_double(r.max) << '\n';
    for (const ColumnRange& r : m.norm.targets)
        out << "norm_target " << format_double(r.min) << ' ' << format_double(r.max) << '\n';
    out << "params " << m.params.size() << '\n';
    for (double v : m.params) out << format_double(v) << '\n';
    return out.str();
}

Model model_from_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto where = [&] { return origin + ":" + std::to_string(lineno); };
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw IoError(origin + ": truncated model file, expected " +
                                                   std::string(what));
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
    };

    next_line("banner");
    if (line != "bdcest-cfnn v1") throw IoError(where() + ": not a bdcest model file");

    Model m;
    next_line("layers");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "layers") throw IoError(where() + ": expected 'layers'");
        std::size_t n;
        while (ls >> n) m.topology.layer_sizes.push_back(n);
    }
    next_line("activations");
    {
        std::istringstream ls(line);
        std::string tag, a;
        ls >> tag;
        if (tag != "activations") throw IoError(where() + ": expected 'activations'");
        while (ls >> a) {
            if (a == "tansig") m.topology.activations.push_back(Activation::tansig);
            else if (a == "purelin") m.topology.activations.push_back(Activation::purelin);
            else throw IoError(where() + ": unknown activation '" + a + "'");
        }
    }
    for (std::size_t d = 1; d + 1 <= m.topology.layer_sizes.size(); ++d) {
        next_line("cascade mask");
        std::istringstream ls(line);
        std::string tag;
        std::size_t dd;
        ls >> tag >> dd;
        if (tag != "cascade" || dd != d)
            throw IoError(where() + ": expected 'cascade " + std::to_string(d) + "'");
        std::vector<std::uint8_t> row;
        int bit;
        while (ls >> bit) row.push_back(bit ? 1 : 0);
        m.topology.connections.push_back(std::move(row));
    }
    m.topology.validate();

    for (std::size_t c = 0; c < m.topology.n_in(); ++c) {
        next_line("norm_input");
        std::istringstream ls(line);
        std::string tag, mn, mx;
        ls >> tag >> mn >> mx;
        if (tag != "norm_input") throw IoError(where() + ": expected 'norm_input'");
        m.norm.inputs.push_back({parse_double(mn, where()), parse_double(mx, where())});
    }
    for (std::size_t c = 0; c < m.topology.n_out(); ++c) {
        next_line("norm_target");
        std::istringstream ls(line);
        std::string tag, mn, mx;
        ls >> tag >> mn >> mx;
        if (tag != "norm_target") throw IoError(where() + ": expected 'norm_target'");
        m.norm.targets.push_back({parse_double(mn, where()), parse_double(mx, where())});
    }

    next_line("params count");
    {
        std::istringstream ls(line);
        std::string tag;
        std::size_t count;
        ls >> tag >> count;
        if (tag != "params") throw IoError(where() + ": expected 'params <count>'");
        if (count != param_count(m.topology))
            throw IoError(where() + ": parameter count " + std::to_string(count) +
                          " does not match topology (" +
                          std::to_string(param_count(m.topology)) + ")");
        m.params.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            next_line("parameter value");
            m.params.push_back(parse_double(line, where()));
        }
    }
    return m;
}

void save_model(const Model& m, const std::string& path) {
    write_file(path, model_to_text(m));
}

Model load_model(const std::string& path) {
    return model_from_text(read_file(path), path);
}

}  // namespace bdcest::nn
