// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/dataset.hpp"

#include <sstream>

#include "bdcest/csv.hpp"
#include "bdcest/errors.hpp"

namespace bdcest {

namespace {
constexpr const char* kTargetNames[3] = {"omega", "theta", "r_a"};
}

void save_dataset(const Dataset& d, const std::string& path) {
    std::ostringstream out;
    out << "# bdcest dataset v1\n";
    out << "# rows " << d.rows() << "\n";
    out << "# input_width " << d.input_width << "\n";
    for (std::size_t c = 0; c < d.input_width; ++c)
        out << "# norm_input " << d.input_names[c] << ' ' << format_double(d.norm.inputs[c].min)
            << ' ' << format_double(d.norm.inputs[c].max) << "\n";
    for (std::size_t c = 0; c < 3; ++c)
        out << "# norm_target " << kTargetNames[c] << ' '
            << format_double(d.norm.targets[c].min) << ' '
            << format_double(d.norm.targets[c].max) << "\n";
    for (std::size_t c = 0; c < d.input_width; ++c) out << d.input_names[c] << ',';
    out << "omega,theta,r_a\n";
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const double* in = d.input_row(r);
        for (std::size_t c = 0; c < d.input_width; ++c) out << format_double(in[c]) << ',';
        const double* tg = d.target_row(r);
        out << format_double(tg[0]) << ',' << format_double(tg[1]) << ','
            << format_double(tg[2]) << '\n';
    }
    write_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string line;
    int lineno = 0;
    auto where = [&] { return path + ":" + std::to_string(lineno); };

    Dataset d;
    std::size_t rows = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string tag;
            meta >> tag;
            if (tag == "bdcest") continue;  // version banner
            if (tag == "rows") {
                meta >> rows;
            } else if (tag == "input_width") {
                meta >> d.input_width;
            } else if (tag == "norm_input" || tag == "norm_target") {
                std::string name, mn, mx;
                meta >> name >> mn >> mx;
                ColumnRange r{parse_double(mn, where()), parse_double(mx, where())};
                if (tag == "norm_input") {
                    d.norm.inputs.push_back(r);
                    d.input_names.push_back(name);
                } else {
                    d.norm.targets.push_back(r);
                }
            } else {
                throw IoError(where() + ": unknown dataset metadata '" + tag + "'");
            }
            continue;
        }
        if (!have_header) {
            have_header = true;  // column names; widths already known from metadata
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != d.input_width + 3)
            throw IoError(where() + ": expected " + std::to_string(d.input_width + 3) +
                          " columns");
        for (std::size_t c = 0; c < d.input_width; ++c)
            d.inputs.push_back(parse_double(fields[c], where()));
        for (std::size_t c = 0; c < 3; ++c)
            d.targets.push_back(parse_double(fields[d.input_width + c], where()));
    }
    if (d.input_width == 0 || !have_header)
        throw IoError(path + ": missing dataset metadata or header");
    if (d.norm.inputs.size() != d.input_width || d.norm.targets.size() != 3)
        throw IoError(path + ": normalization metadata does not match input_width");
    if (d.rows() != rows)
        throw IoError(path + ": row count mismatch, metadata says " + std::to_string(rows) +
                      ", file has " + std::to_string(d.rows()));
    if (d.rows() < 2) throw EmptyDataset(path + ": dataset has fewer than 2 rows");
    return d;
}

}  // namespace bdcest
