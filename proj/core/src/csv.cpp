// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#include "bdcest/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bdcest/errors.hpp"

namespace bdcest {

std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& context) {
    double value = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw IoError(context + ": not a number: '" + std::string(field) + "'");
    return value;
}

std::size_t parse_size(std::string_view field, const std::string& context) {
    std::size_t value = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw IoError(context + ": not a non-negative integer: '" + std::string(field) + "'");
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure: " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << contents;
    out.flush();
    if (!out) throw IoError("write failure: " + path);
}

}  // namespace bdcest
