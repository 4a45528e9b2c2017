// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bdcest {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);

/// Strict double parse of the whole field. Throws IoError on garbage.
double parse_double(std::string_view field, const std::string& context);

/// Strict non-negative integer parse. Throws IoError on garbage.
std::size_t parse_size(std::string_view field, const std::string& context);

std::vector<std::string_view> split(std::string_view line, char sep);

/// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes a whole file; throws IoError on failure.
void write_file(const std::string& path, const std::string& contents);

}  // namespace bdcest
