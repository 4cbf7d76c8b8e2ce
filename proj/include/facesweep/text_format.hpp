// Copyright 2026 The facesweep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace facesweep {

// Locale-independent number formatting.
std::string format_fixed(double value, int decimals);
// Shortest text that parses back to the same double.
std::string format_shortest(double value);

// Strict parses: the whole field must be consumed. Throw Error(kSchema).
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

using CsvRow = std::vector<std::string>;

// Minimal RFC 4180 reading/writing: fields containing commas, quotes or
// newlines are quoted.
std::string csv_escape(std::string_view field);
std::string csv_line(const CsvRow& fields);
std::vector<CsvRow> parse_csv(std::string_view text);
std::vector<CsvRow> read_csv_file(const std::filesystem::path& path);

// Checks that rows[0] equals `header` exactly.
void expect_csv_header(const std::vector<CsvRow>& rows, const CsvRow& header,
                       const std::string& what);

}  // namespace facesweep
