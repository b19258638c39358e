// Copyright 2026 The doseopt Authors.
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

#ifndef DOSEOPT_CSV_H_
#define DOSEOPT_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace doseopt {

struct CsvTable {
  std::vector<std::string> header;  // Empty when the file had no header.
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file. Blank lines are skipped. Throws
// Error(kParse) with a 1-based line number on ragged rows.
CsvTable ReadCsv(const std::string& path, bool has_header);
CsvTable ParseCsv(std::string_view text, bool has_header);

// Parses one numeric cell; throws Error(kParse) naming row and column
// (both 1-based, row counted in data rows) on failure.
double ParseCell(const std::string& cell, std::size_t row, std::size_t col);

// Shortest representation that round-trips to the same double.
std::string FormatDouble(double value);

// Like FormatDouble but always shows a decimal point ("0.0", "1.0").
std::string FormatDose(double dose);

void WriteTextFile(const std::string& path, const std::string& contents);

}  // namespace doseopt

#endif  // DOSEOPT_CSV_H_
