#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "teslasim/scenario.hpp"

namespace teslasim {

// Trace CSV: header row, one sample per line, '.' decimal separator, columns
// in TraceSample declaration order. Doubles are printed in shortest
// round-trip form, so parsing an emitted trace reproduces the samples
// exactly.
std::string trace_to_csv(const std::vector<TraceSample>& trace);
std::vector<TraceSample> trace_from_csv(std::string_view csv);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string force_table_to_csv(const std::vector<ForceRow>& rows);
std::string positioning_to_csv(const std::vector<PositioningRow>& rows);

// Shortest-round-trip decimal form of a double (to_chars). "inf"/"nan" pass
// through by name.
std::string format_double(double v);
double parse_double(std::string_view text);  // ConfigError on garbage

// Writes via a temporary file in the same directory plus an atomic rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace teslasim
