#pragma once

#include <istream>
#include <string>
#include <vector>

#include "qwave/common.hpp"

namespace qwave::csvio {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Comma-separated with optional double-quoted fields; '#' lines and blank
// lines are skipped. First remaining line is the header.
Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);

// Accepts empty / na / nan / ? as missing (returns false with value = NaN).
bool parse_number(const std::string& cell, double& value);

std::string join_row(const std::vector<std::string>& cells);

}  // namespace qwave::csvio
