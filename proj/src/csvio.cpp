#include "qwave/csvio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

namespace qwave::csvio {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') continue;
        auto cells = split_line(line);
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

Table read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file: " + path);
    return read_csv(in);
}

bool parse_number(const std::string& cell, double& value) {
    value = std::numeric_limits<double>::quiet_NaN();
    std::string s = trim(cell);
    if (s.empty()) return false;
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "na" || lower == "nan" || lower == "?" || lower == "null") return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        value = std::numeric_limits<double>::quiet_NaN();
        return false;
    }
    return std::isfinite(value);
}

std::string join_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        const bool needs_quotes = cells[i].find_first_of(",\"") != std::string::npos;
        if (needs_quotes) {
            out.push_back('"');
            for (char c : cells[i]) {
                if (c == '"') out.push_back('"');
                out.push_back(c);
            }
            out.push_back('"');
        } else {
            out += cells[i];
        }
    }
    return out;
}

}  // namespace qwave::csvio
