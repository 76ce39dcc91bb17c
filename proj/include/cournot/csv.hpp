#pragma once

// Minimal CSV emission: shortest round-trippable doubles, quoting only when
// a field needs it, LF line ends. Output is byte-identical across runs for
// identical inputs.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace cournot::csv {

inline std::string field(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string field(int v) { return std::to_string(v); }

inline std::string field(std::string s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        quoted += ch;
        if (ch == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

inline std::string field(const char* s) { return field(std::string(s)); }

template <typename... Cells>
void row(std::ostream& out, const Cells&... cells) {
    const char* sep = "";
    ((out << sep << field(cells), sep = ","), ...);
    out << '\n';
}

inline void row_cells(std::ostream& out, const std::vector<std::string>& cells) {
    const char* sep = "";
    for (const auto& cell : cells) {
        out << sep << field(cell);
        sep = ",";
    }
    out << '\n';
}

}  // namespace cournot::csv
