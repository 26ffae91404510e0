#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace sudlerlab::report {

// Shortest round-trip decimal for binary64: %.17g is always sufficient and
// keeps CSV payloads byte-stable across runs.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& cell) {
    bool needs = cell.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << csv_quote(cells[i]);
    }
    os << '\n';
}

// Binary sidecar records: explicit little-endian packing regardless of host.
inline void put_u64_le(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void put_f64_le(std::ostream& os, double d) {
    put_u64_le(os, std::bit_cast<std::uint64_t>(d));
}

inline void sidecar_record(std::ostream& os, std::uint64_t n, double value) {
    put_u64_le(os, n);
    put_f64_le(os, value);
}

} // namespace sudlerlab::report
