#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace simshap {

// Quotes a field per RFC 4180 when it contains a comma, quote, or newline.
inline std::string csvField(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (const char ch : value) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

inline void writeCsvRow(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        out << csvField(fields[i]);
    }
    out << '\n';
}

}  // namespace simshap
