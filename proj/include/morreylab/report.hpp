#pragma once

#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace morreylab {

/// Every float in reports is emitted with exactly 17 significant digits so
/// determinism is checkable byte for byte.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

/// Structured record of one inequality check. Self-contained: the grid
/// metadata and witnesses allow the check to be re-run.
struct VerificationReport {
    std::string check_id;
    std::string anchor;   // short tag of the inequality family being checked
    double left = 0.0;    // left-hand side of the checked inequality
    double right = 0.0;   // right-hand side
    double constant = 0.0; // empirical constant extracted by the check
    bool pass = false;
    std::map<std::string, std::string> witnesses; // cube ids, hashes, notes
    std::map<std::string, std::string> grid_meta;
    double runtime_s = 0.0;

    std::string to_json() const {
        std::string j = "{\n";
        j += "  \"check\": \"" + json_escape(check_id) + "\",\n";
        j += "  \"anchor\": \"" + json_escape(anchor) + "\",\n";
        j += "  \"left\": " + fmt17(left) + ",\n";
        j += "  \"right\": " + fmt17(right) + ",\n";
        j += "  \"constant\": " + fmt17(constant) + ",\n";
        j += std::string("  \"pass\": ") + (pass ? "true" : "false") + ",\n";
        j += "  \"witnesses\": {";
        bool first = true;
        for (const auto& [k, v] : witnesses) {
            j += first ? "\n" : ",\n";
            j += "    \"" + json_escape(k) + "\": \"" + json_escape(v) + "\"";
            first = false;
        }
        j += witnesses.empty() ? "},\n" : "\n  },\n";
        j += "  \"grid\": {";
        first = true;
        for (const auto& [k, v] : grid_meta) {
            j += first ? "\n" : ",\n";
            j += "    \"" + json_escape(k) + "\": \"" + json_escape(v) + "\"";
            first = false;
        }
        j += grid_meta.empty() ? "},\n" : "\n  },\n";
        j += "  \"runtime_s\": " + fmt17(runtime_s) + "\n";
        j += "}\n";
        return j;
    }

    static std::string csv_header() { return "check,anchor,pass,left,right,constant,runtime_s"; }
    std::string to_csv_row() const {
        return check_id + "," + anchor + "," + (pass ? "1" : "0") + "," + fmt17(left) + "," +
               fmt17(right) + "," + fmt17(constant) + "," + fmt17(runtime_s);
    }
};

} // namespace morreylab
