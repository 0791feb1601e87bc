#include "z2glue/emit.hpp"
#include <cstdio>
#include <cstdlib>

namespace z2glue {

std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round12(double x) {
    return std::strtod(fmt12(x).c_str(), nullptr);
}

ordered_json json_round12(const ordered_json& j) {
    if (j.is_number_float()) return round12(j.get<double>());
    if (j.is_object()) {
        ordered_json out = ordered_json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = json_round12(it.value());
        return out;
    }
    if (j.is_array()) {
        ordered_json out = ordered_json::array();
        for (const auto& v : j) out.push_back(json_round12(v));
        return out;
    }
    return j;
}

void csv_row(std::ostream& os, const std::vector<double>& vals) {
    for (size_t i = 0; i < vals.size(); ++i) {
        if (i) os << ',';
        os << fmt12(vals[i]);
    }
    os << '\n';
}

void csv_header(std::ostream& os, const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) os << ',';
        os << names[i];
    }
    os << '\n';
}

} // namespace z2glue
