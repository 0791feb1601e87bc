#pragma once
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <vector>

namespace z2glue {

using ordered_json = nlohmann::ordered_json;

/** Shortest decimal with 12 significant digits, "%.12g" semantics. */
std::string fmt12(double x);

/** Round through the 12-digit decimal representation. */
double round12(double x);

/** Recursively replace every number in j by its 12-digit rounding. */
ordered_json json_round12(const ordered_json& j);

/** One CSV row of 12-digit floats, comma separated, newline terminated. */
void csv_row(std::ostream& os, const std::vector<double>& vals);

/** CSV header row from column names. */
void csv_header(std::ostream& os, const std::vector<std::string>& names);

} // namespace z2glue
