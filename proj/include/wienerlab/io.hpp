#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "wienerlab/estimate.hpp"
#include "wienerlab/experiments.hpp"
#include "wienerlab/fisher.hpp"
#include "wienerlab/moments.hpp"

namespace wienerlab::io {

using Json = nlohmann::ordered_json;

// {"kind":"poly","coefficients":[...]}, {"kind":"linear","gain":K},
// {"kind":"quadratic"}, {"kind":"cubic"}. Malformed input throws FormatError.
PolynomialSensor sensor_from_json(const Json& j);
Json to_json(const PolynomialSensor& sensor);

// {"theta":[...],"sensor":{...},"var_v":..,"var_e":..}
WienerModel model_from_json(const Json& j);
Json to_json(const WienerModel& model);

Json read_json_file(const std::string& path);
WienerModel read_model(const std::string& path);

// CSV with header t,u,y. Rows with a wrong field count or unparsable
// numbers throw FormatError.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::string& path);
void write_dataset(std::ostream& out, const Dataset& data, int digits = 17);

// Single-column series; the column is `u` when a header names it, otherwise
// the last column.
std::vector<double> read_series(const std::string& path);

// Shortest-enough formatting with `digits` significant digits.
std::string format_number(double value, int digits = 17);

Json to_json(const MomentReport& report);
Json to_json(const FisherReport& report, std::size_t samples);
Json to_json(const EstimateResult& result);

void write_table1_csv(std::ostream& out, const Table1& table, int digits = 17);

}  // namespace wienerlab::io
