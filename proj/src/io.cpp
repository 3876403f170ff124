#include "wienerlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wienerlab/errors.hpp"

namespace wienerlab::io {

namespace {

double number_field(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw FormatError("io", std::string("missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("io", "line " + std::to_string(line_no) + ": not a number '" + s + "'");
  }
  return v;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("io", "cannot open '" + path + "'");
  return in;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

PolynomialSensor sensor_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw FormatError("io", "sensor needs a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") return PolynomialSensor::linear(number_field(j, "gain"));
  if (kind == "quadratic") return PolynomialSensor::quadratic();
  if (kind == "cubic") return PolynomialSensor::cubic();
  if (kind == "poly") {
    if (!j.contains("coefficients") || !j.at("coefficients").is_array()) {
      throw FormatError("io", "poly sensor needs a 'coefficients' array");
    }
    std::vector<double> c;
    for (const auto& v : j.at("coefficients")) {
      if (!v.is_number()) throw FormatError("io", "sensor coefficients must be numbers");
      c.push_back(v.get<double>());
    }
    return PolynomialSensor(std::move(c));
  }
  throw FormatError("io", "unknown sensor kind '" + kind + "'");
}

Json to_json(const PolynomialSensor& sensor) {
  return Json{{"kind", "poly"}, {"coefficients", sensor.coefficients()}};
}

WienerModel model_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("io", "model must be a JSON object");
  WienerModel model;
  if (!j.contains("theta") || !j.at("theta").is_array()) {
    throw FormatError("io", "model needs a 'theta' array");
  }
  for (const auto& v : j.at("theta")) {
    if (!v.is_number()) throw FormatError("io", "theta entries must be numbers");
    model.theta.push_back(v.get<double>());
  }
  if (!j.contains("sensor")) throw FormatError("io", "model needs a 'sensor'");
  model.sensor = sensor_from_json(j.at("sensor"));
  model.var_v = number_field(j, "var_v");
  model.var_e = number_field(j, "var_e");
  model.validate();
  return model;
}

Json to_json(const WienerModel& model) {
  return Json{{"theta", model.theta},
              {"sensor", to_json(model.sensor)},
              {"var_v", model.var_v},
              {"var_e", model.var_e}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in = open(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("io", "'" + path + "': " + e.what());
  }
}

WienerModel read_model(const std::string& path) { return model_from_json(read_json_file(path)); }

Dataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank(line)) break;
  }
  const auto header = split_csv(line);
  if (header != std::vector<std::string>{"t", "u", "y"}) {
    throw FormatError("io", "dataset header must be 't,u,y'");
  }
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) {
      throw FormatError("io", "line " + std::to_string(line_no) + ": expected 3 fields, got " +
                                  std::to_string(cells.size()));
    }
    parse_double(cells[0], line_no);
    data.u.push_back(parse_double(cells[1], line_no));
    data.y.push_back(parse_double(cells[2], line_no));
  }
  if (data.y.empty()) throw FormatError("io", "dataset has no rows");
  return data;
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in = open(path);
  return read_dataset(in);
}

std::string format_number(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

void write_dataset(std::ostream& out, const Dataset& data, int digits) {
  out << "t,u,y\n";
  for (std::size_t t = 0; t < data.size(); ++t) {
    out << t + 1 << ',' << format_number(data.u[t], digits) << ','
        << format_number(data.y[t], digits) << '\n';
  }
}

std::vector<double> read_series(const std::string& path) {
  std::ifstream in = open(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> out;
  std::optional<std::size_t> column;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split_csv(line);
    if (!column) {
      // Header detection: a non-numeric first row.
      double probe = 0.0;
      const auto& last = cells.back();
      const auto [ptr, ec] = std::from_chars(last.data(), last.data() + last.size(), probe);
      if (ec != std::errc() || ptr != last.data() + last.size()) {
        column = cells.size() - 1;
        for (std::size_t k = 0; k < cells.size(); ++k) {
          if (cells[k] == "u") column = k;
        }
        continue;
      }
      column = cells.size() - 1;
    }
    if (*column >= cells.size()) {
      throw FormatError("io", "line " + std::to_string(line_no) + ": missing column");
    }
    out.push_back(parse_double(cells[*column], line_no));
  }
  if (out.empty()) throw FormatError("io", "'" + path + "' has no values");
  return out;
}

Json to_json(const MomentReport& r) {
  return Json{{"mean", r.mean}, {"variance", r.variance}, {"third", r.third},
              {"fourth", r.fourth},
              {"kappa", r.kappa}, {"kurtosis", 2.0 * r.kappa + 1.0}};
}

Json to_json(const FisherReport& r, std::size_t samples) {
  Json j;
  j["fim"] = matrix_json(r.fim);
  j["fim_label"] = r.fim_is_bound ? "fisher information" : "approximation-model information";
  j["score_cov"] = matrix_json(r.score_cov);
  if (r.fim_is_bound) {
    j["crlb"] = matrix_json(r.crlb);
  } else {
    j["approximation_inverse"] = matrix_json(r.crlb);
  }
  j["ascov"] = matrix_json(r.ascov);
  if (r.gamma) j["gamma"] = *r.gamma;
  j["kappa_min"] = r.kappa_min;
  j["kappa_max"] = r.kappa_max;
  j["samples"] = samples;
  if (r.ascov.rows() == 1) {
    j["normalized_std"] = std::sqrt(r.ascov(0, 0) / static_cast<double>(samples));
  }
  return j;
}

Json to_json(const EstimateResult& r) {
  Json j;
  j["theta_hat"] = r.theta_hat;
  j["cost"] = r.cost;
  j["method"] = std::string(to_string(r.method));
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  if (r.bracket) j["bracket"] = {r.bracket->lower, r.bracket->upper};
  if (r.simplex_spread) j["simplex_spread"] = *r.simplex_spread;
  return j;
}

void write_table1_csv(std::ostream& out, const Table1& table, int digits) {
  out << "row";
  for (double s : table.noise_levels) out << ',' << format_number(s, digits);
  out << '\n';
  for (const auto& line : table.lines) {
    out << line.label;
    for (double v : line.values) out << ',' << format_number(v, digits);
    out << '\n';
  }
}

}  // namespace wienerlab::io
