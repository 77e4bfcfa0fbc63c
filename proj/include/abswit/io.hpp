#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "abswit/criteria.hpp"
#include "abswit/states.hpp"

// File formats: the JSON matrix format {"dims": [dA, dB], "re": [[...]], "im": [[...]]}
// (row-major, "im" optional) and the CSV table emitted by the scan commands
// (header row, '.' decimal separator, 12 significant digits, empty cells for
// absent values).

namespace abswit {

// Malformed input: bad JSON, missing keys, wrong shapes, out-of-range job
// parameters. Distinct from NumericError so the CLI can map it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path);
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline DensityOperator density_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("re")) {
    throw ConfigError("matrix object needs \"dims\" and \"re\"");
  }
  const auto& jd = j.at("dims");
  if (!jd.is_array() || jd.size() != 2) {
    throw ConfigError("\"dims\" must be [dA, dB]");
  }
  BipartiteDims dims;
  try {
    dims = BipartiteDims(jd.at(0).get<int>(), jd.at(1).get<int>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const int d = dims.total();
  const auto read_part = [&](const char* key, bool required) {
    std::vector<std::vector<double>> rows;
    if (!j.contains(key)) {
      if (required) throw ConfigError(std::string("matrix object needs \"") + key + "\"");
      rows.assign(d, std::vector<double>(d, 0.0));
      return rows;
    }
    const auto& jp = j.at(key);
    if (!jp.is_array() || static_cast<int>(jp.size()) != d) {
      throw ConfigError(std::string("\"") + key + "\" must be a " + std::to_string(d) + "x" +
                        std::to_string(d) + " array");
    }
    for (const auto& jrow : jp) {
      if (!jrow.is_array() || static_cast<int>(jrow.size()) != d) {
        throw ConfigError(std::string("\"") + key + "\" must be a " + std::to_string(d) + "x" +
                          std::to_string(d) + " array");
      }
      std::vector<double> row;
      for (const auto& cell : jrow) {
        if (!cell.is_number()) throw ConfigError(std::string("\"") + key + "\": non-numeric entry");
        row.push_back(cell.get<double>());
      }
      rows.push_back(std::move(row));
    }
    return rows;
  };
  const auto re = read_part("re", true);
  const auto im = read_part("im", false);
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      m(i, k) = Complex(re[i][k], im[i][k]);
    }
  }
  return DensityOperator(dims, std::move(m));
}

inline nlohmann::json density_to_json(const DensityOperator& rho) {
  const int d = rho.dims.total();
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (int i = 0; i < d; ++i) {
    nlohmann::json re_row = nlohmann::json::array();
    nlohmann::json im_row = nlohmann::json::array();
    for (int k = 0; k < d; ++k) {
      re_row.push_back(rho.matrix(i, k).real());
      im_row.push_back(rho.matrix(i, k).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return nlohmann::json{{"dims", {rho.dims.a, rho.dims.b}}, {"re", std::move(re)},
                        {"im", std::move(im)}};
}

// 12 significant digits, C locale semantics.
inline std::string format_value(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  std::string to_csv() const {
    std::ostringstream os;
    for (size_t c = 0; c < columns.size(); ++c) {
      if (c) os << ',';
      os << columns[c];
    }
    os << '\n';
    for (const auto& row : rows) {
      for (size_t c = 0; c < row.size(); ++c) {
        if (c) os << ',';
        if (row[c]) os << format_value(*row[c]);
      }
      os << '\n';
    }
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
      nlohmann::json obj = nlohmann::json::object();
      for (size_t c = 0; c < row.size(); ++c) {
        if (row[c]) {
          obj[columns[c]] = *row[c];
        } else {
          obj[columns[c]] = nullptr;
        }
      }
      out.push_back(std::move(obj));
    }
    return out;
  }
};

inline nlohmann::json report_to_json(StateClass cls, const CriterionReport& report) {
  nlohmann::json jr{{"min_pt_eig", report.min_pt_eig}};
  if (report.margin_2xn) jr["margin_2xn"] = *report.margin_2xn;
  if (report.det1_3xn) jr["det1_3xn"] = *report.det1_3xn;
  if (report.det2_3xn) jr["det2_3xn"] = *report.det2_3xn;
  return nlohmann::json{{"class", to_string(cls)}, {"report", std::move(jr)}};
}

}  // namespace abswit
