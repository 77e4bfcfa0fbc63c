#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "abswit/criteria.hpp"
#include "abswit/io.hpp"
#include "abswit/loophole.hpp"
#include "abswit/random.hpp"
#include "abswit/states.hpp"
#include "abswit/witness.hpp"

// Config-driven jobs behind the CLI subcommands: state classification, (b,p)
// boundary scans, witness-value curves with detection thresholds, and
// detector-inefficiency tables. Grid points are evaluated on independent
// workers; rows are buffered and emitted in grid order, so output bytes do not
// depend on the worker count.

namespace abswit {

struct RunOptions {
  int threads = 1;
  std::uint64_t seed = 0;
  std::string format = "csv";  // "csv" or "json"
};

struct JobResult {
  std::string file_text;   // text destined for the output file
  nlohmann::json report;   // side results (thresholds, critical efficiencies)
};

namespace detail {

inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  const int workers = static_cast<int>(std::min<std::size_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ConfigError(std::string("missing or non-numeric \"") + key + "\"");
  }
  return j.at(key).get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError(std::string("missing or non-string \"") + key + "\"");
  }
  return j.at(key).get<std::string>();
}

}  // namespace detail

struct Grid {
  double min = 0.0;
  double max = 0.0;
  int steps = 0;  // number of grid points, endpoints included

  std::vector<double> points() const {
    std::vector<double> p(steps);
    for (int i = 0; i < steps; ++i) {
      p[i] = steps == 1 ? min : min + (max - min) * i / (steps - 1);
    }
    return p;
  }
};

inline Grid parse_grid(const nlohmann::json& config, const char* key) {
  if (!config.contains(key)) {
    throw ConfigError(std::string("missing \"") + key + "\"");
  }
  const auto& j = config.at(key);
  Grid g;
  g.min = detail::require_number(j, "min");
  g.max = detail::require_number(j, "max");
  g.steps = static_cast<int>(detail::require_number(j, "steps"));
  if (!(std::isfinite(g.min) && std::isfinite(g.max) && g.min <= g.max) || g.steps < 2) {
    throw ConfigError(std::string("\"") + key + "\": need finite min <= max and steps >= 2");
  }
  return g;
}

inline UnitaryOperator parse_unitary(const nlohmann::json& j) {
  const std::string name = detail::require_string(j, "name");
  if (name == "u_2q") {
    return u_2q();
  }
  if (name == "u_pauli_2x4" || name == "u_pauli_3x3") {
    const double phi1 = detail::require_number(j, "phi1");
    const double phi2 = detail::require_number(j, "phi2");
    constexpr double kPi = 3.14159265358979323846;
    if (!(phi1 >= 0.0 && phi1 <= kPi) || !(phi2 >= 0.0 && phi2 <= 2.0 * kPi)) {
      throw ConfigError("unitary angles outside phi1 in [0, pi], phi2 in [0, 2 pi]");
    }
    return name == "u_pauli_2x4" ? u_pauli_2x4(phi1, phi2) : u_pauli_3x3(phi1, phi2);
  }
  if (name == "u_appendix") {
    const int dim = static_cast<int>(detail::require_number(j, "dim"));
    if (dim != 8 && dim != 9) throw ConfigError("u_appendix dim must be 8 or 9");
    return u_appendix(dim);
  }
  throw ConfigError("unknown unitary \"" + name + "\"");
}

// A ket is given as {"re": [...], "im": [...]} (amplitudes, normalized on parse),
// {"angles": [...]} (hyperspherical), {"basis_state": k} or {"random": true}.
inline Ket parse_ket(const nlohmann::json& j, BipartiteDims dims, Rng& rng) {
  if (!j.is_object()) throw ConfigError("ket spec must be an object");
  const int d = dims.total();
  if (j.contains("re")) {
    const auto& re = j.at("re");
    if (!re.is_array() || static_cast<int>(re.size()) != d) {
      throw ConfigError("ket \"re\" must have " + std::to_string(d) + " entries");
    }
    ComplexVector v(d);
    for (int i = 0; i < d; ++i) v(i) = re.at(i).get<double>();
    if (j.contains("im")) {
      const auto& im = j.at("im");
      if (!im.is_array() || static_cast<int>(im.size()) != d) {
        throw ConfigError("ket \"im\" must have " + std::to_string(d) + " entries");
      }
      for (int i = 0; i < d; ++i) v(i) += Complex(0.0, im.at(i).get<double>());
    }
    try {
      return Ket(dims, std::move(v));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("angles")) {
    std::vector<double> angles = j.at("angles").get<std::vector<double>>();
    try {
      return hyperspherical_ket(angles, dims);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("basis_state")) {
    const int k = j.at("basis_state").get<int>();
    if (k < 0 || k >= d) throw ConfigError("basis_state outside [0, " + std::to_string(d) + ")");
    return basis_ket(dims, k);
  }
  if (j.value("random", false)) {
    return random_ket(dims, rng);
  }
  throw ConfigError("ket spec needs \"re\", \"angles\", \"basis_state\" or \"random\"");
}

inline std::vector<Ket> parse_basis(const nlohmann::json& j, BipartiteDims dims, Rng& rng) {
  const int d = dims.total();
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    std::vector<Ket> basis;
    if (name == "computational") {
      for (int k = 0; k < d; ++k) basis.push_back(basis_ket(dims, k));
      return basis;
    }
    if (name == "computational_phase") {
      const Complex phase = Complex(1.0, 1.0) / std::sqrt(2.0);
      for (int k = 0; k < d; ++k) {
        ComplexVector v = ComplexVector::Zero(d);
        v(k) = phase;
        basis.emplace_back(dims, std::move(v));
      }
      return basis;
    }
    if (name == "bell") {
      if (!(dims == BipartiteDims(2, 2))) throw ConfigError("bell basis requires 2x2 dims");
      const auto bell = [&](int i, int k, double sign) {
        ComplexVector v = ComplexVector::Zero(4);
        v(i) = 1.0;
        v(k) = sign;
        return Ket(dims, std::move(v));
      };
      basis.push_back(bell(0, 3, 1.0));
      basis.push_back(bell(0, 3, -1.0));
      basis.push_back(bell(1, 2, 1.0));
      basis.push_back(bell(1, 2, -1.0));
      return basis;
    }
    if (name == "random") {
      const UnitaryOperator u = random_unitary(d, rng);
      for (int k = 0; k < d; ++k) basis.emplace_back(dims, ComplexVector(u.matrix.col(k)));
      return basis;
    }
    throw ConfigError("unknown basis \"" + name + "\"");
  }
  if (j.is_array()) {
    std::vector<Ket> basis;
    for (const auto& item : j) basis.push_back(parse_ket(item, dims, rng));
    return basis;
  }
  throw ConfigError("basis must be a name or an array of ket specs");
}

struct FamilySpec {
  std::string name;
  BipartiteDims dims;
  StateFamily at;  // noise parameter p -> state
};

// Families with all non-noise parameters fixed, for witness curves.
inline FamilySpec parse_family_fixed(const nlohmann::json& j) {
  const std::string name = detail::require_string(j, "name");
  try {
    if (name == "gen_werner") {
      const double alpha = detail::require_number(j, "alpha");
      const double phase = j.value("phase", 0.0);
      return {name, BipartiteDims(2, 2),
              [alpha, phase](double p) { return gen_werner(p, alpha, phase); }};
    }
    if (name == "rho2") {
      const double b = detail::require_number(j, "b");
      horodecki_2x4(b);  // validate b now, not at first grid point
      return {name, BipartiteDims(2, 4), [b](double p) { return rho2(b, p); }};
    }
    if (name == "rho3") {
      const double b = detail::require_number(j, "b");
      horodecki_3x3(b);
      return {name, BipartiteDims(3, 3), [b](double p) { return rho3(b, p); }};
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown family \"" + name + "\"");
}

namespace detail {

inline void require_job(const nlohmann::json& config, const char* expected) {
  if (config.contains("job") && config.at("job").get<std::string>() != expected) {
    throw ConfigError(std::string("config \"job\" is not \"") + expected + "\"");
  }
}

// Sign-change bisection over [0, 1] for boundary scans; absent when the margin
// does not change sign. Keeps halving past the width target until the returned
// point also re-evaluates to within 1e-8 of zero.
inline std::optional<double> bisect_unit_interval(const std::function<double(double)>& f,
                                                  double p_tol) {
  double lo = 0.0, hi = 1.0;
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) return std::nullopt;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if ((hi - lo <= p_tol && std::abs(f_mid) <= 1e-8) || hi - lo <= 1e-15) break;
  }
  return mid;
}

// Positive once the state has left the absolutely separable / absolutely PPT set.
inline double non_abs_margin(const DensityOperator& rho) {
  if (rho.dims.a == 2) {
    return as_margin_2xn(rho);
  }
  const auto [det1, det2] = absppt_margins_3xn(rho);
  return -std::min(det1, det2);
}

inline double min_pt_eig_after(const UnitaryOperator& u, const DensityOperator& rho) {
  return min_eigpair(partial_transpose(u.matrix * rho.matrix * u.matrix.adjoint(), rho.dims))
      .value;
}

}  // namespace detail

// One row of the (b, p)-plane boundary scan: the absolute/non-absolute boundary
// and the smallest p at which the conjugated state turns NPPT, for the main
// unitary and for the first/last-mixing one. NPPT-after-conjugation implies
// non-absolutely-PPT and the first/last mixer is the weaker map, so the present
// fields must be ordered p_abs <= p_nppt_u <= p_nppt_u1; rows are checked before
// they are emitted.
struct BoundaryRow {
  double b = 0.0;
  std::optional<double> p_abs;
  std::optional<double> p_nppt_u;
  std::optional<double> p_nppt_u1;
};

inline JobResult run_scan_boundary(const nlohmann::json& config, const RunOptions& opt) {
  detail::require_job(config, "scan-boundary");
  if (!config.contains("family")) throw ConfigError("missing \"family\"");
  const std::string family = detail::require_string(config.at("family"), "name");
  if (family != "rho2" && family != "rho3") {
    throw ConfigError("scan-boundary family must be rho2 or rho3");
  }
  const bool qubit_side = family == "rho2";
  const Grid b_grid = parse_grid(config, "b_grid");
  const double b_lo = qubit_side ? 0.0 : 1.0;
  const double b_hi = qubit_side ? 1.0 : 4.0;
  if (b_grid.min < b_lo || b_grid.max > b_hi) {
    throw ConfigError("b_grid outside the family range [" + format_value(b_lo) + ", " +
                      format_value(b_hi) + "]");
  }
  const double p_tol = config.value("p_tol", 1e-6);
  if (!(p_tol > 0.0 && p_tol < 1.0)) throw ConfigError("p_tol must be in (0, 1)");
  if (!config.contains("unitary")) throw ConfigError("missing \"unitary\"");
  const UnitaryOperator u = parse_unitary(config.at("unitary"));
  const int dim = qubit_side ? 8 : 9;
  if (u.matrix.rows() != dim) {
    throw ConfigError("unitary dimension does not match the family");
  }
  const bool with_u1 = config.value("u1", true);
  const UnitaryOperator u1 = u_appendix(dim);

  const auto state_at = [&](double b, double p) {
    return qubit_side ? rho2(b, p) : rho3(b, p);
  };

  const std::vector<double> bs = b_grid.points();
  std::vector<BoundaryRow> rows(bs.size());
  detail::parallel_for(bs.size(), opt.threads, [&](std::size_t i) {
    const double b = bs[i];
    BoundaryRow row;
    row.b = b;
    row.p_abs = detail::bisect_unit_interval(
        [&](double p) { return detail::non_abs_margin(state_at(b, p)); }, p_tol);
    row.p_nppt_u = detail::bisect_unit_interval(
        [&](double p) { return detail::min_pt_eig_after(u, state_at(b, p)); }, p_tol);
    if (with_u1) {
      row.p_nppt_u1 = detail::bisect_unit_interval(
          [&](double p) { return detail::min_pt_eig_after(u1, state_at(b, p)); }, p_tol);
    }
    if (row.p_abs && row.p_nppt_u && !(*row.p_abs <= *row.p_nppt_u)) {
      throw NumericError("boundary containment violated at b = " + format_value(b) +
                         ": p_abs > p_nppt_u");
    }
    if (row.p_nppt_u && row.p_nppt_u1 && !(*row.p_nppt_u <= *row.p_nppt_u1)) {
      throw NumericError("boundary containment violated at b = " + format_value(b) +
                         ": p_nppt_u > p_nppt_u1");
    }
    if (row.p_abs && row.p_nppt_u1 && !(*row.p_abs <= *row.p_nppt_u1)) {
      throw NumericError("boundary containment violated at b = " + format_value(b) +
                         ": p_abs > p_nppt_u1");
    }
    rows[i] = std::move(row);
  });

  CsvTable table;
  table.columns = {"b", "p_abs", "p_nppt_u"};
  if (with_u1) table.columns.push_back("p_nppt_u1");
  for (const BoundaryRow& row : rows) {
    std::vector<std::optional<double>> cells{row.b, row.p_abs, row.p_nppt_u};
    if (with_u1) cells.push_back(row.p_nppt_u1);
    table.rows.push_back(std::move(cells));
  }
  JobResult result;
  result.file_text = opt.format == "json" ? table.to_json().dump(2) + "\n" : table.to_csv();
  return result;
}

inline JobResult run_witness_curve(const nlohmann::json& config, const RunOptions& opt) {
  detail::require_job(config, "witness-curve");
  if (!config.contains("family")) throw ConfigError("missing \"family\"");
  const FamilySpec family = parse_family_fixed(config.at("family"));
  if (!config.contains("unitary")) throw ConfigError("missing \"unitary\"");
  const UnitaryOperator u = parse_unitary(config.at("unitary"));
  if (u.matrix.rows() != family.dims.total()) {
    throw ConfigError("unitary dimension does not match the family");
  }
  const Grid p_grid = parse_grid(config, "p_grid");
  if (p_grid.min < 0.0 || p_grid.max > 1.0) throw ConfigError("p_grid outside [0, 1]");

  Rng rng(opt.seed);
  struct Curve {
    std::string label;
    WitnessFunctional eval;
  };
  std::vector<Curve> curves;
  if (!config.contains("curves") || !config.at("curves").is_array() ||
      config.at("curves").empty()) {
    throw ConfigError("missing non-empty \"curves\" array");
  }
  for (const auto& jc : config.at("curves")) {
    const std::string functional = detail::require_string(jc, "functional");
    const std::string label = jc.value("label", functional);
    if (!jc.contains("phi")) throw ConfigError("curve \"" + label + "\" missing \"phi\"");
    WitnessSpec base(u, parse_ket(jc.at("phi"), family.dims, rng));
    if (functional == "linear") {
      curves.push_back({label, [spec = std::move(base)](const DensityOperator& rho) {
                          return eval_linear(spec, rho);
                        }});
    } else if (functional == "F1") {
      if (!jc.contains("psi")) throw ConfigError("curve \"" + label + "\" missing \"psi\"");
      NonlinearSpec spec{std::move(base), F1Mode{parse_ket(jc.at("psi"), family.dims, rng)}};
      curves.push_back({label, [spec = std::move(spec)](const DensityOperator& rho) {
                          return eval_F1(spec, rho);
                        }});
    } else if (functional == "F2") {
      if (!jc.contains("basis")) throw ConfigError("curve \"" + label + "\" missing \"basis\"");
      NonlinearSpec spec{std::move(base), F2Mode{parse_basis(jc.at("basis"), family.dims, rng)}};
      curves.push_back({label, [spec = std::move(spec)](const DensityOperator& rho) {
                          return eval_F2(spec, rho);
                        }});
    } else {
      throw ConfigError("unknown functional \"" + functional + "\"");
    }
  }

  const std::vector<double> ps = p_grid.points();
  std::vector<std::vector<double>> values(ps.size(), std::vector<double>(curves.size()));
  detail::parallel_for(ps.size(), opt.threads, [&](std::size_t i) {
    const DensityOperator rho = family.at(ps[i]);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      values[i][c] = curves[c].eval(rho);
    }
  });

  // Detection threshold from the first sign change along the grid, refined by
  // bisection; null when the curve never changes sign.
  nlohmann::json thresholds = nlohmann::json::object();
  for (std::size_t c = 0; c < curves.size(); ++c) {
    std::optional<double> crossing;
    for (std::size_t i = 0; i + 1 < ps.size() && !crossing; ++i) {
      if (values[i][c] == 0.0) {
        crossing = ps[i];
      } else if ((values[i][c] > 0.0) != (values[i + 1][c] > 0.0)) {
        crossing = detection_threshold(family.at, curves[c].eval, ps[i], ps[i + 1]);
      }
    }
    if (!crossing && !ps.empty() && values.back()[c] == 0.0) crossing = ps.back();
    thresholds[curves[c].label] = crossing ? nlohmann::json(*crossing) : nlohmann::json(nullptr);
  }

  CsvTable table;
  table.columns.push_back("p");
  for (const Curve& curve : curves) table.columns.push_back(curve.label);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::vector<std::optional<double>> cells;
    cells.emplace_back(ps[i]);
    for (std::size_t c = 0; c < curves.size(); ++c) cells.emplace_back(values[i][c]);
    table.rows.push_back(std::move(cells));
  }

  JobResult result;
  result.report = nlohmann::json{{"thresholds", thresholds}};
  if (opt.format == "json") {
    nlohmann::json out{{"rows", table.to_json()}, {"thresholds", thresholds}};
    result.file_text = out.dump(2) + "\n";
  } else {
    result.file_text = table.to_csv();
  }
  return result;
}

inline JobResult run_loophole(const nlohmann::json& config, const RunOptions& opt) {
  detail::require_job(config, "loophole");
  const double c0 = detail::require_number(config, "c0");
  const double s_eff = detail::require_number(config, "s_eff");
  if (!(s_eff > 0.0)) throw ConfigError("s_eff must be positive");
  if (!config.contains("etas") || !config.at("etas").is_array() || config.at("etas").empty()) {
    throw ConfigError("missing non-empty \"etas\" array");
  }
  const std::vector<double> etas = config.at("etas").get<std::vector<double>>();
  for (double eta : etas) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta outside (0, 1]");
  }
  const Grid x_grid = parse_grid(config, "x_grid");
  if (x_grid.min < 0.0) throw ConfigError("x_grid must be nonnegative");

  const std::vector<double> xs = x_grid.points();
  std::vector<std::vector<double>> values(xs.size(), std::vector<double>(etas.size()));
  detail::parallel_for(xs.size(), opt.threads, [&](std::size_t i) {
    for (std::size_t e = 0; e < etas.size(); ++e) {
      values[i][e] = wup(c0, etas[e], s_eff, xs[i]);
    }
  });

  nlohmann::json report = nlohmann::json::object();
  if (config.contains("critical")) {
    const auto& jc = config.at("critical");
    const double assumed = jc.value("assumed_measured", 0.0);
    nlohmann::json solutions = nlohmann::json::array();
    if (jc.contains("x_values")) {
      for (double x : jc.at("x_values").get<std::vector<double>>()) {
        nlohmann::json entry{{"x_nl", x}};
        try {
          entry["eta"] = critical_eta_nonlinear(c0, s_eff, x, assumed);
        } catch (const NoRoot&) {
          entry["eta"] = nullptr;
        }
        solutions.push_back(std::move(entry));
      }
    }
    report["critical_eta"] = std::move(solutions);
  }

  CsvTable table;
  table.columns.push_back("x_nl");
  for (double eta : etas) table.columns.push_back("wup_eta_" + format_value(eta));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<std::optional<double>> cells;
    cells.emplace_back(xs[i]);
    for (std::size_t e = 0; e < etas.size(); ++e) cells.emplace_back(values[i][e]);
    table.rows.push_back(std::move(cells));
  }

  JobResult result;
  result.report = std::move(report);
  if (opt.format == "json") {
    nlohmann::json out{{"rows", table.to_json()}};
    if (!result.report.empty()) out["critical_eta"] = result.report["critical_eta"];
    result.file_text = out.dump(2) + "\n";
  } else {
    result.file_text = table.to_csv();
  }
  return result;
}

inline nlohmann::json run_classify(const nlohmann::json& matrix_json) {
  const DensityOperator rho = density_from_json(matrix_json);
  const auto [cls, report] = classify(rho);
  nlohmann::json out = report_to_json(cls, report);
  out["dims"] = {rho.dims.a, rho.dims.b};
  return out;
}

}  // namespace abswit
