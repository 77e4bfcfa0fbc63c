#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "abswit/scan.hpp"

// Command-line front end: classify a state from a matrix file, scan (b,p)-plane
// boundaries, trace witness-value curves, and tabulate detector-inefficiency
// bounds. Exit codes: 0 success, 2 config/parse error, 3 numerical-invariant
// violation.

namespace {

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw abswit::ConfigError("cannot write " + path);
  }
  out << text;
}

struct CliArgs {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  int threads = 1;
  std::uint64_t seed = 0;
  std::string classify_input;
};

int dispatch(const CLI::App& app, const CliArgs& args) {
  abswit::RunOptions opt;
  opt.threads = args.threads;
  opt.seed = args.seed;
  opt.format = args.format;

  if (app.got_subcommand("classify")) {
    const nlohmann::json matrix = abswit::read_json_file(args.classify_input);
    const nlohmann::json report = abswit::run_classify(matrix);
    write_output(args.out_path, report.dump(2) + "\n");
    return 0;
  }

  if (args.config_path.empty()) {
    throw abswit::ConfigError("this subcommand requires --config <file>");
  }
  const nlohmann::json config = abswit::read_json_file(args.config_path);
  abswit::JobResult result;
  if (app.got_subcommand("scan-boundary")) {
    result = abswit::run_scan_boundary(config, opt);
  } else if (app.got_subcommand("witness-curve")) {
    result = abswit::run_witness_curve(config, opt);
  } else {
    result = abswit::run_loophole(config, opt);
  }

  std::string out_path = args.out_path;
  if (out_path.empty()) out_path = config.value("output", std::string());
  write_output(out_path, result.file_text);
  if (!result.report.is_null() && !result.report.empty()) {
    std::cout << result.report.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Witness toolkit for non-absolutely separable / non-absolutely PPT states"};
  app.require_subcommand(1);
  app.fallthrough();

  CliArgs args;
  app.add_option("--config", args.config_path, "job description file (JSON)");
  app.add_option("--out", args.out_path, "output path (overrides the config's \"output\")");
  app.add_option("--format", args.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--threads", args.threads, "worker threads for grid evaluation")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.add_option("--seed", args.seed, "seed for random-sample spec demos")
      ->capture_default_str();

  CLI::App* classify = app.add_subcommand(
      "classify", "classify a state from a matrix file (NPPT / PPT_NOT_ABS / ABS_PPT)");
  classify->add_option("input", args.classify_input,
                       "matrix file {\"dims\": [dA, dB], \"re\": [[...]], \"im\": [[...]]}")
      ->required();
  classify->footer("Prints the state class and the evaluated criterion margins as JSON.");

  app.add_subcommand("scan-boundary", "scan the (b,p)-plane boundaries of a noise family")
      ->footer(
          "CSV columns: b; p_abs, the absolute/non-absolute boundary; p_nppt_u, the\n"
          "smallest p at which the configured unitary turns the state NPPT; p_nppt_u1,\n"
          "the same for the first/last-mixing unitary. Empty cells mean no sign change\n"
          "in (0, 1].");

  app.add_subcommand("witness-curve", "witness values along a one-parameter state family")
      ->footer(
          "CSV columns: p, then one column per configured curve with the witness value\n"
          "at p. Detection thresholds (zero crossings, or null) are printed to stdout\n"
          "as JSON.");

  app.add_subcommand("loophole", "detector-inefficiency upper bounds")
      ->footer(
          "CSV columns: x_nl, then one column wup_eta_<eta> per configured eta with the\n"
          "measured-value upper bound at that nonlinearity magnitude.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return dispatch(app, args);
  } catch (const abswit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const abswit::NumericError& e) {
    std::cerr << "numerical invariant violation: " << e.what() << "\n";
    return 3;
  }
}
