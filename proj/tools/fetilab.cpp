#include "fetilab/experiment.hpp"
#include "fetilab/oracle.hpp"
#include "fetilab/output.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fetilab;

namespace {

ExperimentConfig load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig config = load_config(path);
  for (const auto& o : overrides) apply_override(config, o);
  config.validate();
  if (config.threads > 0) omp_set_num_threads(config.threads);
  return config;
}

std::string describe(const ExperimentResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s iterations=%d termination=%s global_residual=%.3e oracle_error=%.3e seconds=%.3f",
                r.validated ? "OK" : (r.converged ? "MISMATCH" : "NOT-CONVERGED"), r.iterations,
                to_string(r.termination).c_str(), r.history.empty() ? 0.0 : r.history.final().global_residual,
                r.oracle_error, r.seconds);
  return buf;
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides, std::string csv, std::string svg,
            std::string report) {
  ExperimentConfig config = load_with_overrides(path, overrides);
  if (csv.empty()) csv = config.csv_path;
  if (svg.empty()) svg = config.svg_path;
  if (report.empty()) report = config.report_path;

  const ExperimentResult result = run_experiment(config);
  const std::string label = config.name.empty() ? config.hash() : config.name;
  std::cout << label << ": " << describe(result) << "\n";
  if (!csv.empty()) write_text_file(csv, history_csv(result.history));
  if (!svg.empty()) write_text_file(svg, convergence_svg({{config.hash(), result.history}}, label));
  if (!report.empty()) {
    const std::vector<ReportRow> rows{make_report_row(result, label)};
    write_text_file(report, report_table(rows));
    write_text_file(report + ".csv", report_csv(rows));
  }
  return exit_status(result);
}

std::vector<std::vector<std::pair<std::string, std::string>>> expand(const std::vector<std::string>& vary) {
  std::vector<std::vector<std::pair<std::string, std::string>>> combos{{}};
  for (const auto& spec : vary) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--vary expects key=v1,v2,...");
    const std::string key = spec.substr(0, eq);
    std::vector<std::string> values;
    std::stringstream ss(spec.substr(eq + 1));
    std::string v;
    while (std::getline(ss, v, ','))
      if (!v.empty()) values.push_back(v);
    if (values.empty()) throw ConfigError("--vary " + key + " has no values");
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& c : combos)
      for (const auto& value : values) {
        auto extended = c;
        extended.emplace_back(key, value);
        next.push_back(std::move(extended));
      }
    combos = std::move(next);
  }
  return combos;
}

int cmd_compare(const std::string& path, const std::vector<std::string>& overrides, const std::vector<std::string>& vary,
                std::string svg, std::string report) {
  const ExperimentConfig base = load_with_overrides(path, overrides);
  if (svg.empty()) svg = base.svg_path;
  if (report.empty()) report = base.report_path;

  std::vector<ExperimentConfig> configs;
  std::vector<std::string> labels;
  for (const auto& combo : expand(vary)) {
    ExperimentConfig c = base;
    std::string label;
    for (const auto& [k, v] : combo) {
      apply_setting(c, k, v);
      label += (label.empty() ? "" : " ") + k + "=" + v;
    }
    c.validate();
    configs.push_back(std::move(c));
    labels.push_back(label.empty() ? "base" : label);
  }

  std::vector<ReportRow> rows;
  std::vector<Curve> curves;
  int status = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ExperimentResult r = run_experiment(configs[i]);
    rows.push_back(make_report_row(r, labels[i]));
    curves.push_back({configs[i].hash() + " " + labels[i], r.history});
    if (exit_status(r) != 0) status = 2;
  }
  const std::string table = report_table(rows);
  std::cout << table;
  if (!svg.empty()) write_text_file(svg, convergence_svg(curves, base.name.empty() ? "comparison" : base.name));
  if (!report.empty()) {
    write_text_file(report, table);
    write_text_file(report + ".csv", report_csv(rows));
  }
  return status;
}

int cmd_oracle(const std::string& path, const std::vector<std::string>& overrides, const std::string& out) {
  const ExperimentConfig config = load_with_overrides(path, overrides);
  const DecomposedProblem problem = build_problem(config);
  const OracleSolution sol = direct_oracle(problem);
  std::printf("dofs=%d subdomains=%d multipliers=%d residual=%.3e max|u|=%.10e\n",
              static_cast<int>(sol.u_global.size()), problem.num_subdomains(), problem.num_multipliers(),
              sol.residual, sol.u_global.cwiseAbs().maxCoeff());
  if (!out.empty()) {
    std::string text;
    char buf[64];
    for (Eigen::Index i = 0; i < sol.u_global.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g\n", sol.u_global[i]);
      text += buf;
    }
    write_text_file(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FETI / BDD domain decomposition laboratory"};
  app.require_subcommand(1);

  std::string config_path, csv, svg, report, oracle_out;
  std::vector<std::string> overrides, vary;

  auto* run = app.add_subcommand("run", "Run one experiment and validate it against the direct solver");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--override", overrides, "key=value, repeatable");
  run->add_option("--csv", csv, "Residual history CSV");
  run->add_option("--svg", svg, "Convergence plot");
  run->add_option("--report", report, "Report table (a .csv twin is written too)");

  auto* compare = app.add_subcommand("compare", "Run the cartesian product of --vary settings");
  compare->add_option("config", config_path, "Config file")->required();
  compare->add_option("--vary", vary, "key=v1,v2,..., repeatable");
  compare->add_option("--override", overrides, "key=value, repeatable");
  compare->add_option("--svg", svg, "Convergence plot with one curve per configuration");
  compare->add_option("--report", report, "Report table (a .csv twin is written too)");

  auto* oracle = app.add_subcommand("oracle", "Direct solve of the assembled system");
  oracle->add_option("config", config_path, "Config file")->required();
  oracle->add_option("--override", overrides, "key=value, repeatable");
  oracle->add_option("--out", oracle_out, "Write u_g, one value per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) return cmd_run(config_path, overrides, csv, svg, report);
    if (*compare) return cmd_compare(config_path, overrides, vary, svg, report);
    if (*oracle) return cmd_oracle(config_path, overrides, oracle_out);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
