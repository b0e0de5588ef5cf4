#pragma once

#include "fetilab/experiment.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace fetilab {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One line of an iteration-count comparison.
struct ReportRow {
  std::string label;
  std::string hash;
  int iterations = 0;
  double log10_initial_residual = 0.0;
  bool converged = false;
  bool validated = false;
  double oracle_error = 0.0;
};

ReportRow make_report_row(const ExperimentResult& result, const std::string& label);

/// `iter,interface_residual,global_residual,seconds` plus one row per entry.
std::string history_csv(const ResidualHistory& history);

struct Curve {
  std::string label;
  ResidualHistory history;
};

/// Log-scale plot of the global residual against the iteration index.
std::string convergence_svg(const std::vector<Curve>& curves, const std::string& title);

std::string report_table(const std::vector<ReportRow>& rows);
std::string report_csv(const std::vector<ReportRow>& rows);

/// Throws OutputError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fetilab
