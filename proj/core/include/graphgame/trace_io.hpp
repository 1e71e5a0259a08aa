#pragma once

#include <string>
#include <vector>

#include "graphgame/sim.hpp"

namespace graphgame {

/// Trace CSV rendered as a string. Header layout:
/// t, x_1..x_N, e_1..e_N, u_1..u_N, mu_1..mu_N, Wc_i_j..., Wa_i_j...,
/// theta_i_j..., delta_1..delta_N. Values carry 9 significant digits.
/// Vector states expand to x_<agent>_<component>.
std::string trace_to_csv(const TraceLog& log);

void write_trace(const TraceLog& log, const std::string& path);

/// Minimal CSV reader for round-trip checks: returns the header names
/// and all numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

/// Human-readable run summary: final formation errors, tail error peaks,
/// drift estimates, richness diagnostics, wall-clock time.
std::string render_report(const TraceLog& log, const SimConfig& cfg);
void write_report(const TraceLog& log, const SimConfig& cfg,
                  const std::string& path);

/// gnuplot script reproducing the standard figure set from a trace CSV:
/// states with desired trajectories, tracking errors, inputs and control
/// errors, weight and drift-parameter histories with true values dashed.
std::string render_plot_script(const TraceLog& log, const SimConfig& cfg,
                               const std::string& csv_name);
void emit_plot_script(const TraceLog& log, const SimConfig& cfg,
                      const std::string& csv_name, const std::string& path);

}  // namespace graphgame
