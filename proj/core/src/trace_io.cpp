#include "graphgame/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace graphgame {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string component_name(const std::string& base, int agent, int comp,
                           int n) {
  std::string name = base + "_" + std::to_string(agent + 1);
  if (n > 1) name += "_" + std::to_string(comp + 1);
  return name;
}

}  // namespace

std::string trace_to_csv(const TraceLog& log) {
  const int N = log.n_agents;
  if (N == 0) throw std::invalid_argument("trace log is empty");
  const int n = static_cast<int>(log.x.cols()) / N;

  std::string out;
  out += "t";
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < n; ++c) out += "," + component_name("x", i, c, n);
  for (int i = 0; i < N; ++i)
    for (int c = 0; c < n; ++c) out += "," + component_name("e", i, c, n);
  for (int i = 0; i < N; ++i) out += ",u_" + std::to_string(i + 1);
  for (int i = 0; i < N; ++i) out += ",mu_" + std::to_string(i + 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < log.w_c[i].cols(); ++j)
      out += ",Wc_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < log.w_a[i].cols(); ++j)
      out += ",Wa_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < log.theta[i].cols(); ++j)
      out += ",theta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
  for (int i = 0; i < N; ++i) out += ",delta_" + std::to_string(i + 1);
  out += "\n";

  for (int r = 0; r < log.rows(); ++r) {
    append_number(out, log.t[r]);
    auto emit_row = [&](const Matrix& m) {
      for (int c = 0; c < m.cols(); ++c) {
        out += ',';
        append_number(out, m(r, c));
      }
    };
    emit_row(log.x);
    emit_row(log.e);
    emit_row(log.u);
    emit_row(log.mu);
    for (int i = 0; i < N; ++i) emit_row(log.w_c[i]);
    for (int i = 0; i < N; ++i) emit_row(log.w_a[i]);
    for (int i = 0; i < N; ++i) emit_row(log.theta[i]);
    emit_row(log.delta);
    out += "\n";
  }
  return out;
}

void write_trace(const TraceLog& log, const std::string& path) {
  write_file(path, trace_to_csv(log));
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read csv: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size())
      throw std::runtime_error("ragged csv row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_report(const TraceLog& log, const SimConfig& cfg) {
  std::ostringstream out;
  out.precision(6);
  const int N = log.n_agents;
  const int rows = log.rows();
  out << "scenario: " << cfg.scenario << "\n";
  out << "status: " << (log.aborted ? "aborted: " + log.abort_reason : "ok")
      << "\n";
  out << "rows: " << rows << "\n";
  out << "wall_seconds: " << log.wall_seconds << "\n";
  if (rows == 0) return out.str();

  const double t_final = log.t.back();
  Vector x0;
  if (cfg.models.leader.trajectory) x0 = cfg.models.leader.trajectory(t_final);
  const int n = static_cast<int>(log.x.cols()) / N;
  const int tail_start = rows - std::max(1, rows / 4);

  for (int i = 0; i < N; ++i) {
    out << "agent " << (i + 1) << ":\n";
    if (x0.size() == n) {
      double ferr = 0.0;
      for (int c = 0; c < n; ++c)
        ferr = std::max(ferr, std::abs(log.x(rows - 1, i * n + c) -
                                       cfg.offsets[i](c) - x0(c)));
      out << "  final_formation_error: " << ferr << "\n";
    }
    double tail = 0.0;
    for (int r = tail_start; r < rows; ++r)
      for (int c = 0; c < n; ++c)
        tail = std::max(tail, std::abs(log.e(r, i * n + c)));
    out << "  max_abs_e_last_quarter: " << tail << "\n";
    out << "  theta_hat_final:";
    for (int j = 0; j < log.theta[i].cols(); ++j)
      out << " " << log.theta[i](rows - 1, j);
    out << "\n";
    out << "  grid_richness_rho_lower: " << log.rho_lower[i] << "\n";
    out << "  stack_rank_sigma_lower: " << log.sigma_lower[i] << "\n";
    if (!log.sg_error_max.empty())
      out << "  derivative_error_max: " << log.sg_error_max[i] << "\n";
    if (cfg.agents[i].theta_bound > 0.0 || cfg.agents[i].eps_bound > 0.0)
      out << "  prior_bounds: theta " << cfg.agents[i].theta_bound
          << ", eps " << cfg.agents[i].eps_bound << "\n";
    out << "  gamma_norm_max: " << log.gamma_norm_max[i]
        << " (cap " << log.gamma_norm_cap[i] << ")\n";
  }
  return out.str();
}

void write_report(const TraceLog& log, const SimConfig& cfg,
                  const std::string& path) {
  write_file(path, render_report(log, cfg));
}

std::string render_plot_script(const TraceLog& log, const SimConfig& cfg,
                               const std::string& csv_name) {
  std::ostringstream out;
  const int N = log.n_agents;
  out << "# gnuplot script generated by graphgame\n";
  out << "# renders the standard figure set from " << csv_name << "\n";
  out << "set datafile separator ','\n";
  out << "set terminal pngcairo size 900,600\n";
  out << "set key outside\n";
  out << "set xlabel 't [s]'\n";
  out << "set dummy t\n";  // expressions below are functions of time
  if (log.rows() == 0) {
    out << "# empty trace: nothing to plot\n";
    return out.str();
  }
  const int n = static_cast<int>(log.x.cols()) / N;

  // 1-based CSV column offsets.
  const int col_x = 2;
  const int col_e = col_x + N * n;
  const int col_u = col_e + N * n;
  const int col_mu = col_u + N;
  int col = col_mu + N;
  std::vector<int> col_wc(N), col_wa(N), col_theta(N);
  for (int i = 0; i < N; ++i) {
    col_wc[i] = col;
    col += static_cast<int>(log.w_c[i].cols());
  }
  for (int i = 0; i < N; ++i) {
    col_wa[i] = col;
    col += static_cast<int>(log.w_a[i].cols());
  }
  for (int i = 0; i < N; ++i) {
    col_theta[i] = col;
    col += static_cast<int>(log.theta[i].cols());
  }

  out << "\nset output 'fig_states.png'\n";
  out << "set title 'Agent states and desired trajectories'\n";
  out << "plot \\\n";
  for (int i = 0; i < N; ++i) {
    out << "  '" << csv_name << "' using 1:" << (col_x + i * n)
        << " with lines title 'x_" << (i + 1) << "'";
    out << (i + 1 < N || !cfg.leader_formula.empty() ? ", \\\n" : "\n");
  }
  if (!cfg.leader_formula.empty()) {
    for (int i = 0; i < N; ++i) {
      out << "  " << cfg.offsets[i](0) << " + " << cfg.leader_formula
          << " with lines dashtype 2 lc rgb 'gray' title "
          << (i == 0 ? "'desired'" : "''");
      out << (i + 1 < N ? ", \\\n" : "\n");
    }
  }

  out << "\nset output 'fig_errors.png'\n";
  out << "set title 'Neighborhood tracking errors'\n";
  out << "plot \\\n";
  for (int i = 0; i < N; ++i) {
    out << "  '" << csv_name << "' using 1:" << (col_e + i * n)
        << " with lines title 'e_" << (i + 1) << "'";
    out << (i + 1 < N ? ", \\\n" : "\n");
  }

  out << "\nset output 'fig_controls.png'\n";
  out << "set multiplot layout 2,1 title 'Inputs and control errors'\n";
  out << "set title 'u_i'\n";
  out << "plot \\\n";
  for (int i = 0; i < N; ++i) {
    out << "  '" << csv_name << "' using 1:" << (col_u + i)
        << " with lines title 'u_" << (i + 1) << "'";
    out << (i + 1 < N ? ", \\\n" : "\n");
  }
  out << "set title 'mu_i'\n";
  out << "plot \\\n";
  for (int i = 0; i < N; ++i) {
    out << "  '" << csv_name << "' using 1:" << (col_mu + i)
        << " with lines title 'mu_" << (i + 1) << "'";
    out << (i + 1 < N ? ", \\\n" : "\n");
  }
  out << "unset multiplot\n";

  out << "\nset output 'fig_weights.png'\n";
  out << "set multiplot layout 2,1 title 'Learned weights'\n";
  out << "set title 'Value weights'\n";
  out << "plot \\\n";
  bool first = true;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < log.w_c[i].cols(); ++j) {
      if (!first) out << ", \\\n";
      first = false;
      out << "  '" << csv_name << "' using 1:" << (col_wc[i] + j)
          << " with lines title 'Wc_" << (i + 1) << "_" << (j + 1) << "'";
    }
  }
  out << "\n";
  out << "set title 'Drift parameter estimates (true values dashed)'\n";
  out << "plot \\\n";
  first = true;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < log.theta[i].cols(); ++j) {
      if (!first) out << ", \\\n";
      first = false;
      out << "  '" << csv_name << "' using 1:" << (col_theta[i] + j)
          << " with lines title 'theta_" << (i + 1) << "_" << (j + 1) << "'";
    }
  }
  if (!cfg.theta_true.empty()) {
    for (size_t i = 0; i < cfg.theta_true.size(); ++i) {
      const Matrix& th = cfg.theta_true[i];
      for (int r = 0; r < th.rows(); ++r)
        for (int c = 0; c < th.cols(); ++c)
          out << ", \\\n  " << th(r, c)
              << " with lines dashtype 2 lc rgb 'gray' title ''";
    }
  }
  out << "\nunset multiplot\n";
  return out.str();
}

void emit_plot_script(const TraceLog& log, const SimConfig& cfg,
                      const std::string& csv_name, const std::string& path) {
  write_file(path, render_plot_script(log, cfg, csv_name));
}

}  // namespace graphgame
