#pragma once

// Output emission: radial profile tables, sweep summaries, solver reports,
// and gnuplot scripts over those files.  All writers are deterministic
// (fixed column schema, fixed 12-significant-digit formatting) so repeated
// runs of the same build and config produce byte-identical artifacts.

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "canm.hpp"
#include "config.hpp"
#include "model.hpp"

namespace bfstar {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// 12 significant digits, scientific; the common format of all tables.
inline std::string fmt(double x) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(11) << x;
  return os.str();
}

}  // namespace detail

// Frequency rescaled to the asymptotic time coordinate: Omega e^{-nu(0)/2}.
inline double asymptotic_frequency(const FieldState& state) {
  return state.pair.omega * std::exp(-0.5 * state.y.value(0)[0]);
}

// Radial profile table: one row per grid node with columns
// x, nu, phi, sigma, mu, exp(lambda); full configuration and the spectral
// pair in the commented header.
inline void write_profile(std::ostream& out, const FieldState& state, const SolveReport& report,
                          const RunConfig& cfg) {
  const Grid& grid = state.y.grid();
  out << "# mixed boson-fermion star: radial profile\n";
  out << "# sigma_c = " << detail::fmt(cfg.params.sigma_c) << "\n";
  out << "# mu_c = " << detail::fmt(cfg.params.mu_c) << "\n";
  out << "# lambda = " << detail::fmt(cfg.params.lambda) << "\n";
  out << "# gamma = " << detail::fmt(cfg.params.gamma) << "\n";
  out << "# b = " << detail::fmt(cfg.params.b) << "\n";
  out << "# n = " << grid.intervals() << "\n";
  out << "# x_inf = " << detail::fmt(grid.x_inf()) << "\n";
  out << "# grading = " << (cfg.numerics.grading == Grading::uniform ? "uniform" : "condensed")
      << "\n";
  out << "# eps = " << detail::fmt(cfg.numerics.eps) << "\n";
  out << "# r_s = " << detail::fmt(state.pair.r_s) << "\n";
  out << "# omega = " << detail::fmt(state.pair.omega) << "\n";
  out << "# nu_center = " << detail::fmt(state.y.value(0)[0]) << "\n";
  out << "# omega_hat = " << detail::fmt(asymptotic_frequency(state)) << "\n";
  out << "# iterations = " << report.iterations << "\n";
  out << "# converged = " << (report.converged ? "true" : "false") << "\n";
  out << "# columns: x nu phi sigma mu exp_lambda\n";
  for (int i = 0; i < grid.node_count(); ++i) {
    const double x = grid.node(i);
    const Vec3& y = state.y.value(i);
    const double mu = state.mu[static_cast<size_t>(i)];
    const FieldVector fv{y, state.y.moment(i)};
    const double el =
        metric_lambda(x, fv, std::max(mu, 0.0), state.pair, state.params, *state.model);
    out << detail::fmt(x) << ' ' << detail::fmt(y[0]) << ' ' << detail::fmt(y[1]) << ' '
        << detail::fmt(y[2]) << ' ' << detail::fmt(mu) << ' ' << detail::fmt(el) << '\n';
  }
  if (!out) throw IoError("failed writing profile table");
}

// Per-iteration telemetry of one solve.
inline void write_report(std::ostream& out, const SolveReport& report) {
  out << "converged: " << (report.converged ? "true" : "false") << "\n";
  out << "iterations: " << report.iterations << "\n";
  out << "termination: " << report.termination_reason << "\n";
  out << "# columns: iteration delta tau r_s omega\n";
  for (size_t i = 0; i < report.residual_history.size(); ++i) {
    out << (i + 1) << ' ' << detail::fmt(report.residual_history[i]) << ' '
        << detail::fmt(report.tau_history[i]) << ' '
        << detail::fmt(report.eigen_history[i].r_s) << ' '
        << detail::fmt(report.eigen_history[i].omega) << '\n';
  }
  if (!out) throw IoError("failed writing solve report");
}

struct SweepRow {
  double param = 0.0;
  double r_s = 0.0;
  double omega = 0.0;
  double nu_center = 0.0;
  double nu_surface = 0.0;
  double phi_center = 0.0;
  double omega_hat = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string note;  // failure reason for non-converged points
};

inline SweepRow make_sweep_row(double param, const FieldState& state,
                               const SolveReport& report) {
  SweepRow row;
  row.param = param;
  row.r_s = state.pair.r_s;
  row.omega = state.pair.omega;
  row.nu_center = state.y.value(0)[0];
  row.nu_surface = state.y.value(state.y.grid().n_star())[0];
  row.phi_center = state.y.value(0)[1];
  row.omega_hat = asymptotic_frequency(state);
  row.iterations = report.iterations;
  row.converged = report.converged;
  row.note = report.converged ? std::string() : report.termination_reason;
  return row;
}

// Sweep summary: one row per converged point; failed points are recorded as
// comments so the column schema stays rectangular.
inline void write_sweep_summary(std::ostream& out, const std::string& parameter,
                                const std::vector<SweepRow>& rows) {
  out << "# continuation sweep over " << parameter << "\n";
  out << "# columns: " << parameter
      << " r_s omega nu_center nu_surface phi_center omega_hat iterations\n";
  for (const SweepRow& r : rows) {
    if (!r.converged) {
      out << "# failed at " << parameter << " = " << detail::fmt(r.param) << ": " << r.note
          << "\n";
      continue;
    }
    out << detail::fmt(r.param) << ' ' << detail::fmt(r.r_s) << ' ' << detail::fmt(r.omega)
        << ' ' << detail::fmt(r.nu_center) << ' ' << detail::fmt(r.nu_surface) << ' '
        << detail::fmt(r.phi_center) << ' ' << detail::fmt(r.omega_hat) << ' ' << r.iterations
        << '\n';
  }
  if (!out) throw IoError("failed writing sweep summary");
}

// gnuplot script rendering the profile table written by write_profile.
inline void write_profile_plot_script(std::ostream& out, const std::string& data_file) {
  out << "set terminal pngcairo size 1000,700\n";
  out << "set output 'profile.png'\n";
  out << "set xlabel 'x'\n";
  out << "set grid\n";
  out << "plot '" << data_file << "' using 1:2 with lines title 'nu', \\\n";
  out << "     '" << data_file << "' using 1:3 with lines title 'phi', \\\n";
  out << "     '" << data_file << "' using 1:4 with lines title 'sigma', \\\n";
  out << "     '" << data_file << "' using 1:5 with lines title 'mu'\n";
  if (!out) throw IoError("failed writing profile plot script");
}

// gnuplot script rendering the sweep summary written by write_sweep_summary.
inline void write_sweep_plot_script(std::ostream& out, const std::string& data_file,
                                    const std::string& parameter) {
  out << "set terminal pngcairo size 1000,700\n";
  out << "set output 'sweep.png'\n";
  out << "set xlabel '" << parameter << "'\n";
  out << "set grid\n";
  out << "set ytics nomirror\n";
  out << "set y2tics\n";
  out << "plot '" << data_file << "' using 1:2 with linespoints axes x1y1 title 'r_s', \\\n";
  out << "     '" << data_file
      << "' using 1:7 with linespoints axes x1y2 title 'omega_hat'\n";
  if (!out) throw IoError("failed writing sweep plot script");
}

}  // namespace bfstar
