#pragma once

// Run configuration and its text format: flat `key = value` lines grouped
// under [physics] / [numerics] / [guess] / [sweep] / [output] sections.
// Blank lines and #-comments are ignored.  Every rejected line is reported
// with its number.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>

#include "canm.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace bfstar {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct NumericsConfig {
  int n = 512;             // subinterval count
  double x_inf = 32.0;     // truncation radius
  Grading grading = Grading::uniform;
  double grading_strength = 0.25;  // surface condensation exponent offset
  double eps = 1e-10;      // termination threshold
  int max_iter = 40;
  double tau_min = 1e-3;
};

struct SweepConfig {
  std::string parameter = "sigma_c";  // one of sigma_c, mu_c, lambda, gamma, b
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
};

struct OutputConfig {
  std::string directory;  // empty: resolved by the driver (flag, env, cwd)
  bool emit_plots = false;
  bool keep_profiles = false;  // sweep: also write one profile per point
};

struct RunConfig {
  PhysicalParams params{0.8, 1.0, 0.01, 1.0, 1.0};
  NumericsConfig numerics;
  GuessShape guess;
  std::optional<SweepConfig> sweep;
  OutputConfig output;

  void validate() const {
    params.validate();
    if (numerics.n < 4) throw std::invalid_argument("numerics: n must be at least 4");
    if (!(numerics.x_inf > 1.0)) throw std::invalid_argument("numerics: x_inf must exceed 1");
    if (!(numerics.eps > 0.0)) throw std::invalid_argument("numerics: eps must be positive");
    if (numerics.max_iter < 1) throw std::invalid_argument("numerics: max_iter must be >= 1");
    if (!(numerics.tau_min > 0.0) || numerics.tau_min > 1.0)
      throw std::invalid_argument("numerics: tau_min must lie in (0, 1]");
    if (numerics.grading_strength < 0.0)
      throw std::invalid_argument("numerics: grading_strength must be >= 0");
    if (sweep) {
      if (sweep->step == 0.0) throw std::invalid_argument("sweep: step must be nonzero");
      if ((sweep->stop - sweep->start) * sweep->step < 0.0)
        throw std::invalid_argument("sweep: range is empty (step points away from stop)");
      if (sweep->parameter != "sigma_c" && sweep->parameter != "mu_c" &&
          sweep->parameter != "lambda" && sweep->parameter != "gamma" && sweep->parameter != "b")
        throw std::invalid_argument("sweep: unknown parameter '" + sweep->parameter + "'");
    }
  }
};

// Read/write access to a physical parameter by its config name.
inline double* param_by_name(PhysicalParams& p, const std::string& name) {
  if (name == "sigma_c") return &p.sigma_c;
  if (name == "mu_c") return &p.mu_c;
  if (name == "lambda") return &p.lambda;
  if (name == "gamma") return &p.gamma;
  if (name == "b") return &p.b;
  return nullptr;
}

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_number(const std::string& v, int line) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
}

inline int parse_int(const std::string& v, int line) {
  try {
    size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected an integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string section = "physics";
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string text = detail::trim(raw);
    if (text.empty()) continue;

    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(line, "unterminated section header");
      section = detail::trim(text.substr(1, text.size() - 2));
      if (section != "physics" && section != "numerics" && section != "guess" &&
          section != "sweep" && section != "output")
        throw ConfigError(line, "unknown section [" + section + "]");
      if (section == "sweep" && !cfg.sweep) cfg.sweep.emplace();
      continue;
    }

    const size_t eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "empty key");
    if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");

    if (section == "physics") {
      if (double* slot = param_by_name(cfg.params, key)) {
        *slot = detail::parse_number(value, line);
      } else {
        throw ConfigError(line, "unknown physics key '" + key + "'");
      }
    } else if (section == "numerics") {
      if (key == "n") {
        cfg.numerics.n = detail::parse_int(value, line);
      } else if (key == "x_inf") {
        cfg.numerics.x_inf = detail::parse_number(value, line);
      } else if (key == "grading") {
        if (value == "uniform") {
          cfg.numerics.grading = Grading::uniform;
        } else if (value == "condensed") {
          cfg.numerics.grading = Grading::condensed;
        } else {
          throw ConfigError(line, "grading must be 'uniform' or 'condensed'");
        }
      } else if (key == "grading_strength") {
        cfg.numerics.grading_strength = detail::parse_number(value, line);
      } else if (key == "eps") {
        cfg.numerics.eps = detail::parse_number(value, line);
      } else if (key == "max_iter") {
        cfg.numerics.max_iter = detail::parse_int(value, line);
      } else if (key == "tau_min") {
        cfg.numerics.tau_min = detail::parse_number(value, line);
      } else {
        throw ConfigError(line, "unknown numerics key '" + key + "'");
      }
    } else if (section == "guess") {
      if (key == "nu_center") {
        cfg.guess.nu_center = detail::parse_number(value, line);
      } else if (key == "phi_center") {
        cfg.guess.phi_center = detail::parse_number(value, line);
      } else if (key == "r_s") {
        cfg.guess.r_s = detail::parse_number(value, line);
      } else if (key == "omega") {
        cfg.guess.omega = detail::parse_number(value, line);
      } else {
        throw ConfigError(line, "unknown guess key '" + key + "'");
      }
    } else if (section == "sweep") {
      if (key == "parameter") {
        cfg.sweep->parameter = value;
      } else if (key == "start") {
        cfg.sweep->start = detail::parse_number(value, line);
      } else if (key == "stop") {
        cfg.sweep->stop = detail::parse_number(value, line);
      } else if (key == "step") {
        cfg.sweep->step = detail::parse_number(value, line);
      } else {
        throw ConfigError(line, "unknown sweep key '" + key + "'");
      }
    } else {  // output
      if (key == "directory") {
        cfg.output.directory = value;
      } else if (key == "emit_plots") {
        cfg.output.emit_plots = detail::parse_bool(value, line);
      } else if (key == "keep_profiles") {
        cfg.output.keep_profiles = detail::parse_bool(value, line);
      } else {
        throw ConfigError(line, "unknown output key '" + key + "'");
      }
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open '" + path + "'");
  return parse_config(in);
}

}  // namespace bfstar
