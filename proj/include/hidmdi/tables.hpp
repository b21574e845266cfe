/**
 * Copyright 2026 the hidmdi authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hidmdi/analytics.hpp"
#include "hidmdi/csv.hpp"
#include "hidmdi/saturation.hpp"
#include "hidmdi/simulator.hpp"
#include "hidmdi/twophoton.hpp"
#include "hidmdi/types.hpp"

// Table builders behind the command-line front end. Everything here is a
// pure function of (config, spec, seed), so emitted tables are reproducible.

namespace hidmdi::tables {

enum class SweepVariable { distance, dimension, pulse_sep, sigma };

struct SweepSpec {
  SweepVariable variable = SweepVariable::distance;
  double start = 0.0;
  double stop = 0.0;
  int steps = 2;
  bool log_scale = false;
};

// Grammar: name:start:stop:steps:lin|log
inline SweepSpec parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  if (parts.size() != 5)
    throw std::invalid_argument("sweep: expected var:start:stop:steps:lin|log");
  SweepSpec s;
  if (parts[0] == "distance")
    s.variable = SweepVariable::distance;
  else if (parts[0] == "dimension")
    s.variable = SweepVariable::dimension;
  else if (parts[0] == "pulse_sep")
    s.variable = SweepVariable::pulse_sep;
  else if (parts[0] == "sigma")
    s.variable = SweepVariable::sigma;
  else
    throw std::invalid_argument("sweep: unknown variable '" + parts[0] + "'");
  try {
    s.start = std::stod(parts[1]);
    s.stop = std::stod(parts[2]);
    s.steps = std::stoi(parts[3]);
  } catch (const std::exception&) {
    throw std::invalid_argument("sweep: malformed numeric field");
  }
  if (parts[4] == "lin")
    s.log_scale = false;
  else if (parts[4] == "log")
    s.log_scale = true;
  else
    throw std::invalid_argument("sweep: scale must be lin or log");
  if (s.steps < 2) throw std::invalid_argument("sweep: steps must be >= 2");
  if (!(s.start < s.stop)) throw std::invalid_argument("sweep: start must be < stop");
  if (s.log_scale && s.start <= 0.0)
    throw std::invalid_argument("sweep: log scale needs a positive range");
  return s;
}

inline std::vector<double> sweep_values(const SweepSpec& s) {
  std::vector<double> vals(static_cast<std::size_t>(s.steps));
  for (int k = 0; k < s.steps; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(s.steps - 1);
    vals[static_cast<std::size_t>(k)] =
        s.log_scale ? s.start * std::pow(s.stop / s.start, f)
                    : s.start + f * (s.stop - s.start);
  }
  return vals;
}

inline ProtocolConfig apply_sweep_point(ProtocolConfig cfg, SweepVariable var, double value) {
  switch (var) {
    case SweepVariable::distance:
      cfg.channel.distance_km = value;
      break;
    case SweepVariable::dimension:
      cfg.dimension = static_cast<int>(std::lround(value));
      break;
    case SweepVariable::pulse_sep:
      cfg.timing.pulse_sep_s = value;
      if (cfg.timing.min_pulse_sep_s > value) cfg.timing.min_pulse_sep_s = value;
      break;
    case SweepVariable::sigma:
      cfg.noise.sigma = value;
      break;
  }
  return cfg;
}

inline std::string encoding_name(Encoding e) { return e == Encoding::space ? "space" : "time"; }

// One row of the rates table: closed-form engine only.
inline void rates_row(Table& t, const ProtocolConfig& cfg) {
  const auto breakdown = analytics::rate_breakdown(cfg);
  const auto sat = saturation::rate_with_deadtime(cfg);
  const double secret_per_s = analytics::secret_rate(
      sat.raw_rate_bits_per_s, breakdown.eps_x, breakdown.eps_z, cfg.ec_inefficiency);
  auto& r = t.add_row();
  r.push_back(format_double(cfg.channel.distance_km));
  r.push_back(format_int(cfg.dimension));
  r.push_back(encoding_name(cfg.encoding));
  r.push_back(format_double(breakdown.p_s));
  r.push_back(format_double(breakdown.dephasing_sum));
  r.push_back(format_double(breakdown.eps_x));
  r.push_back(format_double(breakdown.eps_z));
  r.push_back(format_double(breakdown.r_p_z));
  r.push_back(format_double(sat.raw_rate_bits_per_s));
  r.push_back(format_double(sat.raw_rate_per_detector_bits_per_s));
  r.push_back(format_double(secret_per_s));
}

inline Table rates_table(const ProtocolConfig& cfg, const SweepSpec* sweep) {
  Table t;
  t.header = {"distance_km",
              "dimension",
              "encoding",
              "p_s",
              "f_n",
              "eps_x",
              "eps_z",
              "r_p_bits_per_use",
              "raw_rate_bits_per_s",
              "raw_rate_per_detector_bits_per_s",
              "secret_rate_bits_per_s"};
  if (!sweep) {
    rates_row(t, cfg);
    return t;
  }
  for (double v : sweep_values(*sweep)) rates_row(t, apply_sweep_point(cfg, sweep->variable, v));
  return t;
}

// Optimizer report: scalar summary plus the per-dimension rate table.
struct OptimizeReport {
  bool saturation_active = false;
  saturation::PulseSpacingOptimum optimum;  // at cfg.dimension
  double numeric_rate_bits_per_s = 0.0;
  double closed_form_rate_bits_per_s = 0.0;
  double n_opt_real = 2.0;
  int n_opt_rounded = 2;
  int argmax_dimension = 2;
  Table summary;
  Table per_dimension;
};

inline OptimizeReport optimize_report(const ProtocolConfig& cfg, int n_max = 0) {
  validate(cfg);
  OptimizeReport rep;
  const double tau_d = cfg.detector.dead_time_s;
  const double p_s = analytics::survival_prob(cfg.channel.detector_efficiency,
                                              cfg.channel.loss_coeff_db_per_km,
                                              cfg.channel.distance_km);
  rep.saturation_active = tau_d > 0.0;
  if (rep.saturation_active) {
    rep.optimum = saturation::optimize_pulse_spacing(cfg.dimension, p_s, tau_d,
                                                     cfg.timing.min_pulse_sep_s, cfg.encoding);
    rep.numeric_rate_bits_per_s = rep.optimum.raw_bits_max / tau_d;
    rep.closed_form_rate_bits_per_s =
        saturation::closed_form_max(cfg.dimension, p_s, tau_d, cfg.encoding);
    rep.n_opt_real = saturation::optimal_dimension(p_s, tau_d, cfg.timing.min_pulse_sep_s);
  } else {
    rep.n_opt_real = 2.0;
  }
  rep.n_opt_rounded = std::max(2, static_cast<int>(std::lround(rep.n_opt_real)));

  if (n_max <= 0)
    n_max = std::min(max_dimension, std::max(16, 2 * rep.n_opt_rounded + 2));
  rep.per_dimension.header = {"dimension",
                              "encoding",
                              "optimal_pulse_sep_s",
                              "constrained",
                              "raw_rate_bits_per_s",
                              "raw_rate_per_detector_bits_per_s"};
  double best = -1.0;
  for (int n = 2; n <= n_max; ++n) {
    ProtocolConfig point = cfg;
    point.dimension = n;
    const auto sat = saturation::rate_with_deadtime(point);
    auto& row = rep.per_dimension.add_row();
    row.push_back(format_int(n));
    row.push_back(encoding_name(cfg.encoding));
    row.push_back(format_double(sat.optimal_pulse_sep_s));
    row.push_back(format_int(sat.constrained ? 1 : 0));
    row.push_back(format_double(sat.raw_rate_bits_per_s));
    row.push_back(format_double(sat.raw_rate_per_detector_bits_per_s));
    if (sat.raw_rate_per_detector_bits_per_s > best) {
      best = sat.raw_rate_per_detector_bits_per_s;
      rep.argmax_dimension = n;
    }
  }

  rep.summary.header = {"saturation_active", "dimension",          "encoding",
                        "optimal_pulse_sep_s", "constrained",      "numeric_rate_bits_per_s",
                        "closed_form_rate_bits_per_s", "n_opt_real", "n_opt_rounded",
                        "argmax_dimension"};
  auto& s = rep.summary.add_row();
  s.push_back(format_int(rep.saturation_active ? 1 : 0));
  s.push_back(format_int(cfg.dimension));
  s.push_back(encoding_name(cfg.encoding));
  s.push_back(format_double(rep.optimum.pulse_sep_s));
  s.push_back(format_int(rep.optimum.constrained ? 1 : 0));
  s.push_back(format_double(rep.numeric_rate_bits_per_s));
  s.push_back(format_double(rep.closed_form_rate_bits_per_s));
  s.push_back(format_double(rep.n_opt_real));
  s.push_back(format_int(rep.n_opt_rounded));
  s.push_back(format_int(rep.argmax_dimension));
  return rep;
}

namespace detail {

// z-score of an observed binomial fraction against the model value; 0 when
// both sides agree exactly even at zero variance.
inline double z_score(double observed, double model, std::uint64_t n_trials) {
  if (n_trials == 0) return std::numeric_limits<double>::quiet_NaN();
  const double se = std::sqrt(model * (1.0 - model) / static_cast<double>(n_trials));
  const double diff = observed - model;
  if (se == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / se;
}

}  // namespace detail

// Monte Carlo session next to its closed-form predictions.
inline Table simulate_table(const ProtocolConfig& cfg, const sim::SessionStats& st,
                            std::uint64_t seed) {
  const auto model = analytics::rate_breakdown(cfg);
  const double pb2 = cfg.basis_prob * cfg.basis_prob;
  const double qb2 = (1.0 - cfg.basis_prob) * (1.0 - cfg.basis_prob);

  const double sifted_z_frac =
      static_cast<double>(st.sifted_z) / static_cast<double>(st.rounds_total);
  const double sifted_x_frac =
      static_cast<double>(st.sifted_x) / static_cast<double>(st.rounds_total);
  const bool empirical_x = st.eps_x_source == sim::ErrorSource::empirical;

  Table t;
  t.header = {"rounds",          "seed",
              "sifted_z",        "sifted_x",
              "wrong_z",         "wrong_x",
              "eps_z_hat",       "eps_z_model",      "z_eps_z",
              "eps_x_hat",       "eps_x_model",      "z_eps_x",
              "eps_x_source",
              "sifted_z_frac",   "sifted_z_frac_model", "z_sifted_z",
              "sifted_x_frac",   "sifted_x_frac_model", "z_sifted_x",
              "key_length",      "abort_threshold",  "aborted",
              "insufficient"};
  auto& r = t.add_row();
  r.push_back(format_int(static_cast<std::int64_t>(st.rounds_total)));
  r.push_back(format_int(static_cast<std::int64_t>(seed)));
  r.push_back(format_int(static_cast<std::int64_t>(st.sifted_z)));
  r.push_back(format_int(static_cast<std::int64_t>(st.sifted_x)));
  r.push_back(format_int(static_cast<std::int64_t>(st.wrong_z)));
  r.push_back(format_int(static_cast<std::int64_t>(st.wrong_x)));
  r.push_back(format_double(st.eps_z_hat));
  r.push_back(format_double(model.eps_z));
  r.push_back(format_double(detail::z_score(st.eps_z_hat, model.eps_z, st.sifted_z)));
  r.push_back(format_double(st.eps_x_hat));
  r.push_back(format_double(model.eps_x));
  r.push_back(format_double(
      empirical_x ? detail::z_score(st.eps_x_hat, model.eps_x, st.sifted_x)
                  : std::numeric_limits<double>::quiet_NaN()));
  r.push_back(empirical_x ? "empirical" : "analytic");
  r.push_back(format_double(sifted_z_frac));
  r.push_back(format_double(pb2 * model.r_p_z));
  r.push_back(format_double(detail::z_score(sifted_z_frac, pb2 * model.r_p_z, st.rounds_total)));
  r.push_back(format_double(sifted_x_frac));
  const double x_frac_model = empirical_x ? qb2 * model.r_p_x : 0.0;
  r.push_back(format_double(x_frac_model));
  r.push_back(format_double(detail::z_score(sifted_x_frac, x_frac_model, st.rounds_total)));
  r.push_back(format_int(static_cast<std::int64_t>(st.key_length)));
  r.push_back(format_double(st.abort_threshold));
  r.push_back(format_int(st.aborted ? 1 : 0));
  r.push_back(format_int(st.insufficient ? 1 : 0));
  return t;
}

// Two-photon oracle report: every category with its standard error, the
// aggregate masses, the closed-form comparison and the double-click
// convention diagnostic (the model's convention roughly doubles the
// enumerated bunching mass; reported, never asserted).
inline Table oracle_table(const ProtocolConfig& cfg, BasisKind state_basis, int alice_row,
                          int bob_row, std::uint64_t trials, std::uint64_t seed,
                          int workers = 1) {
  validate(cfg);
  const int n = cfg.dimension;
  if (alice_row < 0 || alice_row >= n || bob_row < 0 || bob_row >= n)
    throw std::invalid_argument("oracle: basis row outside 0..N-1");
  const auto basis = build_basis(n, state_basis);
  const auto alice = twophoton::basis_state(basis, alice_row);
  const auto bob = twophoton::basis_state(basis, bob_row);
  const auto summary = twophoton::sample_categories(alice, bob, cfg.noise, trials, seed, workers);

  const double f_n = analytics::dephasing_factor(n, cfg.noise.sigma, cfg.noise.phase_model);
  const auto xo = analytics::x_outcome_probs(n, cfg.noise.beta_sq, f_n);

  Table t;
  t.header = {"category", "i", "j", "mass", "std_error"};
  auto add = [&t](const std::string& cat, int i, int j, double mass, double se) {
    auto& r = t.add_row();
    r.push_back(cat);
    r.push_back(format_int(i));
    r.push_back(format_int(j));
    r.push_back(format_double(mass));
    r.push_back(format_double(se));
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto idx = twophoton::pair_index(i, j, n);
      add("cross_plus", i, j, summary.mean.cross_plus[idx], summary.std_error.cross_plus[idx]);
      add("cross_minus", i, j, summary.mean.cross_minus[idx],
          summary.std_error.cross_minus[idx]);
    }
  for (int i = 0; i < n; ++i)
    add("same_bin", i, i, summary.mean.same_bin[static_cast<std::size_t>(i)],
        summary.std_error.same_bin[static_cast<std::size_t>(i)]);
  for (int mu = 0; mu < 2 * n; ++mu)
    add("bunched_mode", mu / 2, mu % 2, summary.mean.bunched[static_cast<std::size_t>(mu)],
        summary.std_error.bunched[static_cast<std::size_t>(mu)]);

  add("expected_parity_total", -1, -1, summary.mean.expected_parity_mass,
      summary.std_error.expected_parity_mass);
  add("unexpected_parity_total", -1, -1, summary.mean.unexpected_parity_mass,
      summary.std_error.unexpected_parity_mass);
  add("unresolved_parity_total", -1, -1, summary.mean.unresolved_parity_mass,
      summary.std_error.unresolved_parity_mass);
  add("same_bin_total", -1, -1, summary.mean.same_bin_mass, summary.std_error.same_bin_mass);
  add("bunched_total", -1, -1, summary.mean.bunched_mass, summary.std_error.bunched_mass);
  add("total_mass", -1, -1, summary.mean.total(), 0.0);
  add("model_p_good", -1, -1, xo.p_good, 0.0);
  add("model_p_bad", -1, -1, xo.p_bad, 0.0);
  add("model_double_click_prob", -1, -1, xo.p_double, 0.0);
  add("double_click_convention_ratio", -1, -1,
      summary.mean.bunched_mass > 0.0 ? xo.p_double / summary.mean.bunched_mass : 0.0, 0.0);
  return t;
}

}  // namespace hidmdi::tables
