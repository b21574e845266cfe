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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hidmdi/analytics.hpp"
#include "hidmdi/types.hpp"

// Detector dead-time (saturation) model. A detector that clicks stays dark
// for dead_time_s regardless of what arrives meanwhile (non-paralyzable).
// The pulse spacing trades repetition rate against detector aliveness; this
// module carries the hit/alive statistics, the raw-bits objective, its
// closed-form small-P_s maxima, the constrained numeric optimizer and the
// per-detector normalization.

namespace hidmdi::saturation {

inline int detector_count(int dimension, Encoding enc) {
  return enc == Encoding::space ? 2 * dimension : 2;
}

// Probability that one specific detector clicks, per pulse pair (space) or
// per qudit-train pair (time). Both share the expected-click bracket
// 2 P_s(1-P_s) + P_s^2 (2N-1)/N spread over the detector count: 2N detectors
// for space, 2 for time. The time variant is a reconstruction; it is
// validated by the agreement of the numeric optimum with the closed form.
inline double hit_prob(int dimension, double p_s, Encoding enc) {
  if (dimension < 2) throw std::invalid_argument("hit_prob: dimension must be >= 2");
  if (!is_probability(p_s)) throw std::domain_error("hit_prob: p_s outside [0,1]");
  const double nd = static_cast<double>(dimension);
  const double bracket = 2.0 * p_s * (1.0 - p_s) + p_s * p_s * (2.0 * nd - 1.0) / nd;
  return enc == Encoding::space ? bracket / (2.0 * nd) : bracket / 2.0;
}

// P_alive = 1/(1 + n * P_hit): renewal duty cycle of mean alive run 1/P_hit
// against n dead units.
inline double alive_prob(double p_hit, double pulses_per_deadtime) {
  if (p_hit < 0.0 || p_hit > 1.0) throw std::domain_error("alive_prob: p_hit outside [0,1]");
  if (pulses_per_deadtime < 0.0) throw std::domain_error("alive_prob: n must be >= 0");
  if (p_hit == 0.0) return 1.0;
  return 1.0 / (1.0 + pulses_per_deadtime * p_hit);
}

// Units of emission per dead time: pulse pairs for space, qudit-train pairs
// (spacing N*T_p) for time.
inline double units_per_deadtime(int dimension, double dead_time_s, double pulse_sep_s,
                                 Encoding enc) {
  const double n_pulses = dead_time_s / pulse_sep_s;
  return enc == Encoding::space ? n_pulses : n_pulses / static_cast<double>(dimension);
}

// Average raw bits exchanged during one dead time:
//   space: (tau_d/T_p)      * (N-1)/N * P_s^2 * P_alive^2
//   time:  (tau_d/(N T_p))  * (N-1)/N * P_s^2 * P_alive^2 / 2
// The time halving reflects that one detector cannot fire twice within a
// train, losing half of the cross-slot coincidences.
inline double raw_bits_per_deadtime(int dimension, double p_s, double dead_time_s,
                                    double pulse_sep_s, Encoding enc) {
  if (pulse_sep_s <= 0.0) throw std::domain_error("raw_bits_per_deadtime: T_p must be > 0");
  if (dead_time_s < 0.0) throw std::domain_error("raw_bits_per_deadtime: tau_d must be >= 0");
  const double nd = static_cast<double>(dimension);
  const double n = units_per_deadtime(dimension, dead_time_s, pulse_sep_s, enc);
  const double alive = alive_prob(hit_prob(dimension, p_s, enc), n);
  const double base = n * (nd - 1.0) / nd * p_s * p_s * alive * alive;
  return enc == Encoding::space ? base : 0.5 * base;
}

// Small-P_s closed forms for the maximum of raw_bits_per_deadtime over T_p,
// expressed as a rate: P_s(N-1)/(4 tau_d) for space, P_s(N-1)/(8 N tau_d)
// for time.
inline double closed_form_max(int dimension, double p_s, double dead_time_s, Encoding enc) {
  if (dead_time_s <= 0.0)
    throw std::domain_error("closed_form_max: tau_d must be > 0 (branch on tau_d = 0 first)");
  const double nd = static_cast<double>(dimension);
  if (enc == Encoding::space) return p_s * (nd - 1.0) / (4.0 * dead_time_s);
  return p_s * (nd - 1.0) / (8.0 * dead_time_s * nd);
}

struct PulseSpacingOptimum {
  double pulse_sep_s = 0.0;
  double raw_bits_max = 0.0;  // bits per dead time at the optimum
  bool constrained = false;   // optimum clipped at min_pulse_sep_s
};

// Maximizes raw_bits_per_deadtime over T_p >= min_pulse_sep_s. The objective
// as a function of m = units per dead time is m/(1 + m P_hit)^2, unimodal
// with maximum at m = 1/P_hit; golden-section search over log T_p on
// [min_pulse_sep_s, 1e3 * tau_d] to 1e-9 relative.
inline PulseSpacingOptimum optimize_pulse_spacing(int dimension, double p_s, double dead_time_s,
                                                  double min_pulse_sep_s, Encoding enc) {
  if (min_pulse_sep_s <= 0.0)
    throw std::domain_error("optimize_pulse_spacing: min_pulse_sep_s must be > 0");
  if (dead_time_s <= 0.0)
    throw std::domain_error("optimize_pulse_spacing: tau_d must be > 0");

  const auto objective = [&](double log_tp) {
    return raw_bits_per_deadtime(dimension, p_s, dead_time_s, std::exp(log_tp), enc);
  };

  double lo = std::log(min_pulse_sep_s);
  double hi = std::log(std::max(1e3 * dead_time_s, min_pulse_sep_s * 2.0));
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 300 && (hi - lo) > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  double best_tp = std::exp(0.5 * (lo + hi));
  double best_val = raw_bits_per_deadtime(dimension, p_s, dead_time_s, best_tp, enc);

  // Unimodality puts a clipped optimum exactly at the lower bound.
  const double at_min = raw_bits_per_deadtime(dimension, p_s, dead_time_s, min_pulse_sep_s, enc);
  PulseSpacingOptimum opt;
  if (at_min >= best_val * (1.0 - 1e-12)) {
    opt.pulse_sep_s = min_pulse_sep_s;
    opt.raw_bits_max = at_min;
    opt.constrained = true;
  } else {
    opt.pulse_sep_s = best_tp;
    opt.raw_bits_max = best_val;
    opt.constrained = false;
  }
  return opt;
}

struct SaturationResult {
  double p_hit = 0.0;
  double p_alive = 0.0;
  double raw_bits_per_deadtime = 0.0;
  double optimal_pulse_sep_s = 0.0;
  bool constrained = false;
  double raw_rate_bits_per_s = 0.0;
  double raw_rate_per_detector_bits_per_s = 0.0;
  int n_det = 0;
};

// Raw key rate in bits per second with dead time folded in. The dead-time
// machinery fixes the usable protocol applications per second; the per-use
// statistics (dark counts included) enter through the Z raw rate:
//   tau_d > 0 : R = n_opt * P_alive^2 / tau_d * R_p  (time: an extra 1/2)
//   tau_d = 0 : R = R_p / period, period = max(T_p, min T_p), times N for time
// R_det divides by the detector count, 2N (space) or 2 (time).
inline SaturationResult rate_with_deadtime(const ProtocolConfig& cfg) {
  validate(cfg);
  const auto breakdown = analytics::rate_breakdown(cfg);
  const double p_s = breakdown.p_s;
  const double tau_d = cfg.detector.dead_time_s;
  const Encoding enc = cfg.encoding;
  const double nd = static_cast<double>(cfg.dimension);

  SaturationResult res;
  res.n_det = detector_count(cfg.dimension, enc);
  res.p_hit = hit_prob(cfg.dimension, p_s, enc);

  if (tau_d <= 0.0) {
    const double period = std::max(cfg.timing.pulse_sep_s, cfg.timing.min_pulse_sep_s);
    const double app_period = enc == Encoding::space ? period : nd * period;
    res.p_alive = 1.0;
    res.optimal_pulse_sep_s = period;
    res.raw_rate_bits_per_s = breakdown.r_p_z / app_period;
  } else {
    const auto opt = optimize_pulse_spacing(cfg.dimension, p_s, tau_d,
                                            cfg.timing.min_pulse_sep_s, enc);
    const double n = units_per_deadtime(cfg.dimension, tau_d, opt.pulse_sep_s, enc);
    res.p_alive = alive_prob(res.p_hit, n);
    res.optimal_pulse_sep_s = opt.pulse_sep_s;
    res.constrained = opt.constrained;
    res.raw_bits_per_deadtime = opt.raw_bits_max;
    const double halving = enc == Encoding::space ? 1.0 : 0.5;
    res.raw_rate_bits_per_s = n * res.p_alive * res.p_alive * halving * breakdown.r_p_z / tau_d;
  }
  res.raw_rate_per_detector_bits_per_s = res.raw_rate_bits_per_s / res.n_det;
  return res;
}

// Dimension maximizing the per-detector rate under a pulse-rate cap:
// 2 + P_s tau_d / min T_p, returned unrounded.
inline double optimal_dimension(double p_s, double dead_time_s, double min_pulse_sep_s) {
  if (!is_probability(p_s)) throw std::domain_error("optimal_dimension: p_s outside [0,1]");
  if (dead_time_s < 0.0 || min_pulse_sep_s <= 0.0)
    throw std::domain_error("optimal_dimension: bad timing parameters");
  return 2.0 + p_s * dead_time_s / min_pulse_sep_s;
}

}  // namespace hidmdi::saturation
