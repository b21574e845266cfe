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
#include <stdexcept>
#include <utility>

#include "hidmdi/types.hpp"

// Closed-form engine for the per-use event probabilities, QBER values and
// secret-key rates of the protocol, before any detector dead-time effects.
// All quantities are per pulse pair, conditioned on the relevant basis
// choice (the basis-choice probability is a sifting concern of the Monte
// Carlo layer and never multiplies these rates).

namespace hidmdi::analytics {

// Probability that a photon survives the channel and clicks:
// eta * 10^(-alpha*d/10).
inline double survival_prob(double eta, double alpha_db_per_km, double distance_km) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::domain_error("survival_prob: eta must lie in (0,1]");
  if (alpha_db_per_km < 0.0 || distance_km < 0.0)
    throw std::domain_error("survival_prob: loss and distance must be >= 0");
  return eta * std::pow(10.0, -alpha_db_per_km * distance_km / 10.0);
}

inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

// Sum over bin pairs (i < j) of the surviving coherence
// <cos(theta_i^A - theta_j^A - theta_i^B + theta_j^B)>:
//   space_homogeneous : N(N-1)/2 * exp(-sigma^2)
//   time_white        : [N(1 - e^(-s)) + e^(-N s) - 1] / [2 sinh(s/2)]^2, s = sigma^2
//                       (identical to sum_k (N-k) e^(-k s))
//   time_drift        : sum_k (N-k) e^(-k^2 s)  (no closed form)
inline double dephasing_factor(int n, double sigma, PhaseModel model) {
  if (n < 2) throw std::invalid_argument("dephasing_factor: dimension must be >= 2");
  if (sigma < 0.0) throw std::domain_error("dephasing_factor: sigma must be >= 0");
  const double nd = static_cast<double>(n);
  const double s = sigma * sigma;

  switch (model) {
    case PhaseModel::space_homogeneous:
      return 0.5 * nd * (nd - 1.0) * std::exp(-s);
    case PhaseModel::time_white: {
      // The quotient is 0/0 as sigma -> 0; below the threshold the value is
      // indistinguishable from the limit N(N-1)/2.
      if (s < 1e-9) return 0.5 * nd * (nd - 1.0);
      const double num = -nd * std::expm1(-s) + std::expm1(-nd * s);
      const double den = 2.0 * std::sinh(0.5 * s);
      return num / (den * den);
    }
    case PhaseModel::time_drift: {
      double sum = 0.0;
      for (int k = 1; k < n; ++k)
        sum += (nd - static_cast<double>(k)) * std::exp(-static_cast<double>(k) * k * s);
      return sum;
    }
  }
  throw std::logic_error("dephasing_factor: unreachable");
}

inline PhaseModel default_phase_model(Encoding enc) {
  return enc == Encoding::space ? PhaseModel::space_homogeneous : PhaseModel::time_white;
}

// X-basis two-photon outcome probabilities, conditioned on both photons
// reaching the detectors.
struct XOutcomeProbs {
  double dephasing_sum = 0.0;  // f_N above
  double p_good = 0.0;         // interference survives, permitted parity observed
  double p_bad = 0.0;          // interference spoiled, forbidden parity observed
  double p_double = 0.0;       // both photons in one detector (model convention;
                               // exceeds the enumerated bunching mass by ~2x)
};

inline XOutcomeProbs x_outcome_probs(int n, double beta_sq, double dephasing_sum) {
  if (n < 2) throw std::invalid_argument("x_outcome_probs: dimension must be >= 2");
  if (!is_probability(beta_sq)) throw std::domain_error("x_outcome_probs: beta_sq outside [0,1]");
  const double nd = static_cast<double>(n);
  const double f_max = 0.5 * nd * (nd - 1.0);
  if (dephasing_sum < -1e-12 || dephasing_sum > f_max * (1.0 + 1e-12))
    throw std::domain_error("x_outcome_probs: dephasing sum outside [0, N(N-1)/2]");
  XOutcomeProbs xo;
  xo.dephasing_sum = dephasing_sum;
  xo.p_good = (nd * (nd - 1.0) + 2.0 * beta_sq * dephasing_sum) / (2.0 * nd * nd);
  xo.p_bad = (nd * (nd - 1.0) - 2.0 * beta_sq * dephasing_sum) / (2.0 * nd * nd);
  xo.p_double = (1.0 + beta_sq) / nd;
  return xo;
}

// Z-basis event probabilities per pulse pair (both parties chose Z).
// rand0/rand1: an announcement consistent with both parties arises from two
// or one dark counts; the shared bit is right half the time. correct2: both
// photons arrive in distinct bins. wrong2: same state sent, the bunched pair
// plus one dark count fakes a coincidence; the bits always disagree.
struct ZEventProbs {
  double p_rand0 = 0.0;
  double p_rand1 = 0.0;
  double p_correct2 = 0.0;
  double p_wrong2 = 0.0;

  double total() const { return p_rand0 + p_rand1 + p_correct2 + p_wrong2; }
};

inline ZEventProbs z_event_probs(int n, double p_s, double p_dc) {
  if (n < 2) throw std::invalid_argument("z_event_probs: dimension must be >= 2");
  if (!is_probability(p_s) || !is_probability(p_dc))
    throw std::domain_error("z_event_probs: probabilities outside [0,1]");
  const double nd = static_cast<double>(n);
  const double frac = (nd - 1.0) / nd;
  const double silent = std::pow(1.0 - p_dc, 2.0 * nd - 2.0);
  ZEventProbs z;
  z.p_rand0 = 4.0 * frac * (1.0 - p_s) * (1.0 - p_s) * p_dc * p_dc * silent;
  z.p_rand1 = 4.0 * frac * p_s * (1.0 - p_s) * p_dc * silent;
  z.p_correct2 = frac * p_s * p_s * silent;
  z.p_wrong2 = 2.0 * frac * p_s * p_s * p_dc * silent;
  return z;
}

// Z-basis QBER and raw rate. Random bits disagree half the time, so they
// enter the error tally with weight 1/2.
inline std::pair<double, double> qber_z(const ZEventProbs& z) {
  const double rate = z.total();
  if (rate <= 0.0) throw undefined_qber("qber_z: no key-producing events");
  const double eps = (0.5 * (z.p_rand0 + z.p_rand1) + z.p_wrong2) / rate;
  return {eps, rate};
}

// X-basis totals of correct- and wrong-parity coincidences per pulse pair
// (both parties chose X), merging the 0-, 1- and 2-photon channels.
inline std::pair<double, double> x_event_probs(int n, double p_s, double p_dc,
                                               const XOutcomeProbs& xo) {
  if (n < 2) throw std::invalid_argument("x_event_probs: dimension must be >= 2");
  if (!is_probability(p_s) || !is_probability(p_dc))
    throw std::domain_error("x_event_probs: probabilities outside [0,1]");
  const double nd = static_cast<double>(n);
  const double silent = std::pow(1.0 - p_dc, 2.0 * nd - 2.0);
  const double p0 = (1.0 - p_s) * (1.0 - p_s) * nd * (nd - 1.0) * p_dc * p_dc * silent;
  const double p1 = 2.0 * p_s * (1.0 - p_s) * (nd - 1.0) * p_dc * silent;
  const double cross = (nd - 1.0) * p_dc * xo.p_double;
  const double correct2 = p_s * p_s * silent * (xo.p_good + cross);
  const double wrong2 = p_s * p_s * silent * (xo.p_bad + cross);
  return {p0 + p1 + correct2, p0 + p1 + wrong2};
}

inline std::pair<double, double> qber_x(double p_correct_total, double p_wrong_total) {
  if (p_correct_total < 0.0 || p_wrong_total < 0.0)
    throw std::domain_error("qber_x: negative probability");
  const double rate = p_correct_total + p_wrong_total;
  if (rate <= 0.0) throw undefined_qber("qber_x: no X-basis coincidences");
  return {p_wrong_total / rate, rate};
}

// Secret fraction r = R [1 - H(eps_x) - f H(eps_z)], clamped at zero
// (a negative key length reads as protocol failure, not a rate).
inline double secret_rate(double raw_rate, double eps_x, double eps_z, double inefficiency) {
  if (raw_rate < 0.0) throw std::domain_error("secret_rate: raw rate must be >= 0");
  if (inefficiency < 1.0) throw std::domain_error("secret_rate: inefficiency must be >= 1");
  const double r =
      raw_rate * (1.0 - binary_entropy(eps_x) - inefficiency * binary_entropy(eps_z));
  return r > 0.0 ? r : 0.0;
}

// QBER at which the secret fraction reaches zero when both bases err at the
// same level: solves (1 + f) H(x) = 1 (about 11% at f = 1). Used as the
// default Monte Carlo abort threshold.
inline double default_abort_threshold(double inefficiency) {
  if (inefficiency < 1.0)
    throw std::domain_error("default_abort_threshold: inefficiency must be >= 1");
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((1.0 + inefficiency) * binary_entropy(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Everything the closed-form engine derives for one parameter set.
struct RateBreakdown {
  double p_s = 0.0;
  double dephasing_sum = 0.0;
  double eps_x = 0.0;
  double eps_z = 0.0;
  double r_p_z = 0.0;  // raw rate per pulse pair, both parties on Z
  double r_p_x = 0.0;  // coincidence rate per pulse pair, both parties on X
  double secret_fraction = 0.0;  // per pulse pair, Z raw rate through the key formula
  ZEventProbs z_events;
  XOutcomeProbs x_outcomes;
};

inline RateBreakdown rate_breakdown(const ProtocolConfig& cfg) {
  validate(cfg);
  RateBreakdown out;
  out.p_s = survival_prob(cfg.channel.detector_efficiency, cfg.channel.loss_coeff_db_per_km,
                          cfg.channel.distance_km);
  out.dephasing_sum = dephasing_factor(cfg.dimension, cfg.noise.sigma, cfg.noise.phase_model);
  out.x_outcomes = x_outcome_probs(cfg.dimension, cfg.noise.beta_sq, out.dephasing_sum);
  out.z_events = z_event_probs(cfg.dimension, out.p_s, cfg.detector.dark_count_prob);
  const auto [ez, rz] = qber_z(out.z_events);
  const auto [cx, wx] =
      x_event_probs(cfg.dimension, out.p_s, cfg.detector.dark_count_prob, out.x_outcomes);
  const auto [ex, rx] = qber_x(cx, wx);
  out.eps_z = ez;
  out.r_p_z = rz;
  out.eps_x = ex;
  out.r_p_x = rx;
  out.secret_fraction = secret_rate(rz, ex, ez, cfg.ec_inefficiency);
  return out;
}

}  // namespace hidmdi::analytics
