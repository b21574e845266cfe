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
#include <string>

namespace hidmdi {

// Largest supported qudit dimension. Detection-mode bitmasks and the
// event-level simulator rely on 2N <= 128.
inline constexpr int max_dimension = 64;

enum class Encoding { space, time };

enum class BasisKind { z, x };

// Phase-noise models for the relative phases accumulated in transmission.
//   space_homogeneous : every inter-bin relative phase has variance sigma^2
//   time_white        : random walk between slots, Var(i,j) = |i-j| sigma^2
//   time_drift        : linear interferometer drift, Var(i,j) = |i-j|^2 sigma^2
// (variances quoted per party)
enum class PhaseModel { space_homogeneous, time_white, time_drift };

struct ChannelParams {
  double distance_km = 0.0;
  double loss_coeff_db_per_km = 0.2;
  double detector_efficiency = 0.145;
};

struct NoiseParams {
  double sigma = 0.0;     // phase-noise scale, radians
  double beta_sq = 1.0;   // probability that the two photons interfere correctly
  PhaseModel phase_model = PhaseModel::space_homogeneous;
};

struct DetectorParams {
  double dark_count_prob = 0.0;  // per detector per gate
  double dead_time_s = 0.0;
};

struct TimingParams {
  double pulse_sep_s = 200e-12;
  double min_pulse_sep_s = 200e-12;

  // Pulses emitted during one dead time.
  double pulses_per_deadtime(double dead_time_s) const {
    return dead_time_s / pulse_sep_s;
  }
};

struct ProtocolConfig {
  int dimension = 2;
  Encoding encoding = Encoding::space;
  double basis_prob = 0.5;  // probability of choosing the key (Z) basis
  ChannelParams channel;
  NoiseParams noise;
  DetectorParams detector;
  TimingParams timing;
  double ec_inefficiency = 1.0;  // error-correction inefficiency f >= 1
};

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Validates every structural invariant of a config; throws
// std::invalid_argument naming the offending field.
inline void validate(const ProtocolConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (cfg.dimension < 2) fail("dimension must be >= 2");
  if (cfg.dimension > max_dimension)
    fail("dimension must be <= " + std::to_string(max_dimension));
  if (!(cfg.basis_prob > 0.0 && cfg.basis_prob < 1.0)) fail("basis_prob must lie in (0,1)");
  if (cfg.channel.distance_km < 0.0) fail("distance_km must be >= 0");
  if (cfg.channel.loss_coeff_db_per_km < 0.0) fail("loss_coeff_db_per_km must be >= 0");
  if (!(cfg.channel.detector_efficiency > 0.0 && cfg.channel.detector_efficiency <= 1.0))
    fail("detector_efficiency must lie in (0,1]");
  if (cfg.noise.sigma < 0.0) fail("sigma must be >= 0");
  if (!is_probability(cfg.noise.beta_sq)) fail("beta_sq must lie in [0,1]");
  if (!(cfg.detector.dark_count_prob >= 0.0 && cfg.detector.dark_count_prob < 1.0))
    fail("dark_count_prob must lie in [0,1)");
  if (cfg.detector.dead_time_s < 0.0) fail("dead_time_s must be >= 0");
  if (!(cfg.timing.min_pulse_sep_s > 0.0)) fail("min_pulse_sep_s must be > 0");
  if (cfg.timing.pulse_sep_s < cfg.timing.min_pulse_sep_s)
    fail("pulse_sep_s must be >= min_pulse_sep_s");
  if (cfg.ec_inefficiency < 1.0) fail("ec_inefficiency must be >= 1");
}

// Thrown when a QBER is requested for a rate of zero sifted events.
class undefined_qber : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Thrown when a Monte Carlo session lacks the statistics a caller asked for.
class insufficient_statistics : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hidmdi
