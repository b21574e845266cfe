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
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hidmdi/analytics.hpp"
#include "hidmdi/basis.hpp"
#include "hidmdi/detection.hpp"
#include "hidmdi/rng.hpp"
#include "hidmdi/twophoton.hpp"
#include "hidmdi/types.hpp"

// Event-level Monte Carlo of the full protocol: basis and state choice,
// transmission loss, two-photon interference sampling, dark counts,
// announcement classification, sifting, QBER estimation and key-length
// accounting. Error correction and privacy amplification are modeled as the
// key-length formula only. A separate timeline simulation covers detector
// dead time.

namespace hidmdi::sim {

struct RoundRecord {
  BasisKind alice_basis = BasisKind::z;
  BasisKind bob_basis = BasisKind::z;
  int alice_index = 0;
  int bob_index = 0;
  DetectionEvent event;
  bool sifted = false;
  std::optional<int> key_bit_alice;
  std::optional<int> key_bit_bob;
  std::optional<bool> error_flag;  // X rounds: observed parity disagrees with prediction
};

enum class ErrorSource { empirical, analytic };

struct SessionStats {
  std::uint64_t rounds_total = 0;
  std::uint64_t rounds_both_z = 0;
  std::uint64_t rounds_both_x = 0;
  std::uint64_t coincidences = 0;  // announced valid coincidences, any basis combination
  std::uint64_t sifted_z = 0;
  std::uint64_t sifted_x = 0;
  std::uint64_t wrong_z = 0;
  std::uint64_t wrong_x = 0;
  double eps_z_hat = std::numeric_limits<double>::quiet_NaN();
  double eps_x_hat = std::numeric_limits<double>::quiet_NaN();
  double eps_z_se = std::numeric_limits<double>::quiet_NaN();
  double eps_x_se = std::numeric_limits<double>::quiet_NaN();
  // For dimensions without a real-sign X basis, parity prediction is not
  // deterministic; the closed-form eps_x substitutes and is flagged here.
  ErrorSource eps_x_source = ErrorSource::empirical;
  double eps_x_used = std::numeric_limits<double>::quiet_NaN();
  double abort_threshold = 0.0;
  bool aborted = false;
  bool insufficient = false;  // a basis ended with zero sifted rounds
  std::uint64_t key_length = 0;
};

namespace detail {

// Binomial(n_modes, p) dark-click count by inverse transform; equivalent to
// independent per-mode draws but one uniform on the overwhelmingly common
// zero-count path.
inline int sample_dark_count(int n_modes, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return 0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  double pmf = std::pow(1.0 - p, n_modes);
  int k = 0;
  while (u >= pmf && k < n_modes) {
    u -= pmf;
    pmf *= static_cast<double>(n_modes - k) / static_cast<double>(k + 1) * p / (1.0 - p);
    ++k;
  }
  return k;
}

// Per-worker round machinery: prebuilt bases and reusable scratch.
class RoundEngine {
 public:
  explicit RoundEngine(const ProtocolConfig& cfg)
      : cfg_(cfg),
        n_(cfg.dimension),
        p_s_(analytics::survival_prob(cfg.channel.detector_efficiency,
                                      cfg.channel.loss_coeff_db_per_km,
                                      cfg.channel.distance_km)),
        x_basis_(build_basis(cfg.dimension, BasisKind::x)) {
    alice_state_.amplitudes.assign(static_cast<std::size_t>(n_), cplx{});
    alice_state_.phases.assign(static_cast<std::size_t>(n_), 0.0);
    bob_state_.amplitudes.assign(static_cast<std::size_t>(n_), cplx{});
    bob_state_.phases.assign(static_cast<std::size_t>(n_), 0.0);
    mode_scratch_.reserve(static_cast<std::size_t>(2 * n_));
    dark_scratch_.resize(static_cast<std::size_t>(2 * n_));
  }

  const BasisSet& x_basis() const { return x_basis_; }
  double survival() const { return p_s_; }

  RoundRecord run_round(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, n_ - 1);

    RoundRecord rec;
    rec.alice_basis = unif(rng) < cfg_.basis_prob ? BasisKind::z : BasisKind::x;
    rec.bob_basis = unif(rng) < cfg_.basis_prob ? BasisKind::z : BasisKind::x;
    rec.alice_index = pick(rng);
    rec.bob_index = pick(rng);

    const bool alice_arrives = unif(rng) < p_s_;
    const bool bob_arrives = unif(rng) < p_s_;

    mode_scratch_.clear();
    if (alice_arrives && bob_arrives) {
      load_state(alice_state_, rec.alice_basis, rec.alice_index, rng);
      load_state(bob_state_, rec.bob_basis, rec.bob_index, rng);
      const bool indist = unif(rng) < cfg_.noise.beta_sq;
      const auto outcome = twophoton::sample_outcome(alice_state_, bob_state_, indist, rng);
      mode_scratch_.push_back(outcome.first);
      if (outcome.two_clicks) mode_scratch_.push_back(outcome.second);
    } else if (alice_arrives || bob_arrives) {
      const BasisKind basis = alice_arrives ? rec.alice_basis : rec.bob_basis;
      const int index = alice_arrives ? rec.alice_index : rec.bob_index;
      mode_scratch_.push_back(route_single(basis, index, rng));
    }

    add_dark_counts(rng);
    rec.event = classify_event(mode_scratch_, n_);

    if (rec.event.kind == EventKind::valid_coincidence) sift(rec, rng);
    return rec;
  }

 private:
  void load_state(twophoton::PhotonState& st, BasisKind basis, int index,
                  std::mt19937_64& rng) {
    if (basis == BasisKind::z) {
      std::fill(st.amplitudes.begin(), st.amplitudes.end(), cplx{});
      st.amplitudes[static_cast<std::size_t>(index)] = 1.0;
    } else {
      const auto row = x_basis_.row(index);
      std::copy(row.begin(), row.end(), st.amplitudes.begin());
    }
    sample_phases(cfg_.noise.phase_model, cfg_.noise.sigma,
                  {st.phases.data(), st.phases.size()}, rng);
  }

  DetectionMode route_single(BasisKind basis, int index, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int bin = index;
    if (basis == BasisKind::x) {
      // X rows carry equal weight on every bin; walk the cumulative anyway
      // so the routing stays exact for any state.
      double u = unif(rng);
      const auto row = x_basis_.row(index);
      bin = n_ - 1;
      for (int k = 0; k < n_; ++k) {
        const double w = std::norm(row[static_cast<std::size_t>(k)]);
        if (u < w) {
          bin = k;
          break;
        }
        u -= w;
      }
    }
    const int port = unif(rng) < 0.5 ? 0 : 1;
    return DetectionMode{bin, port};
  }

  void add_dark_counts(std::mt19937_64& rng) {
    const double p_dc = cfg_.detector.dark_count_prob;
    if (p_dc <= 0.0) return;
    const int m = 2 * n_;
    const int k = sample_dark_count(m, p_dc, rng);
    if (k == 0) return;
    for (int i = 0; i < m; ++i) dark_scratch_[static_cast<std::size_t>(i)] = i;
    for (int pickd = 0; pickd < k; ++pickd) {
      std::uniform_int_distribution<int> rest(pickd, m - 1);
      std::swap(dark_scratch_[static_cast<std::size_t>(pickd)],
                dark_scratch_[static_cast<std::size_t>(rest(rng))]);
      const int idx = dark_scratch_[static_cast<std::size_t>(pickd)];
      const DetectionMode mode{idx / 2, idx % 2};
      bool already = false;
      for (const auto& c : mode_scratch_)
        if (c == mode) already = true;
      if (!already) mode_scratch_.push_back(mode);
    }
  }

  void sift(RoundRecord& rec, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int lo = rec.event.bin_lo;
    const int hi = rec.event.bin_hi;
    if (rec.alice_basis == BasisKind::z && rec.bob_basis == BasisKind::z) {
      rec.sifted = true;
      // Alice: low announced bin means 0; Bob complements so honest rounds
      // agree. An index outside the announcement leaves only a coin flip.
      if (rec.alice_index == lo)
        rec.key_bit_alice = 0;
      else if (rec.alice_index == hi)
        rec.key_bit_alice = 1;
      else
        rec.key_bit_alice = unif(rng) < 0.5 ? 0 : 1;
      if (rec.bob_index == lo)
        rec.key_bit_bob = 1;
      else if (rec.bob_index == hi)
        rec.key_bit_bob = 0;
      else
        rec.key_bit_bob = unif(rng) < 0.5 ? 0 : 1;
    } else if (rec.alice_basis == BasisKind::x && rec.bob_basis == BasisKind::x) {
      if (!x_basis_.real_entries) return;  // parity not predictable: unsiftable
      rec.sifted = true;
      const auto predicted =
          expected_parity(x_basis_.row(rec.alice_index), x_basis_.row(rec.bob_index), lo, hi);
      rec.error_flag = !predicted || rec.event.parity != *predicted;
    }
  }

  ProtocolConfig cfg_;
  int n_;
  double p_s_;
  BasisSet x_basis_;
  twophoton::PhotonState alice_state_;
  twophoton::PhotonState bob_state_;
  std::vector<DetectionMode> mode_scratch_;
  std::vector<int> dark_scratch_;
};

struct Counters {
  std::uint64_t rounds = 0;
  std::uint64_t both_z = 0;
  std::uint64_t both_x = 0;
  std::uint64_t coincidences = 0;
  std::uint64_t sifted_z = 0;
  std::uint64_t sifted_x = 0;
  std::uint64_t wrong_z = 0;
  std::uint64_t wrong_x = 0;

  void absorb(const RoundRecord& rec) {
    ++rounds;
    const bool zz = rec.alice_basis == BasisKind::z && rec.bob_basis == BasisKind::z;
    const bool xx = rec.alice_basis == BasisKind::x && rec.bob_basis == BasisKind::x;
    if (zz) ++both_z;
    if (xx) ++both_x;
    if (rec.event.kind == EventKind::valid_coincidence) ++coincidences;
    if (!rec.sifted) return;
    if (zz) {
      ++sifted_z;
      if (rec.key_bit_alice != rec.key_bit_bob) ++wrong_z;
    } else if (xx) {
      ++sifted_x;
      if (rec.error_flag && *rec.error_flag) ++wrong_x;
    }
  }
  void merge(const Counters& o) {
    rounds += o.rounds;
    both_z += o.both_z;
    both_x += o.both_x;
    coincidences += o.coincidences;
    sifted_z += o.sifted_z;
    sifted_x += o.sifted_x;
    wrong_z += o.wrong_z;
    wrong_x += o.wrong_x;
  }
};

inline double binomial_se(std::uint64_t wrong, std::uint64_t total) {
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  const double p = static_cast<double>(wrong) / static_cast<double>(total);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(total));
}

}  // namespace detail

// One protocol round against a fresh engine. Prefer run_session for bulk
// statistics; this entry point exists for step-level inspection.
inline RoundRecord run_round(const ProtocolConfig& cfg, std::mt19937_64& rng) {
  validate(cfg);
  detail::RoundEngine engine(cfg);
  return engine.run_round(rng);
}

// Runs `rounds` protocol rounds, split across `workers` independent streams,
// and aggregates counts into session statistics. Aggregation is a sum of
// counters, so the result is reproducible bit for bit given (seed, workers).
// abort_threshold <= 0 selects the default from the key-rate formula.
inline SessionStats run_session(const ProtocolConfig& cfg, std::uint64_t rounds,
                                double abort_threshold, std::uint64_t seed, int workers = 1) {
  validate(cfg);
  if (rounds < 1) throw std::invalid_argument("run_session: rounds must be >= 1");
  if (workers < 1) throw std::invalid_argument("run_session: workers must be >= 1");
  if (abort_threshold <= 0.0)
    abort_threshold = analytics::default_abort_threshold(cfg.ec_inefficiency);

  std::vector<detail::Counters> counters(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto worker_body = [&](int w) {
    try {
      detail::RoundEngine engine(cfg);
      auto rng = make_stream_rng(seed, static_cast<std::uint64_t>(w));
      const std::uint64_t count =
          rounds / workers + (static_cast<std::uint64_t>(w) < rounds % workers);
      auto& local = counters[static_cast<std::size_t>(w)];
      for (std::uint64_t r = 0; r < count; ++r) local.absorb(engine.run_round(rng));
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    worker_body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_body, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  detail::Counters total;
  for (const auto& c : counters) total.merge(c);

  SessionStats st;
  st.rounds_total = total.rounds;
  st.rounds_both_z = total.both_z;
  st.rounds_both_x = total.both_x;
  st.coincidences = total.coincidences;
  st.sifted_z = total.sifted_z;
  st.sifted_x = total.sifted_x;
  st.wrong_z = total.wrong_z;
  st.wrong_x = total.wrong_x;
  st.abort_threshold = abort_threshold;

  const bool real_x = hidmdi::detail::is_power_of_two(cfg.dimension);
  if (total.sifted_z > 0) {
    st.eps_z_hat = static_cast<double>(total.wrong_z) / static_cast<double>(total.sifted_z);
    st.eps_z_se = detail::binomial_se(total.wrong_z, total.sifted_z);
  }
  if (total.sifted_x > 0) {
    st.eps_x_hat = static_cast<double>(total.wrong_x) / static_cast<double>(total.sifted_x);
    st.eps_x_se = detail::binomial_se(total.wrong_x, total.sifted_x);
  }
  if (real_x) {
    st.eps_x_source = ErrorSource::empirical;
    st.eps_x_used = st.eps_x_hat;
  } else {
    st.eps_x_source = ErrorSource::analytic;
    st.eps_x_used = analytics::rate_breakdown(cfg).eps_x;
  }

  st.insufficient = total.sifted_z == 0 || (real_x && total.sifted_x == 0);
  if (!st.insufficient) {
    st.aborted = st.eps_x_used > abort_threshold;
    const double fraction = 1.0 - analytics::binary_entropy(st.eps_x_used) -
                            cfg.ec_inefficiency * analytics::binary_entropy(st.eps_z_hat);
    if (fraction > 0.0)
      st.key_length =
          static_cast<std::uint64_t>(std::floor(static_cast<double>(total.sifted_z) * fraction));
  }
  return st;
}

// Dead-time timeline statistics from an event-level slot simulation.
struct TimelineStats {
  std::uint64_t pulses_sent = 0;
  std::uint64_t raw_coincidences = 0;
  double deadtime_windows = 0.0;           // simulated duration over tau_d
  double raw_bits_per_deadtime = 0.0;      // measured counterpart of the model value
  std::vector<double> dead_fraction;       // per detector
};

// Non-paralyzable dead-time timeline: a registering click blinds its
// detector for floor(tau_d/T_p) subsequent slots; arrivals during the dark
// stretch neither register nor extend it. Coincidences need both clicks
// registered within one protocol application (a slot for space, a train of
// N slots for time).
inline TimelineStats simulate_deadtime_timeline(const ProtocolConfig& cfg,
                                                std::uint64_t total_pulses,
                                                std::uint64_t seed) {
  validate(cfg);
  if (cfg.detector.dead_time_s <= 0.0)
    throw std::invalid_argument("simulate_deadtime_timeline: dead time must be > 0");
  const int n = cfg.dimension;
  const int n_det = cfg.encoding == Encoding::space ? 2 * n : 2;
  const double t_p = cfg.timing.pulse_sep_s;
  const double p_s = analytics::survival_prob(cfg.channel.detector_efficiency,
                                              cfg.channel.loss_coeff_db_per_km,
                                              cfg.channel.distance_km);
  const double p_dc = cfg.detector.dark_count_prob;
  const std::uint64_t dead_slots =
      static_cast<std::uint64_t>(std::floor(cfg.detector.dead_time_s / t_p));

  auto rng = make_stream_rng(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);

  std::vector<std::uint64_t> dead_until(static_cast<std::size_t>(n_det), 0);
  std::vector<std::uint64_t> dead_slots_total(static_cast<std::size_t>(n_det), 0);

  // Registered clicks of the current application, as (bin, port).
  std::vector<DetectionMode> registered;
  registered.reserve(8);

  TimelineStats stats;
  stats.dead_fraction.assign(static_cast<std::size_t>(n_det), 0.0);

  const std::uint64_t slots_per_app = cfg.encoding == Encoding::space
                                          ? 1
                                          : static_cast<std::uint64_t>(n);
  const std::uint64_t apps = total_pulses / slots_per_app;
  const std::uint64_t sim_slots = apps * slots_per_app;

  // Attempt a click; registers only on a live detector.
  auto attempt = [&](std::uint64_t slot, int det, int bin) {
    auto& du = dead_until[static_cast<std::size_t>(det)];
    if (slot < du) return;
    du = slot + 1 + dead_slots;
    const std::uint64_t end = std::min(du, sim_slots);
    if (end > slot + 1)
      dead_slots_total[static_cast<std::size_t>(det)] += end - (slot + 1);
    registered.push_back(DetectionMode{bin, cfg.encoding == Encoding::space ? det % 2 : det});
  };

  for (std::uint64_t app = 0; app < apps; ++app) {
    const std::uint64_t base_slot = app * slots_per_app;
    registered.clear();

    const int a = pick(rng);
    const int b = pick(rng);
    const bool a_arrives = unif(rng) < p_s;
    const bool b_arrives = unif(rng) < p_s;

    // Photon arrival pattern under key-basis statistics: equal states bunch
    // (or, when distinguishable, split across the two ports of one bin),
    // distinct states route independently.
    struct Arrival {
      int bin;
      int port;
    };
    Arrival arrivals[2];
    int n_arrivals = 0;
    if (a_arrives && b_arrives) {
      if (a == b) {
        const bool indist = unif(rng) < cfg.noise.beta_sq;
        const int port_a = unif(rng) < 0.5 ? 0 : 1;
        if (indist) {
          arrivals[n_arrivals++] = {a, port_a};  // pair lands on one detector
        } else {
          const int port_b = unif(rng) < 0.5 ? 0 : 1;
          arrivals[n_arrivals++] = {a, port_a};
          if (port_b != port_a) arrivals[n_arrivals++] = {a, port_b};
        }
      } else {
        arrivals[n_arrivals++] = {a, unif(rng) < 0.5 ? 0 : 1};
        arrivals[n_arrivals++] = {b, unif(rng) < 0.5 ? 0 : 1};
      }
    } else if (a_arrives) {
      arrivals[n_arrivals++] = {a, unif(rng) < 0.5 ? 0 : 1};
    } else if (b_arrives) {
      arrivals[n_arrivals++] = {b, unif(rng) < 0.5 ? 0 : 1};
    }

    if (cfg.encoding == Encoding::space) {
      for (int i = 0; i < n_arrivals; ++i)
        attempt(base_slot, 2 * arrivals[i].bin + arrivals[i].port, arrivals[i].bin);
      if (p_dc > 0.0) {
        for (int det = 0; det < n_det; ++det)
          if (unif(rng) < p_dc) {
            bool dup = false;
            for (const auto& r : registered)
              if (r.bin == det / 2 && r.port == det % 2) dup = true;
            if (!dup) attempt(base_slot, det, det / 2);
          }
      }
    } else {
      // time: the bin is the slot offset inside the train
      for (std::uint64_t off = 0; off < slots_per_app; ++off) {
        const std::uint64_t slot = base_slot + off;
        for (int i = 0; i < n_arrivals; ++i)
          if (arrivals[i].bin == static_cast<int>(off))
            attempt(slot, arrivals[i].port, arrivals[i].bin);
        if (p_dc > 0.0) {
          for (int det = 0; det < 2; ++det)
            if (unif(rng) < p_dc) {
              bool dup = false;
              for (const auto& r : registered)
                if (r.bin == static_cast<int>(off) && r.port == det) dup = true;
              if (!dup) attempt(slot, det, static_cast<int>(off));
            }
        }
      }
    }

    const auto ev = classify_event(registered, n);
    if (ev.kind == EventKind::valid_coincidence) ++stats.raw_coincidences;
  }

  stats.pulses_sent = sim_slots;
  const double duration = static_cast<double>(stats.pulses_sent) * t_p;
  stats.deadtime_windows = duration / cfg.detector.dead_time_s;
  stats.raw_bits_per_deadtime =
      stats.deadtime_windows > 0.0
          ? static_cast<double>(stats.raw_coincidences) / stats.deadtime_windows
          : 0.0;
  for (int d = 0; d < n_det; ++d)
    stats.dead_fraction[static_cast<std::size_t>(d)] =
        static_cast<double>(dead_slots_total[static_cast<std::size_t>(d)]) /
        static_cast<double>(stats.pulses_sent);
  return stats;
}

// Empirical counterpart of the closed-form rate breakdown, with binomial
// standard errors on every estimated quantity.
struct EmpiricalRates {
  double eps_z = 0.0, eps_z_se = 0.0;
  double eps_x = 0.0, eps_x_se = 0.0;
  ErrorSource eps_x_source = ErrorSource::empirical;
  double r_p_z = 0.0, r_p_z_se = 0.0;  // per pulse pair given both chose Z
  double r_p_x = 0.0, r_p_x_se = 0.0;
  double secret_fraction = 0.0;
};

inline EmpiricalRates estimate_rates(const SessionStats& st, const ProtocolConfig& cfg) {
  validate(cfg);
  if (st.aborted) throw insufficient_statistics("estimate_rates: session aborted");
  if (st.sifted_z == 0 || st.rounds_both_z == 0 || st.rounds_both_x == 0)
    throw insufficient_statistics("estimate_rates: no sifted statistics");
  const bool real_x = hidmdi::detail::is_power_of_two(cfg.dimension);
  if (real_x && st.sifted_x == 0)
    throw insufficient_statistics("estimate_rates: no sifted X rounds");

  EmpiricalRates er;
  er.eps_z = st.eps_z_hat;
  er.eps_z_se = st.eps_z_se;
  er.eps_x = st.eps_x_used;
  er.eps_x_se = real_x ? st.eps_x_se : 0.0;
  er.eps_x_source = st.eps_x_source;
  er.r_p_z = static_cast<double>(st.sifted_z) / static_cast<double>(st.rounds_both_z);
  er.r_p_z_se = detail::binomial_se(st.sifted_z, st.rounds_both_z);
  er.r_p_x = static_cast<double>(st.sifted_x) / static_cast<double>(st.rounds_both_x);
  er.r_p_x_se = detail::binomial_se(st.sifted_x, st.rounds_both_x);
  er.secret_fraction =
      analytics::secret_rate(er.r_p_z, er.eps_x, er.eps_z, cfg.ec_inefficiency);
  return er;
}

}  // namespace hidmdi::sim
