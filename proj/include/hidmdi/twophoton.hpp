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
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hidmdi/basis.hpp"
#include "hidmdi/detection.hpp"
#include "hidmdi/rng.hpp"
#include "hidmdi/types.hpp"

// Brute-force two-photon oracle. Enumerates the exact output distribution of
// the 50:50 beam-splitter network over the 2N detection modes for arbitrary
// input qudit states, transmission phases and photon distinguishability.
// This enumeration is independent of the closed-form engine and validates
// its parity rule and X-basis outcome probabilities.
//
// Sign convention: per bin k, Alice's amplitude maps to
// (mode(k,0) + mode(k,1))/sqrt(2) and Bob's to (mode(k,0) - mode(k,1))/sqrt(2).
// Only parity statistics are observable, so the assignment of the minus sign
// to Bob is arbitrary but must match the parity rule in detection.hpp, which
// it does: equal ports read plus, opposite ports minus.

namespace hidmdi::twophoton {

struct PhotonState {
  std::vector<cplx> amplitudes;  // length-N bin amplitudes, unit norm
  std::vector<double> phases;    // applied as e^{i theta_k}; empty means zero
};

inline PhotonState make_state(std::span<const cplx> amplitudes) {
  PhotonState st;
  st.amplitudes.assign(amplitudes.begin(), amplitudes.end());
  st.phases.assign(amplitudes.size(), 0.0);
  return st;
}

inline PhotonState basis_state(const BasisSet& basis, int row) {
  return make_state(basis.row(row));
}

inline std::size_t pair_index(int i, int j, int n) {
  // i < j; row-compressed upper triangle
  return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 +
         static_cast<std::size_t>(j - i - 1);
}

// Exact probability mass over every two-photon outcome category, plus
// aggregates taken against the parity each bin pair permits for the
// unphased input amplitudes.
struct OutcomeDistribution {
  int dimension = 0;
  std::vector<double> cross_plus;   // per bin pair i<j, equal-port coincidence
  std::vector<double> cross_minus;  // per bin pair i<j, opposite-port coincidence
  std::vector<double> same_bin;     // per bin, both ports of one bin
  std::vector<double> bunched;      // per mode, both photons in one detector

  double expected_parity_mass = 0.0;    // coincidences on the permitted parity
  double unexpected_parity_mass = 0.0;  // coincidences on the forbidden parity
  double unresolved_parity_mass = 0.0;  // pairs with no deterministic prediction
  double same_bin_mass = 0.0;
  double bunched_mass = 0.0;

  double coincidence_mass() const {
    return expected_parity_mass + unexpected_parity_mass + unresolved_parity_mass;
  }
  double total() const { return coincidence_mass() + same_bin_mass + bunched_mass; }

  void resize(int n) {
    dimension = n;
    cross_plus.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);
    cross_minus.assign(cross_plus.size(), 0.0);
    same_bin.assign(static_cast<std::size_t>(n), 0.0);
    bunched.assign(static_cast<std::size_t>(2) * n, 0.0);
    expected_parity_mass = unexpected_parity_mass = unresolved_parity_mass = 0.0;
    same_bin_mass = bunched_mass = 0.0;
  }
};

namespace detail {

inline void check_normalized(const PhotonState& st) {
  double norm = 0.0;
  for (const auto& a : st.amplitudes) norm += std::norm(a);
  if (std::abs(norm - 1.0) > 1e-9)
    throw std::domain_error("twophoton: input state is not normalized");
  if (!st.phases.empty() && st.phases.size() != st.amplitudes.size())
    throw std::domain_error("twophoton: phase vector length mismatch");
}

inline cplx phased(const PhotonState& st, int k) {
  const cplx a = st.amplitudes[static_cast<std::size_t>(k)];
  if (st.phases.empty()) return a;
  const double th = st.phases[static_cast<std::size_t>(k)];
  return a * cplx{std::cos(th), std::sin(th)};
}

}  // namespace detail

// Fills `out` with the exact distribution; reuses its storage.
inline void network_output_into(OutcomeDistribution& out, const PhotonState& alice,
                                const PhotonState& bob, bool indistinguishable) {
  detail::check_normalized(alice);
  detail::check_normalized(bob);
  const int n = static_cast<int>(alice.amplitudes.size());
  if (static_cast<int>(bob.amplitudes.size()) != n)
    throw std::domain_error("twophoton: dimension mismatch between parties");
  out.resize(n);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // Single-photon mode amplitudes after the network. Alice's photon reaches
  // both ports of its bin with +, Bob's with +/- on port 0/1.
  thread_local std::vector<cplx> av, bv;
  av.assign(static_cast<std::size_t>(2) * n, cplx{});
  bv.assign(static_cast<std::size_t>(2) * n, cplx{});
  for (int k = 0; k < n; ++k) {
    const cplx ea = detail::phased(alice, k) * inv_sqrt2;
    const cplx eb = detail::phased(bob, k) * inv_sqrt2;
    av[static_cast<std::size_t>(2) * k] = ea;
    av[static_cast<std::size_t>(2) * k + 1] = ea;
    bv[static_cast<std::size_t>(2) * k] = eb;
    bv[static_cast<std::size_t>(2) * k + 1] = -eb;
  }

  const int m = 2 * n;
  for (int mu = 0; mu < m; ++mu) {
    // both photons in mode mu
    const double w = indistinguishable ? 2.0 * std::norm(av[mu] * bv[mu])
                                       : std::norm(av[mu]) * std::norm(bv[mu]);
    out.bunched[static_cast<std::size_t>(mu)] += w;
    for (int nu = mu + 1; nu < m; ++nu) {
      const double p = indistinguishable
                           ? std::norm(av[mu] * bv[nu] + av[nu] * bv[mu])
                           : std::norm(av[mu]) * std::norm(bv[nu]) +
                                 std::norm(av[nu]) * std::norm(bv[mu]);
      const int bin_mu = mu / 2;
      const int bin_nu = nu / 2;
      if (bin_mu == bin_nu) {
        out.same_bin[static_cast<std::size_t>(bin_mu)] += p;
      } else if ((mu % 2) == (nu % 2)) {
        out.cross_plus[pair_index(bin_mu, bin_nu, n)] += p;
      } else {
        out.cross_minus[pair_index(bin_mu, bin_nu, n)] += p;
      }
    }
  }

  // Aggregates against the parity permitted by the unphased inputs.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto idx = pair_index(i, j, n);
      const auto pred = expected_parity(alice.amplitudes, bob.amplitudes, i, j);
      if (!pred) {
        out.unresolved_parity_mass += out.cross_plus[idx] + out.cross_minus[idx];
      } else if (*pred == Parity::plus) {
        out.expected_parity_mass += out.cross_plus[idx];
        out.unexpected_parity_mass += out.cross_minus[idx];
      } else {
        out.expected_parity_mass += out.cross_minus[idx];
        out.unexpected_parity_mass += out.cross_plus[idx];
      }
    }
  for (double v : out.same_bin) out.same_bin_mass += v;
  for (double v : out.bunched) out.bunched_mass += v;
}

inline OutcomeDistribution network_output(const PhotonState& alice, const PhotonState& bob,
                                          bool indistinguishable) {
  OutcomeDistribution out;
  network_output_into(out, alice, bob, indistinguishable);
  return out;
}

// One sampled round outcome for the event-level simulator.
struct SampledOutcome {
  EventKind kind = EventKind::no_event;
  int bin_i = -1;  // valid coincidence: bin_i < bin_j
  int bin_j = -1;
  Parity parity = Parity::plus;
  DetectionMode first{};  // the clicked modes realizing the category
  DetectionMode second{};
  bool two_clicks = false;
};

// Draws one outcome from the exact distribution for the given phases and
// distinguishability. Within a coincidence parity the two port patterns are
// equally likely, and the amplitudes make them exactly so.
inline SampledOutcome sample_outcome(const PhotonState& alice, const PhotonState& bob,
                                     bool indistinguishable, std::mt19937_64& rng) {
  thread_local OutcomeDistribution dist;
  network_output_into(dist, alice, bob, indistinguishable);
  const int n = dist.dimension;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng) * dist.total();

  SampledOutcome res;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto idx = pair_index(i, j, n);
      for (int parity = 0; parity < 2; ++parity) {
        const double mass = parity == 0 ? dist.cross_plus[idx] : dist.cross_minus[idx];
        if (u < mass) {
          res.kind = EventKind::valid_coincidence;
          res.bin_i = i;
          res.bin_j = j;
          res.parity = parity == 0 ? Parity::plus : Parity::minus;
          const int port_a = unif(rng) < 0.5 ? 0 : 1;
          const int port_b = parity == 0 ? port_a : 1 - port_a;
          res.first = DetectionMode{i, port_a};
          res.second = DetectionMode{j, port_b};
          res.two_clicks = true;
          return res;
        }
        u -= mass;
      }
    }
  for (int i = 0; i < n; ++i) {
    if (u < dist.same_bin[static_cast<std::size_t>(i)]) {
      res.kind = EventKind::same_bin_coincidence;
      res.bin_i = res.bin_j = i;
      res.first = DetectionMode{i, 0};
      res.second = DetectionMode{i, 1};
      res.two_clicks = true;
      return res;
    }
    u -= dist.same_bin[static_cast<std::size_t>(i)];
  }
  for (int mu = 0; mu < 2 * n; ++mu) {
    if (u < dist.bunched[static_cast<std::size_t>(mu)]) {
      res.kind = EventKind::bunched;
      res.first = DetectionMode{mu / 2, mu % 2};
      res.two_clicks = false;
      return res;
    }
    u -= dist.bunched[static_cast<std::size_t>(mu)];
  }
  // Rounding residue: attribute to the last nonempty category (bunched).
  res.kind = EventKind::bunched;
  res.first = DetectionMode{n - 1, 1};
  res.two_clicks = false;
  return res;
}

// Means with standard errors over Monte Carlo trials.
struct OutcomeSummary {
  OutcomeDistribution mean;
  OutcomeDistribution std_error;
  std::uint64_t trials = 0;
};

namespace detail {

struct Accumulator {
  OutcomeDistribution sum;
  OutcomeDistribution sumsq;

  void init(int n) {
    sum.resize(n);
    sumsq.resize(n);
  }
  static void add_vec(std::vector<double>& s, std::vector<double>& s2,
                      const std::vector<double>& x) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      s[k] += x[k];
      s2[k] += x[k] * x[k];
    }
  }
  static void add_scalar(double& s, double& s2, double x) {
    s += x;
    s2 += x * x;
  }
  void add(const OutcomeDistribution& d) {
    add_vec(sum.cross_plus, sumsq.cross_plus, d.cross_plus);
    add_vec(sum.cross_minus, sumsq.cross_minus, d.cross_minus);
    add_vec(sum.same_bin, sumsq.same_bin, d.same_bin);
    add_vec(sum.bunched, sumsq.bunched, d.bunched);
    add_scalar(sum.expected_parity_mass, sumsq.expected_parity_mass, d.expected_parity_mass);
    add_scalar(sum.unexpected_parity_mass, sumsq.unexpected_parity_mass,
               d.unexpected_parity_mass);
    add_scalar(sum.unresolved_parity_mass, sumsq.unresolved_parity_mass,
               d.unresolved_parity_mass);
    add_scalar(sum.same_bin_mass, sumsq.same_bin_mass, d.same_bin_mass);
    add_scalar(sum.bunched_mass, sumsq.bunched_mass, d.bunched_mass);
  }
};

inline void merge_vec(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
}

inline void merge_dist(OutcomeDistribution& dst, const OutcomeDistribution& src) {
  merge_vec(dst.cross_plus, src.cross_plus);
  merge_vec(dst.cross_minus, src.cross_minus);
  merge_vec(dst.same_bin, src.same_bin);
  merge_vec(dst.bunched, src.bunched);
  dst.expected_parity_mass += src.expected_parity_mass;
  dst.unexpected_parity_mass += src.unexpected_parity_mass;
  dst.unresolved_parity_mass += src.unresolved_parity_mass;
  dst.same_bin_mass += src.same_bin_mass;
  dst.bunched_mass += src.bunched_mass;
}

inline void finalize_stats(const OutcomeDistribution& sum, const OutcomeDistribution& sumsq,
                           std::uint64_t trials, OutcomeDistribution& mean,
                           OutcomeDistribution& se) {
  const double t = static_cast<double>(trials);
  auto fin_vec = [&](const std::vector<double>& s, const std::vector<double>& s2,
                     std::vector<double>& m, std::vector<double>& e) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      m[k] = s[k] / t;
      const double var = std::max(0.0, s2[k] / t - m[k] * m[k]);
      e[k] = std::sqrt(var / t);
    }
  };
  auto fin_scalar = [&](double s, double s2, double& m, double& e) {
    m = s / t;
    const double var = std::max(0.0, s2 / t - m * m);
    e = std::sqrt(var / t);
  };
  mean.resize(sum.dimension);
  se.resize(sum.dimension);
  fin_vec(sum.cross_plus, sumsq.cross_plus, mean.cross_plus, se.cross_plus);
  fin_vec(sum.cross_minus, sumsq.cross_minus, mean.cross_minus, se.cross_minus);
  fin_vec(sum.same_bin, sumsq.same_bin, mean.same_bin, se.same_bin);
  fin_vec(sum.bunched, sumsq.bunched, mean.bunched, se.bunched);
  fin_scalar(sum.expected_parity_mass, sumsq.expected_parity_mass, mean.expected_parity_mass,
             se.expected_parity_mass);
  fin_scalar(sum.unexpected_parity_mass, sumsq.unexpected_parity_mass,
             mean.unexpected_parity_mass, se.unexpected_parity_mass);
  fin_scalar(sum.unresolved_parity_mass, sumsq.unresolved_parity_mass,
             mean.unresolved_parity_mass, se.unresolved_parity_mass);
  fin_scalar(sum.same_bin_mass, sumsq.same_bin_mass, mean.same_bin_mass, se.same_bin_mass);
  fin_scalar(sum.bunched_mass, sumsq.bunched_mass, mean.bunched_mass, se.bunched_mass);
}

}  // namespace detail

// Monte Carlo average of network_output over phase draws of the configured
// model and Bernoulli(beta_sq) draws of the interference flag. Trials are
// split across workers on independent streams; the merge is a fixed-order
// sum, so results are reproducible given (seed, workers).
inline OutcomeSummary sample_categories(const PhotonState& alice, const PhotonState& bob,
                                        const NoiseParams& noise, std::uint64_t trials,
                                        std::uint64_t seed, int workers = 1) {
  if (trials < 1) throw std::invalid_argument("sample_categories: trials must be >= 1");
  if (workers < 1) throw std::invalid_argument("sample_categories: workers must be >= 1");
  detail::check_normalized(alice);
  detail::check_normalized(bob);
  const int n = static_cast<int>(alice.amplitudes.size());

  std::vector<detail::Accumulator> acc(static_cast<std::size_t>(workers));
  auto run_worker = [&](int w) {
    auto rng = make_stream_rng(seed, static_cast<std::uint64_t>(w));
    std::uint64_t count = trials / workers + (static_cast<std::uint64_t>(w) < trials % workers);
    PhotonState pa = alice;
    PhotonState pb = bob;
    if (pa.phases.empty()) pa.phases.assign(static_cast<std::size_t>(n), 0.0);
    if (pb.phases.empty()) pb.phases.assign(static_cast<std::size_t>(n), 0.0);
    const std::vector<double> base_a = pa.phases;
    const std::vector<double> base_b = pb.phases;
    std::vector<double> draw(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    OutcomeDistribution dist;
    acc[static_cast<std::size_t>(w)].init(n);
    for (std::uint64_t t = 0; t < count; ++t) {
      sample_phases(noise.phase_model, noise.sigma, draw, rng);
      for (int k = 0; k < n; ++k) pa.phases[static_cast<std::size_t>(k)] = base_a[k] + draw[k];
      sample_phases(noise.phase_model, noise.sigma, draw, rng);
      for (int k = 0; k < n; ++k) pb.phases[static_cast<std::size_t>(k)] = base_b[k] + draw[k];
      const bool indist = unif(rng) < noise.beta_sq;
      network_output_into(dist, pa, pb, indist);
      acc[static_cast<std::size_t>(w)].add(dist);
    }
  };

  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
    for (auto& th : pool) th.join();
  }

  detail::Accumulator total;
  total.init(n);
  for (const auto& a : acc) {
    detail::merge_dist(total.sum, a.sum);
    detail::merge_dist(total.sumsq, a.sumsq);
  }
  OutcomeSummary summary;
  summary.trials = trials;
  detail::finalize_stats(total.sum, total.sumsq, trials, summary.mean, summary.std_error);
  return summary;
}

}  // namespace hidmdi::twophoton
