// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.
//
// Statistical checks compare Monte Carlo estimates against the closed-form
// engine at the three-standard-error level. Where an estimator exists, its
// standard error is max(empirical, model) — the empirical side keeps the
// test meaningful at few-count statistics, the model side keeps zero-count
// outcomes honest. Estimates whose expected event count is below 10 carry
// no usable statistics and are reported as skipped.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hidmdi/hidmdi.hpp"

using namespace hidmdi;

namespace {

int g_failures = 0;

struct Criterion {
  std::string label;
  bool ok = true;
  std::vector<std::string> notes;

  explicit Criterion(std::string l) : label(std::move(l)) {}
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back(what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
  void finish() const {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", label.c_str());
    for (const auto& n : notes) std::printf("       %s\n", n.c_str());
    if (!ok) ++g_failures;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double analytic_eps_x(int n, double sigma, PhaseModel model, double beta_sq, double p_s,
                      double p_dc) {
  const auto xo =
      analytics::x_outcome_probs(n, beta_sq, analytics::dephasing_factor(n, sigma, model));
  const auto [c, w] = analytics::x_event_probs(n, p_s, p_dc, xo);
  return analytics::qber_x(c, w).first;
}

ProtocolConfig reference_config(int n, Encoding enc, double distance_km) {
  ProtocolConfig cfg;
  cfg.dimension = n;
  cfg.encoding = enc;
  cfg.basis_prob = 0.5;
  cfg.channel = {distance_km, 0.2, 0.145};
  cfg.noise = {enc == Encoding::space ? 0.325 : 0.175, 0.85,
               analytics::default_phase_model(enc)};
  cfg.detector = {1e-6, 20e-9};
  cfg.timing = {0.2e-9, 0.2e-9};
  cfg.ec_inefficiency = 1.0;
  return cfg;
}

// |observed - model| against three combined binomial standard errors.
bool within_3se(double observed, double model, std::uint64_t trials) {
  const double se_model = std::sqrt(model * (1.0 - model) / static_cast<double>(trials));
  const double se_emp =
      std::sqrt(observed * (1.0 - observed) / static_cast<double>(trials));
  const double se = std::max(se_model, se_emp);
  if (se == 0.0) return observed == model;
  return std::abs(observed - model) <= 3.0 * se;
}

void criterion_1_sigma_calibration() {
  Criterion c("1. dephasing calibration: eps_x(sigma) at N=2, no dark counts");
  const double eps_space =
      analytic_eps_x(2, 0.325, PhaseModel::space_homogeneous, 1.0, 0.145, 0.0);
  const double eps_time = analytic_eps_x(2, 0.175, PhaseModel::time_white, 1.0, 0.145, 0.0);
  c.expect(std::abs(eps_space - 0.050) <= 0.001,
           "space eps_x = " + fmt(eps_space) + " not within 0.050 +- 0.001");
  c.expect(std::abs(eps_time - 0.015) <= 0.001,
           "time eps_x = " + fmt(eps_time) + " not within 0.015 +- 0.001");
  c.note("space " + fmt(eps_space) + ", time " + fmt(eps_time));
  c.finish();
}

void criterion_2_sifting_advantage() {
  Criterion c("2. sifted-rate advantage 2(N-1)/N over N=2, exact at zero dark counts");
  const double p_s = 0.145;
  const double base = analytics::qber_z(analytics::z_event_probs(2, p_s, 0.0)).second;
  for (int n = 2; n <= 16; ++n) {
    const double rate = analytics::qber_z(analytics::z_event_probs(n, p_s, 0.0)).second;
    const double want = 2.0 * (n - 1.0) / n;
    const double rel = std::abs(rate / base / want - 1.0);
    c.expect(rel <= 1e-12,
             "N=" + std::to_string(n) + " ratio off by " + fmt(rel) + " relative");
  }
  c.finish();
}

void criterion_3_distinguishability_floor() {
  Criterion c("3. distinguishability floor (1-|beta|^2)/2 = 0.075, analytic + Monte Carlo");
  for (int n : {2, 3, 4, 8}) {
    const double eps =
        analytic_eps_x(n, 0.0, PhaseModel::space_homogeneous, 0.85, 0.5, 0.0);
    c.expect(std::abs(eps - 0.075) <= 1e-12,
             "analytic N=" + std::to_string(n) + ": " + fmt(eps));
  }
  for (int n : {2, 4, 8}) {
    ProtocolConfig cfg;
    cfg.dimension = n;
    cfg.channel = {0.0, 0.2, 1.0};
    cfg.noise = {0.0, 0.85, PhaseModel::space_homogeneous};
    cfg.detector = {0.0, 0.0};
    const auto st = sim::run_session(cfg, 1000000, 0.0, 301 + n, 2);
    c.expect(st.eps_x_source == sim::ErrorSource::empirical,
             "N=" + std::to_string(n) + ": expected empirical X statistics");
    c.expect(within_3se(st.eps_x_hat, 0.075, st.sifted_x),
             "MC N=" + std::to_string(n) + ": eps_x_hat = " + fmt(st.eps_x_hat) + " (" +
                 std::to_string(st.sifted_x) + " sifted)");
  }
  // N=3 has no sign basis: the session must flag the analytic substitution.
  {
    ProtocolConfig cfg;
    cfg.dimension = 3;
    cfg.channel = {0.0, 0.2, 1.0};
    cfg.noise = {0.0, 0.85, PhaseModel::space_homogeneous};
    cfg.detector = {0.0, 0.0};
    const auto st = sim::run_session(cfg, 10000, 0.0, 399, 2);
    c.expect(st.eps_x_source == sim::ErrorSource::analytic && st.sifted_x == 0,
             "N=3 session should substitute the analytic X error");
    c.expect(std::abs(st.eps_x_used - 0.075) <= 1e-12,
             "N=3 substituted eps_x = " + fmt(st.eps_x_used));
  }
  c.finish();
}

void criterion_4_saturation_closed_forms() {
  Criterion c("4. dead-time closed-form maxima vs numeric optimization");
  const double tau = 20e-9;
  for (auto enc : {Encoding::space, Encoding::time})
    for (int n : {2, 4, 8, 16})
      for (double p_s : {0.01, 0.2}) {
        const double tol = p_s == 0.01 ? 0.005 : 0.05;
        const auto opt = saturation::optimize_pulse_spacing(n, p_s, tau, 1e-15, enc);
        const double closed = saturation::closed_form_max(n, p_s, tau, enc);
        const double dev = std::abs(closed / (opt.raw_bits_max / tau) - 1.0);
        c.expect(dev <= tol + 1e-9,
                 std::string(enc == Encoding::space ? "space" : "time") + " N=" +
                     std::to_string(n) + " P_s=" + fmt(p_s) + ": deviation " + fmt(dev));
      }
  c.finish();
}

void criterion_5_optimal_dimension() {
  Criterion c("5. per-detector rate peaks at N_opt = 2 + P_s tau_d/min_T_p");
  for (const auto& [ratio, want] : std::vector<std::pair<double, int>>{{100.0, 22}, {20.0, 6}}) {
    ProtocolConfig cfg;
    cfg.encoding = Encoding::space;
    cfg.channel = {0.0, 0.2, 0.2};  // P_s = 0.2
    cfg.noise = {0.0, 1.0, PhaseModel::space_homogeneous};
    cfg.detector = {0.0, 20e-9};
    const double min_tp = 20e-9 / ratio;
    cfg.timing = {min_tp, min_tp};
    int argmax = 2;
    double best = -1.0;
    for (int n = 2; n <= 2 * want + 6; ++n) {
      cfg.dimension = n;
      const double r_det =
          saturation::rate_with_deadtime(cfg).raw_rate_per_detector_bits_per_s;
      if (r_det > best) {
        best = r_det;
        argmax = n;
      }
    }
    c.expect(std::abs(argmax - want) <= 2, "tau_d/min_T_p=" + fmt(ratio) + ": argmax " +
                                               std::to_string(argmax) + " vs " +
                                               std::to_string(want));
    c.note("tau_d/min_T_p=" + fmt(ratio) + ": argmax N=" + std::to_string(argmax));
  }
  c.finish();
}

void criterion_6_oracle_normalization_and_parity() {
  Criterion c("6. two-photon output normalization and parity selection rule");
  std::mt19937_64 rng(606);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      twophoton::PhotonState a, b;
      for (auto* st : {&a, &b}) {
        st->amplitudes.resize(static_cast<std::size_t>(n));
        double norm = 0.0;
        for (auto& amp : st->amplitudes) {
          amp = cplx{g(rng), g(rng)};
          norm += std::norm(amp);
        }
        for (auto& amp : st->amplitudes) amp /= std::sqrt(norm);
        st->phases.assign(static_cast<std::size_t>(n), 0.0);
      }
      for (bool indist : {true, false}) {
        const double total = twophoton::network_output(a, b, indist).total();
        worst = std::max(worst, std::abs(total - 1.0));
      }
    }
  }
  c.expect(worst <= 1e-9, "worst |total mass - 1| = " + fmt(worst));
  c.note("worst |total-1| over random inputs: " + fmt(worst));

  double forbidden = 0.0;
  for (int n = 2; n <= 8; ++n) {
    const auto basis = build_basis(n, BasisKind::x);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        const auto d = twophoton::network_output(twophoton::basis_state(basis, u),
                                                 twophoton::basis_state(basis, v), true);
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            const auto pred = expected_parity(basis.row(u), basis.row(v), i, j);
            if (!pred) continue;
            const auto idx = twophoton::pair_index(i, j, n);
            const double mass =
                *pred == Parity::plus ? d.cross_minus[idx] : d.cross_plus[idx];
            forbidden = std::max(forbidden, mass);
          }
      }
  }
  c.expect(forbidden <= 1e-12, "forbidden-parity mass up to " + fmt(forbidden));
  c.finish();
}

void criterion_7_oracle_vs_analytics() {
  Criterion c("7. averaged oracle coincidence masses vs closed-form outcome split");
  std::uint64_t seed = 700;
  for (int n : {2, 4, 8})
    for (double sigma : {0.175, 0.325})
      for (double b2 : {0.85, 1.0}) {
        const auto basis = build_basis(n, BasisKind::x);
        NoiseParams noise{sigma, b2, PhaseModel::space_homogeneous};
        const auto summary =
            twophoton::sample_categories(twophoton::basis_state(basis, 0),
                                         twophoton::basis_state(basis, 0), noise,
                                         1000000, ++seed, 2);
        const auto xo = analytics::x_outcome_probs(
            n, b2, analytics::dephasing_factor(n, sigma, PhaseModel::space_homogeneous));
        const std::string tag =
            "N=" + std::to_string(n) + " sigma=" + fmt(sigma) + " b2=" + fmt(b2);
        c.expect(std::abs(summary.mean.expected_parity_mass - xo.p_good) <=
                     3.0 * summary.std_error.expected_parity_mass,
                 tag + ": correct mass " + fmt(summary.mean.expected_parity_mass) + " vs " +
                     fmt(xo.p_good));
        c.expect(std::abs(summary.mean.unexpected_parity_mass - xo.p_bad) <=
                     3.0 * summary.std_error.unexpected_parity_mass,
                 tag + ": wrong mass " + fmt(summary.mean.unexpected_parity_mass) + " vs " +
                     fmt(xo.p_bad));
      }
  c.finish();
}

void criterion_8_simulation_vs_analytics() {
  Criterion c("8. end-to-end Monte Carlo vs closed forms (3 SE at 1e6 rounds)");
  const std::uint64_t rounds = 1000000;
  std::uint64_t seed = 800;
  int skipped = 0;
  for (int n : {2, 4, 8})
    for (auto enc : {Encoding::space, Encoding::time})
      for (double d : {0.0, 100.0}) {
        const auto cfg = reference_config(n, enc, d);
        const auto model = analytics::rate_breakdown(cfg);
        const auto st = sim::run_session(cfg, rounds, 0.0, ++seed, 2);
        const std::string tag = "N=" + std::to_string(n) +
                                (enc == Encoding::space ? " space" : " time") +
                                " d=" + fmt(d);

        const double frac_model = 0.25 * model.r_p_z;
        const double frac =
            static_cast<double>(st.sifted_z) / static_cast<double>(st.rounds_total);
        c.expect(within_3se(frac, frac_model, st.rounds_total),
                 tag + ": sifted-Z fraction " + fmt(frac) + " vs " + fmt(frac_model));

        const double exp_sifted_z = frac_model * static_cast<double>(rounds);
        if (st.sifted_z > 0 && exp_sifted_z >= 10.0) {
          c.expect(within_3se(st.eps_z_hat, model.eps_z, st.sifted_z),
                   tag + ": eps_z " + fmt(st.eps_z_hat) + " vs " + fmt(model.eps_z));
        } else {
          ++skipped;
        }
        const double exp_sifted_x =
            0.25 * model.r_p_x * static_cast<double>(rounds);
        if (st.sifted_x > 0 && exp_sifted_x >= 10.0) {
          c.expect(within_3se(st.eps_x_hat, model.eps_x, st.sifted_x),
                   tag + ": eps_x " + fmt(st.eps_x_hat) + " vs " + fmt(model.eps_x));
        } else {
          ++skipped;
        }
      }
  if (skipped > 0)
    c.note(std::to_string(skipped) +
           " QBER estimates skipped (expected event count below 10; "
           "sifted-fraction checks still applied)");
  c.finish();
}

void criterion_9_three_regimes() {
  Criterion c("9. rate-vs-distance slopes and monotone secret rate");
  auto cfg = reference_config(4, Encoding::space, 0.0);
  auto raw_rate = [&cfg](double d) {
    ProtocolConfig p = cfg;
    p.channel.distance_km = d;
    return saturation::rate_with_deadtime(p).raw_rate_bits_per_s;
  };
  // saturated window: rate linear in P_s -> slope -alpha/10 per km
  const double slope_sat =
      (std::log10(raw_rate(15.0)) - std::log10(raw_rate(0.0))) / 15.0;
  c.expect(std::abs(slope_sat / (-0.02) - 1.0) <= 0.10,
           "saturated slope " + fmt(slope_sat) + " vs -0.02");
  // unsaturated window: rate quadratic in P_s -> slope -2 alpha/10
  const double slope_unsat =
      (std::log10(raw_rate(130.0)) - std::log10(raw_rate(100.0))) / 30.0;
  c.expect(std::abs(slope_unsat / (-0.04) - 1.0) <= 0.10,
           "unsaturated slope " + fmt(slope_unsat) + " vs -0.04");
  c.note("slopes: saturated " + fmt(slope_sat) + ", unsaturated " + fmt(slope_unsat));

  // secret rate: positive at d=0, never increasing, zero at finite distance
  double prev = std::numeric_limits<double>::infinity();
  double first = 0.0;
  bool hit_zero = false;
  bool monotone = true;
  for (double d = 0.0; d <= 400.0; d += 2.0) {
    ProtocolConfig p = cfg;
    p.channel.distance_km = d;
    const auto b = analytics::rate_breakdown(p);
    const auto sat = saturation::rate_with_deadtime(p);
    const double r = analytics::secret_rate(sat.raw_rate_bits_per_s, b.eps_x, b.eps_z,
                                            p.ec_inefficiency);
    if (d == 0.0) first = r;
    if (r > prev * (1.0 + 1e-9)) monotone = false;
    if (r == 0.0) hit_zero = true;
    prev = r;
  }
  c.expect(first > 0.0, "secret rate must be positive at d=0");
  c.expect(monotone, "secret rate must be non-increasing in distance");
  c.expect(hit_zero, "secret rate must reach zero at finite distance");
  c.finish();
}

void criterion_10_deadtime_timeline() {
  Criterion c("10. event-level dead-time timeline vs the raw-bit model");
  ProtocolConfig cfg;
  cfg.dimension = 4;
  cfg.encoding = Encoding::space;
  cfg.channel = {0.0, 0.2, 0.2};  // P_s = 0.2
  cfg.noise = {0.0, 1.0, PhaseModel::space_homogeneous};
  cfg.detector = {0.0, 20e-9};
  const double p_hit = saturation::hit_prob(4, 0.2, Encoding::space);
  const double t_p = 20e-9 * p_hit;  // the analytic optimum n = 1/P_hit
  cfg.timing = {t_p, t_p};
  const std::uint64_t pulses = static_cast<std::uint64_t>(std::ceil(10000.0 / p_hit));
  const auto ts = sim::simulate_deadtime_timeline(cfg, pulses, 1001);
  const double model =
      saturation::raw_bits_per_deadtime(4, 0.2, 20e-9, t_p, Encoding::space);
  const double dev = std::abs(ts.raw_bits_per_deadtime / model - 1.0);
  c.expect(ts.deadtime_windows >= 10000.0 * 0.99,
           "simulated only " + fmt(ts.deadtime_windows) + " dead-time windows");
  c.expect(dev <= 0.10, "measured " + fmt(ts.raw_bits_per_deadtime) + " vs model " +
                            fmt(model) + " (deviation " + fmt(dev) + ")");
  c.note("measured " + fmt(ts.raw_bits_per_deadtime) + " bits per dead time vs model " +
         fmt(model) + " over " + fmt(ts.deadtime_windows) + " windows");
  c.finish();
}

}  // namespace

int main() {
  criterion_1_sigma_calibration();
  criterion_2_sifting_advantage();
  criterion_3_distinguishability_floor();
  criterion_4_saturation_closed_forms();
  criterion_5_optimal_dimension();
  criterion_6_oracle_normalization_and_parity();
  criterion_7_oracle_vs_analytics();
  criterion_8_simulation_vs_analytics();
  criterion_9_three_regimes();
  criterion_10_deadtime_timeline();

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
