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

// Batch front end: parameter sweeps, optimizer queries, Monte Carlo sessions
// and two-photon oracle runs, emitting machine-readable tables (CSV or a
// flat key/value object format).
//
// Exit codes: 0 success, 1 usage or config error, 2 numerical-domain error,
// 3 insufficient statistics.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hidmdi/hidmdi.hpp"

namespace {

struct CliValues {
  int dimension = 2;
  std::string encoding = "space";
  double distance_km = 0.0;
  double alpha_db_per_km = 0.2;
  double eta = 0.145;
  double pdc = 1e-6;
  double sigma = -1.0;  // negative: pick the encoding default below
  double beta_sq = 0.85;
  double dead_time_s = 20e-9;
  double min_pulse_sep_s = 200e-12;
  double pulse_sep_s = -1.0;  // negative: use min_pulse_sep_s
  double basis_prob = 0.5;
  double ec_inefficiency = 1.0;
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 1;
  std::string sweep;
  std::string format = "csv";
  std::string output;
  std::string config_path;
  std::string oracle_basis = "x";
  int alice_row = 0;
  int bob_row = 0;
};

// Default sigma values reproduce a 5% (space) or 1.5% (time) interference
// QBER at N = 2 from dephasing alone.
constexpr double kDefaultSigmaSpace = 0.325;
constexpr double kDefaultSigmaTime = 0.175;

hidmdi::ProtocolConfig build_config(const CliValues& v) {
  hidmdi::ProtocolConfig cfg;
  cfg.dimension = v.dimension;
  if (v.encoding == "space")
    cfg.encoding = hidmdi::Encoding::space;
  else if (v.encoding == "time")
    cfg.encoding = hidmdi::Encoding::time;
  else
    throw std::invalid_argument("encoding must be 'space' or 'time'");
  cfg.basis_prob = v.basis_prob;
  cfg.channel.distance_km = v.distance_km;
  cfg.channel.loss_coeff_db_per_km = v.alpha_db_per_km;
  cfg.channel.detector_efficiency = v.eta;
  cfg.noise.sigma = v.sigma >= 0.0
                        ? v.sigma
                        : (cfg.encoding == hidmdi::Encoding::space ? kDefaultSigmaSpace
                                                                   : kDefaultSigmaTime);
  cfg.noise.beta_sq = v.beta_sq;
  cfg.noise.phase_model = hidmdi::analytics::default_phase_model(cfg.encoding);
  cfg.detector.dark_count_prob = v.pdc;
  cfg.detector.dead_time_s = v.dead_time_s;
  cfg.timing.min_pulse_sep_s = v.min_pulse_sep_s;
  cfg.timing.pulse_sep_s =
      v.pulse_sep_s >= 0.0 ? v.pulse_sep_s : v.min_pulse_sep_s;
  cfg.ec_inefficiency = v.ec_inefficiency;
  hidmdi::validate(cfg);
  return cfg;
}

// Flat key = value config document; keys are the long flag names with
// dashes replaced by underscores. Unknown keys are an error.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " has an empty key or value");
    kv[key] = value;
  }
  return kv;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size())
    throw std::invalid_argument("config: value for '" + key + "' is not a number");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v < 0.0 || v != std::floor(v))
    throw std::invalid_argument("config: value for '" + key + "' is not a whole number");
  return static_cast<std::uint64_t>(v);
}

int to_int(const std::string& key, const std::string& value) {
  return static_cast<int>(to_u64(key, value));
}

// Config-file values fill in everything the command line left untouched.
void apply_config_file(CliValues& v, const CLI::App& app,
                       const std::map<std::string, std::string>& kv) {
  auto untouched = [&app](const std::string& flag) {
    const auto* opt = app.get_option_no_throw(flag);
    return opt != nullptr && opt->count() == 0;
  };
  for (const auto& [key, value] : kv) {
    if (key == "dimension") {
      if (untouched("--dimension")) v.dimension = to_int(key, value);
    } else if (key == "encoding") {
      if (untouched("--encoding")) v.encoding = value;
    } else if (key == "distance_km") {
      if (untouched("--distance-km")) v.distance_km = to_double(key, value);
    } else if (key == "alpha_db_per_km") {
      if (untouched("--alpha-db-per-km")) v.alpha_db_per_km = to_double(key, value);
    } else if (key == "eta") {
      if (untouched("--eta")) v.eta = to_double(key, value);
    } else if (key == "pdc") {
      if (untouched("--pdc")) v.pdc = to_double(key, value);
    } else if (key == "sigma") {
      if (untouched("--sigma")) v.sigma = to_double(key, value);
    } else if (key == "beta_sq") {
      if (untouched("--beta-sq")) v.beta_sq = to_double(key, value);
    } else if (key == "dead_time_s") {
      if (untouched("--dead-time-s")) v.dead_time_s = to_double(key, value);
    } else if (key == "min_pulse_sep_s") {
      if (untouched("--min-pulse-sep-s")) v.min_pulse_sep_s = to_double(key, value);
    } else if (key == "pulse_sep_s") {
      if (untouched("--pulse-sep-s")) v.pulse_sep_s = to_double(key, value);
    } else if (key == "basis_prob") {
      if (untouched("--basis-prob")) v.basis_prob = to_double(key, value);
    } else if (key == "ec_inefficiency") {
      if (untouched("--ec-inefficiency")) v.ec_inefficiency = to_double(key, value);
    } else if (key == "rounds") {
      if (untouched("--rounds")) v.rounds = to_u64(key, value);
    } else if (key == "seed") {
      if (untouched("--seed")) v.seed = to_u64(key, value);
    } else if (key == "sweep") {
      if (untouched("--sweep")) v.sweep = value;
    } else if (key == "format") {
      if (untouched("--format")) v.format = value;
    } else if (key == "output") {
      if (untouched("--output")) v.output = value;
    } else if (key == "oracle_basis") {
      if (untouched("--oracle-basis")) v.oracle_basis = value;
    } else if (key == "alice_row") {
      if (untouched("--alice-row")) v.alice_row = to_int(key, value);
    } else if (key == "bob_row") {
      if (untouched("--bob-row")) v.bob_row = to_int(key, value);
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
}

void write_out(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("output: cannot open '" + path + "'");
  out << text;
}

std::string render(const hidmdi::Table& t, const std::string& format) {
  if (format == "csv") return hidmdi::emit_csv(t);
  if (format == "object") return hidmdi::emit_object(t);
  throw std::invalid_argument("format must be 'csv' or 'object'");
}

}  // namespace

int main(int argc, char** argv) {
  CliValues v;
  CLI::App app{"High-dimensional measurement-device-independent QKD rate engine"};
  app.fallthrough(true);

  app.add_option("--dimension", v.dimension, "Qudit dimension N (>= 2)");
  app.add_option("--encoding", v.encoding, "Encoding: space | time")
      ->check(CLI::IsMember({"space", "time"}));
  app.add_option("--distance-km", v.distance_km, "Alice/Bob to Charlie distance, km");
  app.add_option("--alpha-db-per-km", v.alpha_db_per_km, "Fiber loss coefficient, dB/km");
  app.add_option("--eta", v.eta, "Detector efficiency (0,1]");
  app.add_option("--pdc", v.pdc, "Dark-count probability per detector per gate");
  app.add_option("--sigma", v.sigma, "Phase-noise scale, radians (default per encoding)");
  app.add_option("--beta-sq", v.beta_sq, "Photon indistinguishability |beta|^2");
  app.add_option("--dead-time-s", v.dead_time_s, "Detector dead time, seconds");
  app.add_option("--min-pulse-sep-s", v.min_pulse_sep_s, "Smallest usable pulse separation, s");
  app.add_option("--pulse-sep-s", v.pulse_sep_s, "Pulse separation, s (default: minimum)");
  app.add_option("--basis-prob", v.basis_prob, "Probability of choosing the key basis");
  app.add_option("--ec-inefficiency", v.ec_inefficiency, "Error-correction inefficiency f >= 1");
  app.add_option("--rounds", v.rounds, "Monte Carlo rounds / oracle trials");
  app.add_option("--seed", v.seed, "Random seed");
  app.add_option("--sweep", v.sweep, "Sweep spec: var:start:stop:steps:lin|log");
  app.add_option("--format", v.format, "Output format: csv | object")
      ->check(CLI::IsMember({"csv", "object"}));
  app.add_option("--output", v.output, "Write output to this path instead of stdout");
  app.add_option("--config", v.config_path, "Flat key = value config file");
  app.add_option("--oracle-basis", v.oracle_basis, "Oracle: basis of the sent states, z | x")
      ->check(CLI::IsMember({"z", "x"}));
  app.add_option("--alice-row", v.alice_row, "Oracle: Alice's basis row");
  app.add_option("--bob-row", v.bob_row, "Oracle: Bob's basis row");

  auto* cmd_rates = app.add_subcommand("rates", "Closed-form rate table, optionally swept");
  auto* cmd_optimize =
      app.add_subcommand("optimize", "Pulse-spacing optimum and per-dimension rate table");
  auto* cmd_simulate =
      app.add_subcommand("simulate", "Monte Carlo session with analytic z-scores");
  auto* cmd_oracle = app.add_subcommand("oracle", "Two-photon outcome distribution");
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (!v.config_path.empty()) apply_config_file(v, app, read_config_file(v.config_path));
    const auto cfg = build_config(v);

    std::string text;
    if (cmd_rates->parsed()) {
      if (v.sweep.empty()) {
        text = render(hidmdi::tables::rates_table(cfg, nullptr), v.format);
      } else {
        const auto spec = hidmdi::tables::parse_sweep(v.sweep);
        text = render(hidmdi::tables::rates_table(cfg, &spec), v.format);
      }
    } else if (cmd_optimize->parsed()) {
      const auto rep = hidmdi::tables::optimize_report(cfg);
      text = render(rep.summary, v.format);
      text += v.format == "object" ? "\n" : "";
      text += render(rep.per_dimension, v.format);
    } else if (cmd_simulate->parsed()) {
      const auto stats = hidmdi::sim::run_session(cfg, v.rounds, 0.0, v.seed);
      text = render(hidmdi::tables::simulate_table(cfg, stats, v.seed), v.format);
      if (stats.insufficient) {
        write_out(text, v.output);
        std::cerr << "error: session ended with zero sifted rounds in a basis\n";
        return 3;
      }
    } else if (cmd_oracle->parsed()) {
      const auto basis =
          v.oracle_basis == "z" ? hidmdi::BasisKind::z : hidmdi::BasisKind::x;
      text = render(hidmdi::tables::oracle_table(cfg, basis, v.alice_row, v.bob_row,
                                                 v.rounds, v.seed),
                    v.format);
    }
    write_out(text, v.output);
  } catch (const hidmdi::insufficient_statistics& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
