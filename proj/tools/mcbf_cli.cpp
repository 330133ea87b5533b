// SPDX-License-Identifier: Apache-2.0
//
// Batch front-end: scenario generation, boundary tracing, RFO/BRB/ZF/brute
// runs and robust strategy evaluation, emitting plot-ready CSV and JSON.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "mcbf/ipm.hpp"
#include "mcbf/runner.hpp"

namespace {

using namespace mcbf;

struct CommonArgs {
  std::string scenario_path;
  std::uint64_t seed = 1;
  int ensemble = 1;
  std::string utility = "inverse-mse";
  std::string system = "sum";
  std::vector<double> weights;
  double eps = 0.05;
  double delta = 1e-3;
  double xi = -1.0;  // >= 0 overrides the scenario's uncertainty
  std::string fupper = "power";
  std::string out = "";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_scenario = true) {
  auto* opt = cmd->add_option("--scenario", args.scenario_path, "scenario JSON file");
  if (needs_scenario) opt->required();
  cmd->add_option("--seed", args.seed, "base RNG seed");
  cmd->add_option("--ensemble", args.ensemble, "number of independent channel draws");
  cmd->add_option("--utility", args.utility, "user utility: inverse-mse|rate|neg-mse");
  cmd->add_option("--system", args.system, "system utility: sum|prop-fair|harmonic|max-min");
  cmd->add_option("--weights", args.weights, "system utility weights");
  cmd->add_option("--eps", args.eps, "optimality gap target");
  cmd->add_option("--delta", args.delta, "line-search accuracy");
  cmd->add_option("--xi", args.xi, "override: spherical uncertainty with this squared radius");
  cmd->add_option("--fupper", args.fupper, "initial bound method: sup|power|single-user");
  cmd->add_option("--out", args.out, "output path prefix");
}

UpperBoundMethod parse_fupper(const std::string& name) {
  if (name == "sup") return UpperBoundMethod::Sup;
  if (name == "power") return UpperBoundMethod::PowerBound;
  if (name == "single-user") return UpperBoundMethod::SingleUser;
  throw CLI::ValidationError("--fupper", "unknown method: " + name);
}

RunConfig make_config(const CommonArgs& args) {
  RunConfig config;
  config.scenario = scenario_from_json(read_json_file(args.scenario_path));
  if (args.xi >= 0.0) {
    config.scenario.uncertainty = {UncertaintyModel::Kind::Sphere, args.xi, {}};
    config.scenario.csi_mode = args.xi == 0.0 ? CsiMode::PerfectCsi : CsiMode::WorstCase;
  }
  const auto violations = validate(config.scenario);
  if (!violations.empty()) {
    std::string what = "invalid scenario:";
    for (const auto& v : violations) what += "\n  " + v;
    throw std::runtime_error(what);
  }
  config.seed = args.seed;
  config.ensemble = args.ensemble;
  config.user_utility.kind = parse_user_utility(args.utility);
  config.system_utility.kind = parse_system_utility(args.system);
  if (!args.weights.empty()) {
    config.system_utility.weights = Eigen::Map<const RVec>(args.weights.data(), args.weights.size());
  }
  config.eps = args.eps;
  config.delta = args.delta;
  config.f_upper_method = parse_fupper(args.fupper);
  return config;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

std::string prefix_or(const CommonArgs& args, const std::string& fallback) {
  return args.out.empty() ? fallback : args.out;
}

int emit_ensemble(const RunConfig& config, const std::string& algorithm, const std::string& prefix) {
  const EnsembleOutput out = run_ensemble(config, algorithm);
  bool any_infeasible = false;
  for (int i = 0; i < static_cast<int>(out.runs.size()); ++i) {
    const auto& run = out.runs[i];
    const std::string base = prefix + "_seed" + std::to_string(config.seed + i);
    write_json_file(base + ".json", run.result);
    if (!run.trace_csv.empty()) write_text(base + "_trace.csv", run.trace_csv);
    if (run.result.contains("feasible") && !run.result.at("feasible").get<bool>()) any_infeasible = true;
  }
  write_text(prefix + "_aggregate.csv", out.aggregate_csv);
  std::cout << out.aggregate_csv;
  return any_infeasible ? 2 : 0;
}

int run_gen(const std::string& type, int kt, std::vector<int> antennas, int kr,
            const std::string& power_model, double q, double xi, const std::string& out_path) {
  if (antennas.empty()) antennas.assign(kt, 1);
  if (static_cast<int>(antennas.size()) == 1 && kt > 1) antennas.assign(kt, antennas[0]);
  Scenario scenario;
  if (type == "network-mimo") {
    PowerModel pm;
    pm.q = q;
    if (power_model == "total") pm.kind = PowerModel::Kind::TotalPower;
    else if (power_model == "per-antenna") pm.kind = PowerModel::Kind::PerAntenna;
    else if (power_model == "per-tx") pm.kind = PowerModel::Kind::PerTransmitter;
    else throw std::runtime_error("unknown power model: " + power_model);
    scenario = make_network_mimo(kt, antennas, kr, pm, xi);
  } else if (type == "interference") {
    std::vector<std::vector<CMat>> blocks;
    if (xi > 0.0) {
      for (int k = 0; k < kt; ++k) {
        std::vector<CMat> row;
        for (int j = 0; j < kt; ++j) {
          row.push_back(std::sqrt(xi) * CMat::Identity(antennas[j], antennas[j]));
        }
        blocks.push_back(std::move(row));
      }
    }
    scenario = make_interference_channel(kt, antennas, q, blocks);
  } else {
    throw std::runtime_error("unknown scenario type: " + type);
  }
  write_json_file(out_path, scenario_to_json(scenario));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multicell robust beamforming optimizer"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a scenario file");
  std::string gen_type = "network-mimo", gen_power = "total", gen_out = "scenario.json";
  int gen_kt = 1, gen_kr = 2;
  std::vector<int> gen_antennas;
  double gen_q = 10.0, gen_xi = 0.0;
  gen->add_option("--type", gen_type, "network-mimo|interference");
  gen->add_option("--kt", gen_kt, "number of transmitters");
  gen->add_option("--antennas", gen_antennas, "antennas per transmitter");
  gen->add_option("--kr", gen_kr, "number of users (network-mimo)");
  gen->add_option("--power-model", gen_power, "total|per-antenna|per-tx");
  gen->add_option("--q", gen_q, "power limit");
  gen->add_option("--xi", gen_xi, "squared uncertainty radius");
  gen->add_option("--out", gen_out, "output path");

  // region
  auto* region = app.add_subcommand("region", "trace the two-user performance boundary");
  CommonArgs region_args;
  int region_profiles = 11;
  add_common(region, region_args);
  region->add_option("--profiles", region_profiles, "number of fairness profiles");

  CommonArgs rfo_args, brb_args, zf_args, brute_args, eval_args;
  std::vector<double> rfo_a, rfo_alpha;
  auto* rfo_cmd = app.add_subcommand("rfo", "fairness-profile optimization");
  add_common(rfo_cmd, rfo_args);
  rfo_cmd->add_option("--a", rfo_a, "profile floor (default zeros)");
  rfo_cmd->add_option("--alpha", rfo_alpha, "profile direction (default uniform)");

  long brb_budget = 200000;
  double brb_relgap = 0.0;
  auto* brb_cmd = app.add_subcommand("brb", "global branch-reduce-and-bound");
  add_common(brb_cmd, brb_args);
  brb_cmd->add_option("--budget", brb_budget, "feasibility evaluation budget");
  brb_cmd->add_option("--relgap", brb_relgap, "stop at this relative gap (0 = off)");

  std::vector<std::string> zf_z;
  auto* zf_cmd = app.add_subcommand("zf", "zero-forcing / interference-constrained baseline");
  add_common(zf_cmd, zf_args);
  zf_cmd->add_option("--z", zf_z, "interference caps: scalar, per-user list, or 'auto'");

  long brute_cap = 2000000;
  auto* brute_cmd = app.add_subcommand("brute", "brute-force box search");
  add_common(brute_cmd, brute_args);
  brute_cmd->add_option("--cap", brute_cap, "maximum number of subboxes");

  std::string eval_strategy_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "robust evaluation of a strategy file");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--strategy", eval_strategy_path, "strategy JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return run_gen(gen_type, gen_kt, gen_antennas, gen_kr, gen_power, gen_q, gen_xi, gen_out);
    }
    if (region->parsed()) {
      RunConfig config = make_config(region_args);
      const ChannelRealization realization =
          draw_channels(config.scenario, default_snr_gains(config.scenario), config.seed);
      InteriorPointBackend backend;
      const std::vector<UserUtility> utilities(config.scenario.num_users, config.user_utility);
      const auto rows =
          trace_region(config.scenario, realization, utilities, region_profiles, config.delta, backend);
      std::ostringstream csv;
      csv << "theta,f";
      for (int k = 0; k < config.scenario.num_users; ++k) csv << ",g" << k;
      for (int k = 0; k < config.scenario.num_users; ++k) csv << ",mse" << k;
      csv << "\n";
      for (const auto& row : rows) {
        csv << row.theta << "," << row.f_value;
        for (int k = 0; k < row.g_point.size(); ++k) csv << "," << row.g_point(k);
        for (int k = 0; k < row.mse_point.size(); ++k) csv << "," << row.mse_point(k);
        csv << "\n";
      }
      const std::string prefix = prefix_or(region_args, "region");
      write_text(prefix + ".csv", csv.str());
      std::cout << csv.str();
      return 0;
    }
    for (auto [cmd, args, name] : {std::tuple{rfo_cmd, &rfo_args, "rfo"},
                                   std::tuple{brb_cmd, &brb_args, "brb"},
                                   std::tuple{zf_cmd, &zf_args, "zf"},
                                   std::tuple{brute_cmd, &brute_args, "brute"},
                                   std::tuple{eval_cmd, &eval_args, "evaluate"}}) {
      if (!cmd->parsed()) continue;
      RunConfig config = make_config(*args);
      if (std::string(name) == "rfo") {
        if (!rfo_a.empty()) config.profile_start = Eigen::Map<const RVec>(rfo_a.data(), rfo_a.size());
        if (!rfo_alpha.empty()) {
          config.profile_direction = Eigen::Map<const RVec>(rfo_alpha.data(), rfo_alpha.size());
        }
      } else if (std::string(name) == "brb") {
        config.max_evaluations = brb_budget;
        config.relative_gap_target = brb_relgap;
      } else if (std::string(name) == "zf") {
        if (!zf_z.empty() && zf_z[0] != "auto") {
          RVec caps(zf_z.size());
          for (std::size_t i = 0; i < zf_z.size(); ++i) caps(i) = std::stod(zf_z[i]);
          config.z_caps = caps;
        }
      } else if (std::string(name) == "brute") {
        config.max_evaluations = brute_cap;
      } else if (std::string(name) == "evaluate") {
        config.strategy_json = read_json_file(eval_strategy_path);
      }
      return emit_ensemble(config, name, prefix_or(*args, name));
    }
  } catch (const mcbf::InfeasibleStart& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
