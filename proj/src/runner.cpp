// SPDX-License-Identifier: Apache-2.0

#include "mcbf/runner.hpp"

#include <cmath>
#include <future>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mcbf/ipm.hpp"

namespace mcbf {

namespace {

std::vector<UserUtility> per_user(const UserUtility& u, int kr) {
  return std::vector<UserUtility>(kr, u);
}

Json vector_to_json(const RVec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ChannelRealization draw_for(const RunConfig& config, std::uint64_t seed) {
  const RMat gains = config.snr_gains.size() > 0 ? config.snr_gains : default_snr_gains(config.scenario);
  return draw_channels(config.scenario, gains, seed);
}

FairnessProfile profile_for(const RunConfig& config) {
  const int kr = config.scenario.num_users;
  FairnessProfile p;
  p.start = config.profile_start.size() > 0 ? config.profile_start : RVec::Zero(kr);
  p.direction =
      config.profile_direction.size() > 0 ? config.profile_direction : RVec::Constant(kr, 1.0 / kr);
  return p;
}

}  // namespace

RMat default_snr_gains(const Scenario& scenario) {
  RMat gains(scenario.num_transmitters, scenario.num_users);
  for (int j = 0; j < scenario.num_transmitters; ++j) {
    gains.row(j).setConstant(scenario.antennas[j]);
  }
  return gains;
}

RVec initial_box(const Scenario& scenario, const ChannelRealization& realization,
                 const std::vector<UserUtility>& utilities, UpperBoundMethod method,
                 const ConicBackend& backend) {
  return per_user_performance_caps(scenario, realization, utilities, method, backend);
}

std::vector<RegionRow> trace_region(const Scenario& scenario, const ChannelRealization& realization,
                                    const std::vector<UserUtility>& utilities, int num_profiles,
                                    double delta, const ConicBackend& backend) {
  if (scenario.num_users != 2) {
    throw std::invalid_argument("trace_region: profile sweep is implemented for two users");
  }
  if (num_profiles < 2) throw std::invalid_argument("trace_region: need at least two profiles");
  std::vector<RegionRow> rows;
  ScenarioOracle oracle(scenario, realization, utilities, backend);
  for (int i = 0; i < num_profiles; ++i) {
    const double theta = static_cast<double>(i) / (num_profiles - 1);
    FairnessProfile p;
    p.start = RVec::Zero(2);
    p.direction = RVec(2);
    p.direction << theta, 1.0 - theta;
    const double f_upper =
        initial_upper_bound(scenario, realization, utilities, p, UpperBoundMethod::PowerBound, backend);
    const RfoResult res = solve_rfo(oracle, p, delta, f_upper);
    RegionRow row;
    row.theta = theta;
    row.f_value = res.f_lo;
    row.g_point = res.point;
    row.mse_point = RVec(2);
    for (int k = 0; k < 2; ++k) row.mse_point(k) = utilities[k].inverse(res.point(k));
    rows.push_back(std::move(row));
  }
  return rows;
}

RunOutput run_rfo(const RunConfig& config, std::uint64_t seed) {
  const ChannelRealization realization = draw_for(config, seed);
  InteriorPointBackend backend;
  const auto utilities = per_user(config.user_utility, config.scenario.num_users);
  const FairnessProfile profile = profile_for(config);
  const double f_upper = initial_upper_bound(config.scenario, realization, utilities, profile,
                                             config.f_upper_method, backend);
  ScenarioOracle oracle(config.scenario, realization, utilities, backend);
  const RfoResult res = solve_rfo(oracle, profile, config.delta, f_upper);
  RunOutput out;
  out.result = {{"schema_version", kSchemaVersion},
                {"algorithm", "rfo"},
                {"seed", seed},
                {"f_lo", res.f_lo},
                {"f_hi", res.f_hi},
                {"f_upper", f_upper},
                {"point", vector_to_json(res.point)},
                {"evaluations", res.evaluations},
                {"converged", res.converged}};
  if (res.strategy) out.result["strategy"] = strategy_to_json(*res.strategy);
  return out;
}

RunOutput run_brb(const RunConfig& config, std::uint64_t seed) {
  const ChannelRealization realization = draw_for(config, seed);
  InteriorPointBackend backend;
  const auto utilities = per_user(config.user_utility, config.scenario.num_users);
  const RVec box = initial_box(config.scenario, realization, utilities, config.f_upper_method, backend);
  ScenarioOracle oracle(config.scenario, realization, utilities, backend);
  BrbOptions options;
  options.epsilon = config.eps;
  options.delta = config.delta;
  options.max_evaluations = config.max_evaluations;
  options.relative_gap_target = config.relative_gap_target;
  const BrbResult res = solve_brb(oracle, config.system_utility, box, options);
  RunOutput out;
  out.result = {{"schema_version", kSchemaVersion},
                {"algorithm", "brb"},
                {"seed", seed},
                {"f_min", res.f_min},
                {"f_max", res.f_max},
                {"point", vector_to_json(res.point)},
                {"evaluations", res.evaluations},
                {"iterations", res.iterations},
                {"converged", res.converged},
                {"initial_box", vector_to_json(box)}};
  if (res.strategy) out.result["strategy"] = strategy_to_json(*res.strategy);
  std::ostringstream csv;
  csv << "evaluations,f_min,f_max\n";
  for (const auto& t : res.trace) csv << t.evaluations << "," << t.f_min << "," << t.f_max << "\n";
  out.trace_csv = csv.str();
  return out;
}

RunOutput run_zf(const RunConfig& config, std::uint64_t seed) {
  const ChannelRealization realization = draw_for(config, seed);
  InteriorPointBackend backend;
  ZfConfig zf;
  zf.interference_caps =
      config.z_caps.size() > 0 ? config.z_caps : auto_interference_caps(config.scenario);
  zf.system_utility = config.system_utility;
  zf.user_utility = config.user_utility;
  const ZfResult res = solve_zf(config.scenario, realization, zf, backend);
  RunOutput out;
  out.result = {{"schema_version", kSchemaVersion},
                {"algorithm", "zf"},
                {"seed", seed},
                {"feasible", res.feasible},
                {"z", vector_to_json(zf.interference_caps)}};
  if (!res.feasible) {
    out.result["note"] = res.note;
    return out;
  }
  out.result["sdr_value"] = res.sdr_value;
  out.result["extracted_value"] = res.extracted_value;
  out.result["eta"] = vector_to_json(res.eta);
  out.result["extraction_degraded"] = res.extraction_degraded;
  const StrategyEvaluation eval = evaluate_strategy(config.scenario, realization, res.beamformers,
                                                    EqualizerRule::NominalOptimal, backend);
  out.result["robust_mse"] = vector_to_json(eval.robust_mse);
  const auto utilities = per_user(config.user_utility, config.scenario.num_users);
  out.result["g_values"] = vector_to_json(eval.g_values(utilities));
  out.result["objective"] = config.system_utility.eval(eval.g_values(utilities));
  out.result["strategy"] = strategy_to_json(eval.strategy);
  return out;
}

RunOutput run_brute(const RunConfig& config, std::uint64_t seed) {
  const ChannelRealization realization = draw_for(config, seed);
  InteriorPointBackend backend;
  const auto utilities = per_user(config.user_utility, config.scenario.num_users);
  const RVec box = initial_box(config.scenario, realization, utilities, config.f_upper_method, backend);
  ScenarioOracle oracle(config.scenario, realization, utilities, backend);
  const BruteForceResult res = brute_force(oracle, config.system_utility, box, config.eps,
                                           config.max_evaluations);
  RunOutput out;
  out.result = {{"schema_version", kSchemaVersion},
                {"algorithm", "brute"},
                {"seed", seed},
                {"value", res.value},
                {"point", vector_to_json(res.point)},
                {"evaluations", res.evaluations},
                {"subboxes", res.subboxes},
                {"initial_box", vector_to_json(box)}};
  return out;
}

RunOutput run_evaluate(const RunConfig& config, std::uint64_t seed) {
  const ChannelRealization realization = draw_for(config, seed);
  InteriorPointBackend backend;
  const Json& j = config.strategy_json.contains("strategy") ? config.strategy_json.at("strategy")
                                                            : config.strategy_json;
  const Strategy strategy = strategy_from_json(j, config.scenario);
  const StrategyEvaluation eval =
      evaluate_strategy(config.scenario, realization, strategy.beamformers, EqualizerRule::Given,
                        backend, strategy.equalizers);
  const auto utilities = per_user(config.user_utility, config.scenario.num_users);
  RunOutput out;
  out.result = {{"schema_version", kSchemaVersion},
                {"algorithm", "evaluate"},
                {"seed", seed},
                {"robust_mse", vector_to_json(eval.robust_mse)},
                {"g_values", vector_to_json(eval.g_values(utilities))},
                {"objective", config.system_utility.eval(eval.g_values(utilities))}};
  return out;
}

EnsembleOutput run_ensemble(const RunConfig& config, const std::string& algorithm) {
  RunOutput (*runner)(const RunConfig&, std::uint64_t) = nullptr;
  if (algorithm == "rfo") runner = run_rfo;
  else if (algorithm == "brb") runner = run_brb;
  else if (algorithm == "zf") runner = run_zf;
  else if (algorithm == "brute") runner = run_brute;
  else if (algorithm == "evaluate") runner = run_evaluate;
  else throw std::invalid_argument("unknown algorithm: " + algorithm);

  EnsembleOutput out;
  out.runs.resize(config.ensemble);
  // Independent seeds run concurrently; results are merged in seed order.
  std::vector<std::future<RunOutput>> futures;
  futures.reserve(config.ensemble);
  for (int i = 0; i < config.ensemble; ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] { return runner(config, config.seed + i); }));
  }
  for (int i = 0; i < config.ensemble; ++i) out.runs[i] = futures[i].get();

  std::ostringstream csv;
  csv << "seed,objective,evaluations\n";
  double sum = 0.0, sum2 = 0.0;
  long count = 0;
  for (int i = 0; i < config.ensemble; ++i) {
    const Json& r = out.runs[i].result;
    double objective = 0.0;
    if (r.contains("objective")) objective = r.at("objective");
    else if (r.contains("f_min")) objective = r.at("f_min");
    else if (r.contains("f_lo")) objective = r.at("f_lo");
    else if (r.contains("value")) objective = r.at("value");
    long evals = r.contains("evaluations") ? r.at("evaluations").get<long>() : 0;
    csv << config.seed + i << "," << objective << "," << evals << "\n";
    sum += objective;
    sum2 += objective * objective;
    ++count;
  }
  const double mean = sum / count;
  const double var = std::max(0.0, sum2 / count - mean * mean);
  csv << "# mean," << mean << ",std," << std::sqrt(var) << "\n";
  out.aggregate_csv = csv.str();
  return out;
}

}  // namespace mcbf
