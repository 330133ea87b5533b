// SPDX-License-Identifier: Apache-2.0

#include "mcbf/serialize.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace mcbf {

Json complex_to_json(const CMat& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      out.push_back(m(i, j).real());
      out.push_back(m(i, j).imag());
    }
  }
  return out;
}

Json complex_to_json(const CVec& v) {
  Json out = Json::array();
  for (int i = 0; i < v.size(); ++i) {
    out.push_back(v(i).real());
    out.push_back(v(i).imag());
  }
  return out;
}

CMat complex_matrix_from_json(const Json& j, int rows, int cols) {
  if (static_cast<int>(j.size()) != 2 * rows * cols) {
    throw std::invalid_argument("complex matrix: expected " + std::to_string(2 * rows * cols) +
                                " numbers, got " + std::to_string(j.size()));
  }
  CMat m(rows, cols);
  int idx = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double re = j[idx++];
      const double im = j[idx++];
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

CVec complex_vector_from_json(const Json& j, int size) {
  return complex_matrix_from_json(j, size, 1).col(0);
}

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["num_transmitters"] = s.num_transmitters;
  j["antennas"] = s.antennas;
  j["num_users"] = s.num_users;
  j["data_clusters"] = s.data_clusters;
  j["coord_clusters"] = s.coord_clusters;
  Json constraints = Json::array();
  for (const auto& pc : s.power_constraints) {
    constraints.push_back({{"matrix", complex_to_json(pc.q_matrix)}, {"limit", pc.limit}});
  }
  j["power_constraints"] = constraints;
  j["noise_variances"] = std::vector<double>(s.noise_variances.data(),
                                             s.noise_variances.data() + s.noise_variances.size());
  Json unc;
  if (s.uncertainty.kind == UncertaintyModel::Kind::Sphere) {
    unc["kind"] = "sphere";
    unc["xi"] = s.uncertainty.xi;
  } else {
    unc["kind"] = "explicit";
    Json shapes = Json::array();
    for (const auto& b : s.uncertainty.shapes) shapes.push_back(complex_to_json(b));
    unc["matrices"] = shapes;
  }
  j["uncertainty"] = unc;
  j["csi_mode"] = s.csi_mode == CsiMode::PerfectCsi ? "perfect" : "worst-case";
  return j;
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.num_transmitters = j.at("num_transmitters");
  s.antennas = j.at("antennas").get<std::vector<int>>();
  s.num_users = j.at("num_users");
  s.data_clusters = j.at("data_clusters").get<std::vector<std::vector<int>>>();
  s.coord_clusters = j.at("coord_clusters").get<std::vector<std::vector<int>>>();
  const int n = s.total_antennas();
  for (const auto& pc : j.at("power_constraints")) {
    s.power_constraints.push_back({complex_matrix_from_json(pc.at("matrix"), n, n), pc.at("limit")});
  }
  const auto noise = j.at("noise_variances").get<std::vector<double>>();
  s.noise_variances = Eigen::Map<const RVec>(noise.data(), noise.size());
  const Json& unc = j.at("uncertainty");
  if (unc.at("kind") == "sphere") {
    s.uncertainty.kind = UncertaintyModel::Kind::Sphere;
    s.uncertainty.xi = unc.at("xi");
  } else {
    s.uncertainty.kind = UncertaintyModel::Kind::Explicit;
    for (const auto& b : unc.at("matrices")) {
      s.uncertainty.shapes.push_back(complex_matrix_from_json(b, n, n));
    }
  }
  s.csi_mode = j.at("csi_mode") == "perfect" ? CsiMode::PerfectCsi : CsiMode::WorstCase;
  return s;
}

Json strategy_to_json(const Strategy& strategy) {
  Json j;
  Json v = Json::array();
  for (const auto& b : strategy.beamformers) v.push_back(complex_to_json(b));
  j["beamformers"] = v;
  j["equalizers"] = std::vector<double>(strategy.equalizers.data(),
                                        strategy.equalizers.data() + strategy.equalizers.size());
  return j;
}

Strategy strategy_from_json(const Json& j, const Scenario& scenario) {
  const int n = scenario.total_antennas();
  std::vector<CVec> v;
  for (const auto& b : j.at("beamformers")) v.push_back(complex_vector_from_json(b, n));
  const auto r = j.at("equalizers").get<std::vector<double>>();
  return Strategy(std::move(v), Eigen::Map<const RVec>(r.data(), r.size()),
                  selection_matrices(scenario));
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace mcbf
