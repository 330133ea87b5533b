// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mcbf/rfo.hpp"
#include "mcbf/utility.hpp"

namespace mcbf {

/// Axis-aligned hyperrectangle [lower, upper] in user-performance space with
/// a cached local upper bound beta on f over its feasible points.
struct Box {
  RVec lower;
  RVec upper;
  double beta = 0.0;

  double longest_side() const;
  double l1_diameter() const { return (upper - lower).lpNorm<1>(); }
};

/// Live boxes with extract-max on beta; ties resolve to the earliest insert.
class BoxSet {
 public:
  void insert(Box box);
  Box extract_max();
  double max_beta() const;  // -inf when empty
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const std::vector<std::pair<long, Box>>& entries() const { return heap_; }

 private:
  // Binary heap ordered by (beta, -seq).
  std::vector<std::pair<long, Box>> heap_;
  long next_seq_ = 0;
  static bool less(const std::pair<long, Box>& a, const std::pair<long, Box>& b);
  void sift_up(std::size_t i);
  void sift_down(std::size_t i);
};

/// Bisects along the longest side (ties to the lowest index); child bounds
/// follow the parent per the branching rule.
std::pair<Box, Box> branch(const Box& box);

/// Lemma-4 reduction against the window [f_min, beta]: empty when the box
/// cannot reach f_min, otherwise the lower corner is lifted first and the
/// upper corner pulled in second.
std::optional<Box> reduce(const Box& box, double f_min, const SystemUtility& utility);

struct BoundResult {
  double lower = 0.0;  // f at the best feasible point found
  double upper = 0.0;  // upper bound on f over feasible points in the box
  RVec point;          // feasible point achieving `lower`
  std::optional<Strategy> strategy;
};

/// Lemma-5 bounding: line search from the (feasible) lower corner toward the
/// upper corner. Boxes smaller than delta in l1 diameter skip the search.
BoundResult bound(const Box& box, PerformanceOracle& oracle, const SystemUtility& utility,
                  double delta);

struct BrbOptions {
  double epsilon = 1e-2;          // absolute gap target
  double delta = 0.1;             // line-search accuracy
  long max_evaluations = 500000;  // feasibility-problem budget
  double initial_f_min = 0.0;     // seed from a heuristic strategy, if any
  std::optional<RVec> initial_point;
  std::optional<Strategy> initial_strategy;
  double relative_gap_target = 0.0;  // extra stop rule when > 0
};

struct TracePoint {
  long evaluations;
  double f_min;
  double f_max;
};

struct BrbResult {
  double f_min = 0.0;
  double f_max = 0.0;
  RVec point;
  std::optional<Strategy> strategy;
  long evaluations = 0;
  long iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

/// Branch-reduce-and-bound over [0, initial_upper] in g-space. The region
/// tested by the oracle must be compact and normal and contained in the
/// initial box.
BrbResult solve_brb(PerformanceOracle& oracle, const SystemUtility& utility,
                    const RVec& initial_upper, const BrbOptions& options);

struct BruteForceResult {
  double value = 0.0;
  RVec point;
  long evaluations = 0;
  long subboxes = 0;
};

class BruteForceTooLarge : public std::runtime_error {
 public:
  explicit BruteForceTooLarge(const std::string& what) : std::runtime_error(what) {}
};

/// Partitions [0, initial_upper] into subboxes with corner-to-corner
/// f-difference <= epsilon and tests one corner per subbox; the result is
/// within epsilon of the optimum. Refuses to run above the subbox cap.
BruteForceResult brute_force(PerformanceOracle& oracle, const SystemUtility& utility,
                             const RVec& initial_upper, double epsilon, long max_subboxes = 2000000);

}  // namespace mcbf
