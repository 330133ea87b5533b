// SPDX-License-Identifier: Apache-2.0

#include "mcbf/brb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcbf {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

int longest_dim(const RVec& lower, const RVec& upper) {
  int dim = 0;
  double best = -kInf;
  for (int k = 0; k < lower.size(); ++k) {
    const double side = upper(k) - lower(k);
    if (side > best) {
      best = side;
      dim = k;
    }
  }
  return dim;
}
}  // namespace

double Box::longest_side() const {
  return (upper - lower).maxCoeff();
}

bool BoxSet::less(const std::pair<long, Box>& a, const std::pair<long, Box>& b) {
  if (a.second.beta != b.second.beta) return a.second.beta < b.second.beta;
  return a.first > b.first;  // smaller sequence wins ties
}

void BoxSet::insert(Box box) {
  heap_.emplace_back(next_seq_++, std::move(box));
  sift_up(heap_.size() - 1);
}

Box BoxSet::extract_max() {
  if (heap_.empty()) throw std::logic_error("BoxSet::extract_max on empty set");
  Box out = std::move(heap_.front().second);
  heap_.front() = std::move(heap_.back());
  heap_.pop_back();
  if (!heap_.empty()) sift_down(0);
  return out;
}

double BoxSet::max_beta() const { return heap_.empty() ? -kInf : heap_.front().second.beta; }

void BoxSet::sift_up(std::size_t i) {
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (!less(heap_[parent], heap_[i])) break;
    std::swap(heap_[parent], heap_[i]);
    i = parent;
  }
}

void BoxSet::sift_down(std::size_t i) {
  const std::size_t n = heap_.size();
  while (true) {
    std::size_t largest = i;
    const std::size_t l = 2 * i + 1, r = 2 * i + 2;
    if (l < n && less(heap_[largest], heap_[l])) largest = l;
    if (r < n && less(heap_[largest], heap_[r])) largest = r;
    if (largest == i) return;
    std::swap(heap_[i], heap_[largest]);
    i = largest;
  }
}

std::pair<Box, Box> branch(const Box& box) {
  const int dim = longest_dim(box.lower, box.upper);
  const double s = 0.5 * (box.upper(dim) - box.lower(dim));
  if (!(s > 0.0)) throw std::invalid_argument("branch: degenerate box");
  Box left{box.lower, box.upper, 0.0};
  left.upper(dim) -= s;
  Box right{box.lower, box.upper, box.beta};
  right.lower(dim) += s;
  left.beta = box.beta;  // tightened by the caller against f(left.upper)
  return {std::move(left), std::move(right)};
}

std::optional<Box> reduce(const Box& box, double f_min, const SystemUtility& utility) {
  if (box.beta < f_min) return std::nullopt;
  const ReductionCoefficients rc = reduction_coefficients(utility, box.lower, box.upper, f_min, box.beta);
  Box out = box;
  for (int k = 0; k < box.lower.size(); ++k) {
    out.lower(k) = box.upper(k) - rc.nu(k) * (box.upper(k) - box.lower(k));
  }
  for (int k = 0; k < box.lower.size(); ++k) {
    out.upper(k) = out.lower(k) + rc.mu(k) * (box.upper(k) - out.lower(k));
  }
  return out;
}

BoundResult bound(const Box& box, PerformanceOracle& oracle, const SystemUtility& utility,
                  double delta) {
  BoundResult result;
  const double diam = box.l1_diameter();
  if (diam < delta) {
    // Too small for a line search; corner values bound the box.
    result.lower = utility.eval(box.lower);
    result.upper = utility.eval(box.upper);
    result.point = box.lower;
    return result;
  }
  // Probing the upper corner first settles fully-feasible boxes exactly and
  // otherwise certifies f_upper = ||b - a||_1 for the bisection.
  OracleResult top = oracle.contains(box.upper);
  if (top.feasible) {
    result.lower = utility.eval(box.upper);
    result.upper = result.lower;
    result.point = box.upper;
    result.strategy = std::move(top.strategy);
    return result;
  }
  FairnessProfile profile{box.lower, (box.upper - box.lower) / diam};
  RfoOptions opts;
  opts.skip_initial_check = true;  // the caller certified the lower corner
  const RfoResult rfo = solve_rfo(oracle, profile, delta, diam, opts);
  result.lower = utility.eval(rfo.point);
  result.point = rfo.point;
  result.strategy = rfo.strategy;
  const RVec n = box.lower + rfo.f_hi * profile.direction;
  double upper = -kInf;
  for (int k = 0; k < box.lower.size(); ++k) {
    RVec corner = box.upper;
    corner(k) = n(k);
    upper = std::max(upper, utility.eval(corner));
  }
  result.upper = std::max(upper, result.lower);
  return result;
}

BrbResult solve_brb(PerformanceOracle& oracle, const SystemUtility& utility,
                    const RVec& initial_upper, const BrbOptions& options) {
  const int dim = static_cast<int>(initial_upper.size());
  if ((initial_upper.array() <= 0.0).any()) {
    throw std::invalid_argument("solve_brb: initial box must have positive volume");
  }
  CountingOracle counted(oracle);

  BrbResult result;
  const RVec origin = RVec::Zero(dim);
  result.f_min = std::max(utility.eval(origin), options.initial_f_min);
  result.point = options.initial_point.value_or(origin);
  result.strategy = options.initial_strategy;
  result.f_max = utility.eval(initial_upper);

  BoxSet live;
  live.insert(Box{origin, initial_upper, result.f_max});

  auto gap_closed = [&]() {
    if (result.f_max - result.f_min <= options.epsilon) return true;
    if (options.relative_gap_target > 0.0 && result.f_min > 0.0 &&
        (result.f_max - result.f_min) / result.f_min <= options.relative_gap_target) {
      return true;
    }
    return false;
  };

  result.trace.push_back({0, result.f_min, result.f_max});
  while (!gap_closed() && counted.count() < options.max_evaluations) {
    if (live.empty()) {
      // No live box can hold anything above f_min.
      result.f_max = result.f_min;
      break;
    }
    Box selected = live.extract_max();
    ++result.iterations;
    if (selected.beta <= result.f_min) {
      // Stale box; everything else is no better.
      result.f_max = result.f_min;
      break;
    }
    if (!(selected.longest_side() > 0.0)) {
      // Degenerate to a point: resolve by a single membership test.
      OracleResult r = counted.contains(selected.lower);
      if (r.feasible) {
        const double value = utility.eval(selected.lower);
        if (value > result.f_min) {
          result.f_min = value;
          result.point = selected.lower;
          if (r.strategy) result.strategy = std::move(r.strategy);
        }
      }
      result.f_max = std::max(live.max_beta(), result.f_min);
      result.trace.push_back({counted.count(), result.f_min, result.f_max});
      continue;
    }

    auto [child1, child2] = branch(selected);
    child1.beta = std::min(selected.beta, utility.eval(child1.upper));
    child2.beta = selected.beta;

    std::optional<Box> reduced1 =
        child1.beta >= result.f_min ? reduce(child1, result.f_min, utility) : std::nullopt;
    std::optional<Box> reduced2 =
        child2.beta >= result.f_min ? reduce(child2, result.f_min, utility) : std::nullopt;

    if (reduced2) {
      OracleResult corner = counted.contains(reduced2->lower);
      if (!corner.feasible) {
        reduced2.reset();  // no feasible point anywhere in the box
      } else {
        const double corner_value = utility.eval(reduced2->lower);
        if (corner_value > result.f_min) {
          result.f_min = corner_value;
          result.point = reduced2->lower;
          if (corner.strategy) result.strategy = std::move(corner.strategy);
        }
        BoundResult bounds = bound(*reduced2, counted, utility, options.delta);
        if (bounds.lower > result.f_min) {
          result.f_min = bounds.lower;
          result.point = bounds.point;
          if (bounds.strategy) result.strategy = std::move(bounds.strategy);
        }
        reduced2->beta = std::min(reduced2->beta, bounds.upper);
        if (reduced2->beta <= result.f_min) reduced2.reset();
      }
    }
    if (reduced1) live.insert(std::move(*reduced1));
    if (reduced2) live.insert(std::move(*reduced2));

    result.f_max = std::max(live.empty() ? result.f_min : live.max_beta(), result.f_min);
    result.trace.push_back({counted.count(), result.f_min, result.f_max});
  }

  result.evaluations = counted.count();
  result.converged = gap_closed();
  return result;
}

BruteForceResult brute_force(PerformanceOracle& oracle, const SystemUtility& utility,
                             const RVec& initial_upper, double epsilon, long max_subboxes) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("brute_force: epsilon must be positive");
  struct Leaf {
    RVec lower;
    double value;
  };
  std::vector<Leaf> leaves;
  std::vector<std::pair<RVec, RVec>> stack;
  stack.emplace_back(RVec::Zero(initial_upper.size()), initial_upper);
  while (!stack.empty()) {
    auto [lo, hi] = std::move(stack.back());
    stack.pop_back();
    if (utility.eval(hi) - utility.eval(lo) <= epsilon) {
      leaves.push_back({lo, utility.eval(lo)});
      if (static_cast<long>(leaves.size()) > max_subboxes) {
        throw BruteForceTooLarge("brute_force: projected subbox count above the cap");
      }
      continue;
    }
    const int dim = longest_dim(lo, hi);
    const double mid = 0.5 * (lo(dim) + hi(dim));
    RVec hi1 = hi;
    hi1(dim) = mid;
    RVec lo2 = lo;
    lo2(dim) = mid;
    stack.emplace_back(lo, std::move(hi1));
    stack.emplace_back(std::move(lo2), hi);
    if (static_cast<long>(stack.size() + leaves.size()) > 4 * max_subboxes) {
      throw BruteForceTooLarge("brute_force: partition blow-up");
    }
  }
  // One feasibility problem per subbox, highest lower-corner value first; the
  // first feasible corner is the answer because later corners cannot beat it.
  std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) { return a.value > b.value; });
  BruteForceResult result;
  result.subboxes = static_cast<long>(leaves.size());
  result.point = RVec::Zero(initial_upper.size());
  for (const Leaf& leaf : leaves) {
    ++result.evaluations;
    if (oracle.contains(leaf.lower).feasible) {
      result.value = leaf.value;
      result.point = leaf.lower;
      return result;
    }
  }
  result.value = 0.0;  // the origin is always in a normal region
  return result;
}

}  // namespace mcbf
