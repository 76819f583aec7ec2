#include "qlab/quantumness.hpp"

#include "qlab/random.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace qlab {

QuantumnessConfig::QuantumnessConfig() {
  search.seesaw.restarts = 8;
  search.certificate.random_probes = 2000;
  search.certificate.verify_restarts = 8;
  search.certificate.search_restarts = 4;
  search.certificate.scalar_fallback = false;
}

namespace {

using Point = std::vector<double>;

class PriorSearch {
 public:
  PriorSearch(std::span<const PureState> states, const QuantumnessConfig& cfg, std::uint64_t seed)
      : states_(states.begin(), states.end()), cfg_(cfg), seed_(seed) {
    const std::size_t n = states_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (cfg.fixed_zero.empty() || !cfg.fixed_zero[i]) free_.push_back(i);
    }
  }

  const std::vector<std::size_t>& free() const { return free_; }
  std::vector<PriorProbe>& trace() { return trace_; }
  int evaluations() const { return static_cast<int>(cache_.size()); }

  Point project(Point p) const {
    Point out(states_.size(), 0.0);
    double total = 0.0;
    for (std::size_t i : free_) {
      out[i] = std::max(p[i], 0.0);
      total += out[i];
    }
    for (std::size_t i : free_) out[i] = total > 0.0 ? out[i] / total : 1.0 / static_cast<double>(free_.size());
    return out;
  }

  double upper(const Point& p) {
    auto it = cache_.find(p);
    if (it != cache_.end()) return it->second;
    const FidelityBracket b = accessible_fidelity(Ensemble(p, states_), cfg_.search, derive_seed(seed_, 7));
    trace_.push_back({p, b.lower, b.upper});
    cache_.emplace(p, b.upper);
    return b.upper;
  }

 private:
  std::vector<PureState> states_;
  const QuantumnessConfig& cfg_;
  std::uint64_t seed_;
  std::vector<std::size_t> free_;
  std::map<Point, double> cache_;
  std::vector<PriorProbe> trace_;
};

Point affine(const Point& a, const Point& b, double t) {
  Point out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + t * (b[i] - a[i]);
  return out;
}

// Nelder-Mead with vertices on the affine hull of the free weights.
void nelder_mead(PriorSearch& search, const Point& start, const QuantumnessConfig& cfg) {
  const std::vector<std::size_t>& free = search.free();
  const int budget = search.evaluations() + cfg.max_evaluations;
  std::vector<std::pair<double, Point>> simplex;
  for (std::size_t k : free) {
    Point v = start;
    for (double& x : v) x *= 1.0 - cfg.initial_step;
    v[k] += cfg.initial_step;
    v = search.project(v);
    simplex.emplace_back(search.upper(v), v);
  }
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  };
  order();
  while (search.evaluations() < budget && simplex.back().first - simplex.front().first > cfg.tolerance) {
    const std::size_t m = simplex.size();
    Point centroid(start.size(), 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
      for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += simplex[k].second[i] / static_cast<double>(m - 1);
    }
    const Point& worst = simplex.back().second;
    const Point reflected = search.project(affine(centroid, worst, -1.0));
    const double fr = search.upper(reflected);
    if (fr < simplex.front().first) {
      const Point expanded = search.project(affine(centroid, worst, -2.0));
      const double fe = search.upper(expanded);
      simplex.back() = fe < fr ? std::make_pair(fe, expanded) : std::make_pair(fr, reflected);
    } else if (fr < simplex[m - 2].first) {
      simplex.back() = {fr, reflected};
    } else {
      const bool outside = fr < simplex.back().first;
      const Point contracted = search.project(affine(centroid, outside ? reflected : worst, 0.5));
      const double fc = search.upper(contracted);
      if (fc < std::min(fr, simplex.back().first)) {
        simplex.back() = {fc, contracted};
      } else {
        for (std::size_t k = 1; k < m; ++k) {
          Point shrunk = search.project(affine(simplex.front().second, simplex[k].second, 0.5));
          simplex[k] = {search.upper(shrunk), shrunk};
        }
      }
    }
    order();
  }
}

}  // namespace

QuantumnessReport quantumness(std::span<const PureState> states, const QuantumnessConfig& config, std::uint64_t seed) {
  if (states.empty()) throw InputError("quantumness: needs at least one state");
  const std::size_t n = states.size();
  if (!config.fixed_zero.empty() && config.fixed_zero.size() != n) {
    throw InputError("quantumness: mask length differs from the number of states");
  }
  if (config.final.certificate.require_spanning && !spans_space(states)) {
    throw InputError("quantumness: the states do not span the space");
  }
  PriorSearch search(states, config, seed);
  if (search.free().empty()) throw InputError("quantumness: every weight is masked");

  Point uniform(n, 0.0);
  uniform = search.project(uniform);
  if (search.free().size() == 1) {
    search.upper(uniform);
  } else {
    Rng rng(derive_seed(seed, 3));
    for (int s = 0; s < std::max(config.starts, 1); ++s) {
      Point start = uniform;
      if (s > 0) {
        const std::vector<double> draw = random_simplex_point(static_cast<int>(search.free().size()), rng);
        std::fill(start.begin(), start.end(), 0.0);
        for (std::size_t k = 0; k < draw.size(); ++k) start[search.free()[k]] = draw[k];
        start = search.project(start);
      }
      nelder_mead(search, start, config);
    }
  }

  QuantumnessReport report;
  report.trace = std::move(search.trace());
  std::vector<std::size_t> order(report.trace.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.trace[a].upper < report.trace[b].upper; });
  std::vector<Point> candidates{uniform};
  for (std::size_t k : order) {
    if (static_cast<int>(candidates.size()) > std::max(config.final_candidates, 0)) break;
    const Point& prior = report.trace[k].prior;
    if (std::find(candidates.begin(), candidates.end(), prior) == candidates.end()) candidates.push_back(prior);
  }
  std::vector<PureState> list(states.begin(), states.end());
  bool first = true;
  for (const Point& prior : candidates) {
    FidelityBracket b = accessible_fidelity(Ensemble(prior, list), config.final, derive_seed(seed, 7));
    if (first || b.upper < report.worst_bracket.upper) {
      report.worst_prior = prior;
      report.value_lower = first ? b.lower : std::min(report.value_lower, b.lower);
      report.worst_bracket = std::move(b);
      first = false;
    } else {
      report.value_lower = std::min(report.value_lower, b.lower);
    }
  }
  report.value_upper = report.worst_bracket.upper;
  for (const PriorProbe& p : report.trace) report.value_lower = std::min(report.value_lower, p.lower);
  return report;
}

ExtremePrior max_fidelity_over_priors(std::span<const PureState> states, std::uint64_t seed) {
  if (states.empty()) throw InputError("max_fidelity_over_priors: needs at least one state");
  ExtremePrior out;
  out.prior.assign(states.size(), 0.0);
  out.prior[0] = 1.0;
  std::vector<PureState> list(states.begin(), states.end());
  out.value = accessible_fidelity_seesaw(Ensemble(out.prior, list), SeesawConfig{}, seed).value;
  return out;
}

}  // namespace qlab
