#include "ghs/sft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace ghs {

bool SearchNode::contains(PointView alpha) const {
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (alpha[i] != prefix[i]) return false;
  return alpha[prefix.size()] % modulus == residue;
}

std::size_t heavy_list_cap(double sup_bound, double gamma) {
  return static_cast<std::size_t>(std::ceil(16.0 * sup_bound * sup_bound / (gamma * gamma)));
}

std::uint64_t coefficient_sample_size(double sup_bound, double eta, double delta) {
  // Hoeffding on the real and imaginary parts, each to eta/sqrt(2).
  const double ratio = sup_bound / eta;
  return static_cast<std::uint64_t>(std::ceil(4.0 * ratio * ratio * std::log(4.0 / delta)));
}

namespace {

void random_point(const Domain& dom, Rng& rng, std::span<Residue> out) {
  for (auto& v : out) v = rng.below(dom.b);
}

/// omega_b^{-e} with a table for moderate b.
class PhaseTable {
 public:
  explicit PhaseTable(Residue b) : b_(b) {
    if (b <= (Residue{1} << 20)) {
      table_.resize(b);
      for (Residue e = 0; e < b; ++e) table_[e] = std::conj(unit_root(e, b));
    }
  }
  Complex operator()(Residue e) const { return table_.empty() ? std::conj(unit_root(e, b_)) : table_[e]; }

 private:
  Residue b_;
  std::vector<Complex> table_;
};

class QueryCounter {
 public:
  QueryCounter(const QueryFunction& f, std::uint64_t cap) : f_(f), cap_(cap) {}
  Complex operator()(PointView x) {
    if (cap_ != 0 && count_ >= cap_) fail(Errc::budget_exceeded, "significant-coefficient search query cap reached");
    ++count_;
    return f_.eval(x);
  }
  std::uint64_t count() const { return count_; }

 private:
  const QueryFunction& f_;
  std::uint64_t cap_;
  std::uint64_t count_ = 0;
};

/// Shared query batch for one bisection level: every node at the level is
/// estimated from the same evaluations, reweighted by its own phases.
struct LevelSamples {
  std::size_t coord = 0;
  Residue modulus = 1;
  std::size_t points = 0;
  std::size_t shifts = 0;
  std::vector<Residue> prefix_shift;  // (point, shift, i) for i < coord
  std::vector<Residue> step;          // (point, shift): multiple of b/modulus on coord
  std::vector<Complex> value;         // (point, shift)
  std::vector<double> diag;           // per point: sum |value|^2
};

LevelSamples draw_level(const Domain& dom, std::size_t coord, Residue modulus, std::size_t points,
                        std::size_t shifts, QueryCounter& query, Rng rng) {
  LevelSamples s;
  s.coord = coord;
  s.modulus = modulus;
  s.points = points;
  s.shifts = shifts;
  s.prefix_shift.resize(points * shifts * coord);
  s.step.resize(points * shifts);
  s.value.resize(points * shifts);
  s.diag.assign(points, 0.0);
  const Residue stride = dom.b / modulus;
  Point base(dom.n), x(dom.n);
  for (std::size_t p = 0; p < points; ++p) {
    random_point(dom, rng, base);
    for (std::size_t k = 0; k < shifts; ++k) {
      const std::size_t at = p * shifts + k;
      x = base;
      for (std::size_t i = 0; i < coord; ++i) {
        const Residue y = rng.below(dom.b);
        s.prefix_shift[at * coord + i] = y;
        x[i] = addmod(x[i], y, dom.b);
      }
      const Residue t = rng.below(modulus);
      s.step[at] = t;
      x[coord] = addmod(x[coord], mulmod(t, stride, dom.b), dom.b);
      s.value[at] = query(x);
      s.diag[p] += std::norm(s.value[at]);
    }
  }
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double estimate_node(const Domain& dom, const LevelSamples& s, const SearchNode& node, std::size_t arms,
                     const PhaseTable& phase) {
  const Residue stride = dom.b / s.modulus;
  const double pairs = static_cast<double>(s.shifts) * static_cast<double>(s.shifts - 1);
  const Residue class_step = mulmod(node.residue, stride, dom.b);
  std::vector<double> arm_sum(arms, 0.0);
  std::vector<std::size_t> arm_count(arms, 0);
  for (std::size_t p = 0; p < s.points; ++p) {
    Complex u{};
    for (std::size_t k = 0; k < s.shifts; ++k) {
      const std::size_t at = p * s.shifts + k;
      Residue e = mulmod(class_step, s.step[at], dom.b);
      for (std::size_t i = 0; i < s.coord; ++i)
        if (node.prefix[i] != 0) e = addmod(e, mulmod(node.prefix[i], s.prefix_shift[at * s.coord + i], dom.b), dom.b);
      u += s.value[at] * phase(e);
    }
    const std::size_t arm = p * arms / s.points;
    arm_sum[arm] += (std::norm(u) - s.diag[p]) / pairs;
    ++arm_count[arm];
  }
  std::vector<double> means;
  for (std::size_t a = 0; a < arms; ++a)
    if (arm_count[a] > 0) means.push_back(arm_sum[a] / static_cast<double>(arm_count[a]));
  return median(std::move(means));
}

struct SampleSchedule {
  std::size_t points_per_arm;
  std::size_t arms;
  std::size_t shifts;
};

SampleSchedule schedule_for(const QueryFunction& f, double gamma, const SftParams& params, QueryCounter& query,
                            Rng rng) {
  SampleSchedule sch{params.points_per_arm, std::max<std::size_t>(1, params.arms),
                     std::max<std::size_t>(2, params.shifts_per_point)};
  if (sch.points_per_arm != 0) return sch;
  const double sup2 = f.sup_bound * f.sup_bound;
  double e2 = 0.0;
  Point x(f.domain.n);
  const std::size_t m = std::max<std::size_t>(1, params.pilot_points);
  for (std::size_t i = 0; i < m; ++i) {
    random_point(f.domain, rng, x);
    e2 += std::norm(query(x));
  }
  e2 /= static_cast<double>(m);
  const double e2_bound = std::min(sup2, 1.5 * e2 + 3.0 * sup2 / static_cast<double>(m) + gamma * gamma / 8.0);
  // Variance of one base point's U-statistic for a node near the survival
  // threshold: within-batch noise plus the spread of the projected energy.
  const double k = static_cast<double>(sch.shifts);
  const double g2 = gamma * gamma;
  const double variance = 2.0 * e2_bound * e2_bound / (k * k) + 4.0 * e2_bound * g2 / k + g2 * g2;
  const double eta = g2 / 8.0;
  // Chebyshev: each arm misses by more than eta with probability <= 1/4.
  sch.points_per_arm = static_cast<std::size_t>(std::ceil(4.0 * variance / (eta * eta)));
  return sch;
}

void validate(const QueryFunction& f, double gamma, double delta) {
  if (!(gamma > 0.0)) fail(Errc::invalid_argument, "threshold gamma must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "confidence delta must lie in (0, 1)");
  if (!(f.sup_bound > 0.0)) fail(Errc::invalid_argument, "sup bound must be positive");
  if (!f.eval) fail(Errc::invalid_argument, "query function has no evaluator");
}

}  // namespace

Complex estimate_coefficient(const QueryFunction& f, PointView beta, double eta, double delta, Rng& rng,
                             std::uint64_t* queries) {
  if (!(eta > 0.0)) fail(Errc::invalid_argument, "accuracy eta must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "confidence delta must lie in (0, 1)");
  const std::uint64_t m = coefficient_sample_size(f.sup_bound, eta, delta);
  Point x(f.domain.n);
  Complex acc{};
  for (std::uint64_t i = 0; i < m; ++i) {
    random_point(f.domain, rng, x);
    acc += f.eval(x) * std::conj(char_eval(f.domain, beta, x));
  }
  if (queries) *queries += m;
  return acc / static_cast<double>(m);
}

HeavyList find_heavy_brute(const Domain& domain, std::span<const Complex> table, double gamma,
                           const DftOptions& options) {
  const auto dense = dft_dense(domain, table, options);
  HeavyList out;
  for (std::uint64_t idx = 0; idx < dense.size(); ++idx) {
    if (std::abs(dense[idx]) >= gamma / 2.0) out.push_back({domain.point_at(idx), dense[idx]});
  }
  return out;
}

double interval_weight_estimate(const QueryFunction& f, const SearchNode& node, double gamma, double delta,
                                Rng& rng, const SftParams& params, SftStats* stats) {
  validate(f, gamma, delta);
  const auto& dom = f.domain;
  if (node.coordinate() >= dom.n || node.modulus == 0 || dom.b % node.modulus != 0 ||
      node.residue >= node.modulus)
    fail(Errc::invalid_argument, "malformed search node");
  QueryCounter query(f, params.max_queries);
  const auto sch = schedule_for(f, gamma, params, query, rng.substream("sft-pilot"));
  const auto samples = draw_level(dom, node.coordinate(), node.modulus, sch.points_per_arm * sch.arms, sch.shifts,
                                  query, rng.substream("sft-node"));
  const double w = estimate_node(dom, samples, node, sch.arms, PhaseTable(dom.b));
  if (stats) {
    stats->queries += query.count();
    stats->nodes_estimated += 1;
  }
  return w;
}

HeavyList find_heavy_sft(const QueryFunction& f, double gamma, double delta, Rng& rng, const SftParams& params,
                         SftStats* stats) {
  validate(f, gamma, delta);
  const auto& dom = f.domain;
  QueryCounter query(f, params.max_queries);
  const auto sch = schedule_for(f, gamma, params, query, rng.substream("sft-pilot"));
  const auto radices = prime_factors(dom.b);
  const PhaseTable phase(dom.b);
  const double keep = gamma * gamma / 4.0;
  const std::size_t cap = heavy_list_cap(f.sup_bound, gamma);
  SftStats local;

  std::vector<SearchNode> frontier{SearchNode{}};
  std::size_t level = 0;
  for (std::size_t coord = 0; coord < dom.n && !frontier.empty(); ++coord) {
    Residue modulus = 1;
    for (const Residue p : radices) {
      const Residue child_modulus = modulus * p;
      std::vector<SearchNode> children;
      children.reserve(frontier.size() * p);
      for (const auto& node : frontier)
        for (Residue c = 0; c < p; ++c) children.push_back({node.prefix, child_modulus, node.residue + c * modulus});

      const auto samples = draw_level(dom, coord, child_modulus, sch.points_per_arm * sch.arms, sch.shifts, query,
                                      rng.substream("sft-level", coord * 64 + level));
      std::vector<double> weight(children.size());
      parallel_for(children.size(), params.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) weight[i] = estimate_node(dom, samples, children[i], sch.arms, phase);
      });
      local.nodes_estimated += children.size();

      std::vector<std::size_t> order;
      for (std::size_t i = 0; i < children.size(); ++i)
        if (weight[i] >= keep) order.push_back(i);
      // Parseval pruning: keep the heaviest when more survive than can be heavy.
      if (order.size() > cap) {
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto c) { return weight[a] > weight[c]; });
        order.resize(cap);
        std::sort(order.begin(), order.end());
      }
      frontier.clear();
      for (auto i : order) {
        if (params.debug_tree) {
          *params.debug_tree << std::string(2 * (level + 1), ' ') << "coord=" << coord << " prefix=[";
          for (std::size_t j = 0; j < children[i].prefix.size(); ++j)
            *params.debug_tree << (j ? "," : "") << children[i].prefix[j];
          *params.debug_tree << "] class=" << children[i].residue << " mod " << child_modulus
                             << " weight=" << weight[i] << '\n';
        }
        frontier.push_back(std::move(children[i]));
      }
      modulus = child_modulus;
      ++level;
      if (frontier.empty()) break;
    }
    for (auto& node : frontier) {
      node.prefix.push_back(node.residue);
      node.modulus = 1;
      node.residue = 0;
    }
  }
  local.levels = level;

  HeavyList out;
  if (!frontier.empty() && frontier.front().prefix.size() == dom.n) {
    local.candidates = frontier.size();
    const double leaf_delta = delta / (2.0 * static_cast<double>(frontier.size()));
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      Rng leaf_rng = rng.substream("sft-leaf", i);
      std::uint64_t used = 0;
      const Complex est = estimate_coefficient(
          QueryFunction{dom, [&](PointView x) { return query(x); }, f.sup_bound}, frontier[i].prefix, gamma / 4.0,
          leaf_delta, leaf_rng, &used);
      if (std::abs(est) >= 0.75 * gamma) out.push_back({frontier[i].prefix, est});
    }
  }
  if (out.size() > cap) {
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& c) { return std::abs(a.amplitude) > std::abs(c.amplitude); });
    out.resize(cap);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& c) { return a.frequency < c.frequency; });
  local.queries = query.count();
  if (stats) {
    stats->queries += local.queries;
    stats->levels += local.levels;
    stats->nodes_estimated += local.nodes_estimated;
    stats->candidates += local.candidates;
  }
  return out;
}

}  // namespace ghs
