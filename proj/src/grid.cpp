#include "ghs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace ghs {

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

}  // namespace

Grid::Grid(Domain domain, std::vector<std::vector<Residue>> sets) : domain_(domain), sets_(std::move(sets)) {
  if (sets_.size() != domain_.n) fail(Errc::invalid_argument, "grid needs one value set per coordinate");
  for (const auto& s : sets_) {
    if (s.empty() || s.front() != 0) fail(Errc::invalid_argument, "every grid set must contain 0");
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k] <= s[k - 1]) fail(Errc::invalid_argument, "grid sets must be strictly increasing");
    if (s.back() >= domain_.b) fail(Errc::invalid_argument, "grid value outside [b]");
  }
}

Grid Grid::trivial(Domain domain) { return Grid(domain, std::vector<std::vector<Residue>>(domain.n, {0})); }

std::size_t Grid::nontrivial_count() const {
  return static_cast<std::size_t>(std::count_if(sets_.begin(), sets_.end(), [](const auto& s) { return s.size() > 1; }));
}

std::size_t Grid::max_set_size() const {
  std::size_t m = 1;
  for (const auto& s : sets_) m = std::max(m, s.size());
  return m;
}

bool Grid::insert(std::size_t i, Residue sigma) {
  if (i >= sets_.size()) fail(Errc::index_out_of_range, "grid coordinate out of range");
  if (sigma >= domain_.b) fail(Errc::invalid_argument, "grid value outside [b]");
  auto& s = sets_[i];
  auto it = std::lower_bound(s.begin(), s.end(), sigma);
  if (it != s.end() && *it == sigma) return false;
  s.insert(it, sigma);
  return true;
}

std::size_t Grid::floor_index(std::size_t i, Residue v) const {
  const auto& s = sets_.at(i);
  return static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), v) - s.begin()) - 1;
}

Residue Grid::floor(std::size_t i, Residue v) const { return sets_.at(i)[floor_index(i, v)]; }

Residue Grid::ceil_above(std::size_t i, Residue v) const {
  const auto& s = sets_.at(i);
  auto it = std::upper_bound(s.begin(), s.end(), v);
  return it == s.end() ? domain_.b : *it;
}

std::uint64_t Grid::corner_count() const {
  std::uint64_t c = 1;
  for (const auto& s : sets_) c = sat_mul(c, s.size());
  return c;
}

Residue Grid::width(std::size_t i, std::size_t j) const {
  const auto& s = sets_.at(i);
  return (j + 1 < s.size() ? s[j + 1] : domain_.b) - s.at(j);
}

std::vector<std::size_t> Refinement::active() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.domain().n; ++i)
    if (!grid.is_trivial(i)) out.push_back(i);
  return out;
}

Refinement refine(const Grid& grid, std::size_t kappa, std::size_t ell) {
  const auto& dom = grid.domain();
  if (kappa < 1 || ell < 1) fail(Errc::invalid_argument, "refinement needs kappa, ell >= 1");
  if (grid.nontrivial_count() > kappa) fail(Errc::invalid_argument, "grid has more than kappa non-trivial sets");
  if (grid.max_set_size() > ell) fail(Errc::invalid_argument, "grid set larger than ell");
  const long double kl = static_cast<long double>(kappa) * static_cast<long double>(ell);
  if (static_cast<long double>(dom.b) <= 4.0L * kl)
    fail(Errc::refinement_degenerate, "b <= 4 kappa ell; learn on the full domain instead");

  const Residue gap = dom.b / (4 * static_cast<Residue>(kappa) * static_cast<Residue>(ell));
  Refinement out{grid, kappa, ell, gap, static_cast<double>(static_cast<long double>(dom.b) / kl / gap), 1, 0};

  std::vector<std::vector<Residue>> sets(dom.n);
  std::size_t l_max = 0;
  for (std::size_t i = 0; i < dom.n; ++i) {
    ++out.steps;
    const auto& src = grid.set(i);
    auto& dst = sets[i];
    if (src.size() == 1) {
      dst = {0};
      continue;
    }
    for (std::size_t r = 0; r < src.size(); ++r) {
      const Residue lo = src[r];
      const Residue hi = r + 1 < src.size() ? src[r + 1] : dom.b;
      dst.push_back(lo);
      ++out.steps;
      if (hi - lo > gap) {
        for (Residue v = lo + gap; v < hi; v += gap) {
          dst.push_back(v);
          ++out.steps;
        }
      }
    }
    l_max = std::max(l_max, dst.size());
  }

  for (auto& dst : sets) {
    if (dst.size() <= 1) continue;
    // dst is sorted; walk it to find the smallest missing residues.
    std::vector<Residue> pad;
    Residue candidate = 0;
    std::size_t k = 0;
    while (dst.size() + pad.size() < l_max) {
      ++out.steps;
      if (k < dst.size() && dst[k] == candidate) {
        ++k;
      } else {
        pad.push_back(candidate);
      }
      ++candidate;
    }
    if (!pad.empty()) {
      std::vector<Residue> merged;
      merged.reserve(dst.size() + pad.size());
      std::merge(dst.begin(), dst.end(), pad.begin(), pad.end(), std::back_inserter(merged));
      out.steps += merged.size();
      dst = std::move(merged);
    }
  }

  out.grid = Grid(dom, std::move(sets));
  out.l_max = std::max<std::size_t>(l_max, 1);
  return out;
}

double top_corner_area(const Grid& grid, std::uint64_t count, std::size_t max_classes) {
  // Histogram of corner areas (as fractions of b^n), built one coordinate at a time.
  std::map<double, std::uint64_t, std::greater<>> hist{{1.0, 1}};
  const double b = static_cast<double>(grid.domain().b);
  for (std::size_t i = 0; i < grid.domain().n; ++i) {
    if (grid.is_trivial(i)) continue;
    std::map<double, std::uint64_t, std::greater<>> widths;
    for (std::size_t j = 0; j < grid.set(i).size(); ++j) widths[static_cast<double>(grid.width(i, j)) / b] += 1;
    std::map<double, std::uint64_t, std::greater<>> next;
    for (const auto& [a, ca] : hist) {
      for (const auto& [w, cw] : widths) {
        auto& slot = next[a * w];
        slot = std::min(std::numeric_limits<std::uint64_t>::max() - 1, slot + sat_mul(ca, cw));
      }
      if (next.size() > max_classes) fail(Errc::budget_exceeded, "too many distinct corner areas");
    }
    hist = std::move(next);
  }
  double total = 0.0;
  for (const auto& [area, c] : hist) {
    if (count == 0) break;
    const std::uint64_t take = std::min(count, c);
    total += area * static_cast<double>(take);
    count -= take;
  }
  return total;
}

GridRestriction::GridRestriction(MembershipOracle& base, const Refinement& refinement)
    : base_(base), grid_(refinement.grid), active_(refinement.active()) {
  if (!(base.domain() == grid_.domain())) fail(Errc::invalid_argument, "refinement domain differs from the oracle's");
  sizes_.assign(grid_.domain().n, 1);
  for (auto i : active_) {
    if (grid_.set(i).size() != refinement.l_max) fail(Errc::invalid_argument, "refined sets are not uniform");
    sizes_[i] = refinement.l_max;
  }
  compact_ = active_.empty() ? Domain{1, 2} : Domain::make(active_.size(), refinement.l_max);
}

Residue GridRestriction::translate(std::size_t coord, std::size_t j) const {
  if (coord >= sizes_.size()) fail(Errc::index_out_of_range, "coordinate out of range");
  if (j >= sizes_[coord]) fail(Errc::index_out_of_range, "grid index outside [L_max]");
  return grid_.set(coord)[j];
}

Point GridRestriction::lift(PointView full_index) const {
  if (full_index.size() != sizes_.size()) fail(Errc::invalid_argument, "index vector has the wrong length");
  Point x(sizes_.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = translate(i, full_index[i]);
  return x;
}

int GridRestriction::query_full(PointView full_index) { return base_.query(lift(full_index)); }

int GridRestriction::query(PointView j) {
  if (j.size() != compact_.n) fail(Errc::invalid_argument, "index vector has the wrong length");
  Point x(grid_.domain().n, 0);
  if (active_.empty()) {
    if (j[0] != 0) fail(Errc::index_out_of_range, "grid index outside [L_max]");
  } else {
    for (std::size_t k = 0; k < active_.size(); ++k) x[active_[k]] = translate(active_[k], j[k]);
  }
  return base_.query(x);
}

GridHypothesis::GridHypothesis(Grid grid, std::vector<std::size_t> active, SignSumHypothesis inner)
    : grid_(std::move(grid)), active_(std::move(active)), inner_(std::move(inner)) {
  const std::size_t want = active_.empty() ? 1 : active_.size();
  if (inner_.domain().n != want) fail(Errc::invalid_argument, "inner hypothesis has the wrong dimension");
  for (auto i : active_) {
    if (i >= grid_.domain().n || grid_.is_trivial(i)) fail(Errc::invalid_argument, "active coordinate is trivial");
    if (grid_.set(i).size() != inner_.domain().b) fail(Errc::invalid_argument, "inner alphabet differs from L_max");
  }
}

int GridHypothesis::eval(PointView x) const {
  Point j(active_.empty() ? 1 : active_.size(), 0);
  for (std::size_t k = 0; k < active_.size(); ++k) j[k] = grid_.floor_index(active_[k], x[active_[k]]);
  return inner_.eval(j);
}

nlohmann::ordered_json GridHypothesis::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "grid_sign_sum";
  j["b"] = grid_.domain().b;
  j["n"] = grid_.domain().n;
  j["sets"] = grid_.sets();
  j["active"] = active_;
  j["inner"] = inner_.to_json();
  return j;
}

GridHypothesis GridHypothesis::from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "grid_sign_sum") fail(Errc::invalid_argument, "model kind is not grid_sign_sum");
    const auto dom = Domain::make(j.at("n").get<std::size_t>(), j.at("b").get<Residue>());
    Grid grid(dom, j.at("sets").get<std::vector<std::vector<Residue>>>());
    auto active = j.at("active").get<std::vector<std::size_t>>();
    const auto& ij = j.at("inner");
    SignSumHypothesis inner(Domain{ij.at("n").get<std::size_t>(), ij.at("b").get<Residue>()});
    for (const auto& tj : ij.at("terms")) inner.add({tj.at("beta").get<Frequency>(), tj.at("theta").get<double>()});
    inner.gamma = ij.at("gamma").get<double>();
    inner.stages = ij.at("stages").get<std::size_t>();
    return GridHypothesis(std::move(grid), std::move(active), std::move(inner));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("model json: ") + e.what());
  }
}

GridHypothesis extend_hypothesis(const SignSumHypothesis& g, const Refinement& refinement) {
  return GridHypothesis(refinement.grid, refinement.active(), g);
}

std::uint64_t find_sensitive_draw_cap(double epsilon, double delta) {
  return static_cast<std::uint64_t>(std::ceil(8.0 / epsilon * std::log(2.0 / delta)));
}

SensitiveValue find_sensitive(MembershipOracle& oracle, const Grid& refined, double epsilon, double delta, Rng& rng) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const auto& dom = oracle.domain();
  if (!(dom == refined.domain())) fail(Errc::invalid_argument, "grid domain differs from the oracle's");
  const std::uint64_t cap = find_sensitive_draw_cap(epsilon, delta);

  Point x(dom.n), fl(dom.n);
  int fx = 0, ffl = 0;
  bool found = false;
  for (std::uint64_t draw = 0; draw < cap && !found; ++draw) {
    for (std::size_t i = 0; i < dom.n; ++i) {
      x[i] = rng.below(dom.b);
      fl[i] = refined.floor(i, x[i]);
    }
    if (x == fl) continue;
    fx = oracle.query(x);
    ffl = oracle.query(fl);
    found = fx != ffl;
  }
  if (!found) fail(Errc::no_disagreement_found, "no point separates f from f at the grid floor");

  // H_j takes floors on coordinates < j; f(H_0) = f(x) and f(H_n) = f(floor x).
  auto hybrid = [&](std::size_t j) {
    Point h = x;
    std::copy(fl.begin(), fl.begin() + static_cast<std::ptrdiff_t>(j), h.begin());
    return h;
  };
  std::size_t lo = 0, hi = dom.n;
  int f_lo = fx;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const int v = oracle.query(hybrid(mid));
    if (v == f_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::size_t coord = lo;

  // g(v) on (floor x_i, x_i]: g(x_i) = f(H_i) = f(x) and g(floor x_i) =
  // f(H_{i+1}) is the other label.
  Point probe = hybrid(coord);
  const int g_floor = -fx;
  Residue vlo = fl[coord], vhi = x[coord];
  while (vhi - vlo > 1) {
    const Residue mid = vlo + (vhi - vlo) / 2;
    probe[coord] = mid;
    if (oracle.query(probe) == g_floor) {
      vlo = mid;
    } else {
      vhi = mid;
    }
  }
  probe[coord] = vhi;
  return {coord, vhi, probe};
}

std::uint64_t accuracy_test_samples(double epsilon, double delta) {
  return static_cast<std::uint64_t>(std::ceil(128.0 / (epsilon * epsilon) * std::log(2.0 / delta)));
}

AccuracyResult accuracy_test(MembershipOracle& oracle, const std::function<int(PointView)>& h, double epsilon,
                             double delta, Rng& rng) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const auto& dom = oracle.domain();
  const std::uint64_t m = accuracy_test_samples(epsilon, delta);
  Point x(dom.n);
  std::uint64_t wrong = 0;
  for (std::uint64_t k = 0; k < m; ++k) {
    for (auto& v : x) v = rng.below(dom.b);
    if (oracle.query(x) != h(x)) ++wrong;
  }
  AccuracyResult r;
  r.samples = m;
  r.empirical_error = static_cast<double>(wrong) / static_cast<double>(m);
  r.pass = r.empirical_error <= 3.0 * epsilon / 8.0;
  return r;
}

int Algorithm2Result::eval(PointView x) const {
  if (grid_hypothesis) return grid_hypothesis->eval(x);
  if (fallback_hypothesis) return fallback_hypothesis->eval(x);
  fail(Errc::learner_failure, "no hypothesis was produced");
}

nlohmann::ordered_json Algorithm2Result::transcript() const {
  nlohmann::ordered_json j;
  auto its = nlohmann::ordered_json::array();
  for (const auto& it : iterations) {
    nlohmann::ordered_json ij;
    ij["kappa"] = it.kappa;
    ij["ell"] = it.ell;
    ij["L_max"] = it.l_max;
    ij["queries"] = it.queries;
    ij["test"] = it.pass ? "pass" : "fail";
    if (it.added) {
      ij["added"] = {{"coord", it.added->coord}, {"sigma", it.added->sigma}};
    } else {
      ij["added"] = nullptr;
    }
    its.push_back(std::move(ij));
  }
  j["iterations"] = std::move(its);
  j["fallback"] = fallback;
  return j;
}

namespace {

SignSumHypothesis constant_hypothesis(int value) {
  SignSumHypothesis g(Domain{1, 2});
  g.add({{0}, value < 0 ? std::numbers::pi : 0.0});
  return g;
}

}  // namespace

Algorithm2Result algorithm2_learn(MembershipOracle& oracle, const Algorithm2Params& params, Rng& rng) {
  const double eps = params.epsilon;
  if (!(eps > 0.0 && eps < 1.0)) fail(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(params.delta > 0.0 && params.delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const auto& dom = oracle.domain();
  const std::uint64_t start = oracle.query_count();

  Algorithm2Result result;
  auto fall_back = [&](std::string reason) {
    result.fallback = true;
    result.fallback_reason = std::move(reason);
    result.grid_hypothesis.reset();
    GhsParams p = params.ghs;
    p.epsilon = eps;
    p.delta = params.delta;
    p.weak.truth = nullptr;
    p.weak.density = nullptr;
    Rng fb = rng.substream("alg2-fallback");
    auto run = ghs_learn(oracle, params.schedule, p, fb);
    result.fallback_hypothesis = std::move(run.hypothesis);
    result.stages = run.stages;
    result.gamma = run.gamma;
    result.queries = oracle.query_count() - start;
    return result;
  };

  Grid grid = Grid::trivial(dom);
  for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
    IterationRecord rec;
    rec.kappa = std::max<std::size_t>(1, grid.nontrivial_count());
    rec.ell = grid.max_set_size();
    std::optional<Refinement> ref;
    try {
      ref = refine(grid, rec.kappa, rec.ell);
    } catch (const Error& e) {
      if (e.code() != Errc::refinement_degenerate) throw;
      return fall_back(errc_name(e.code()));
    }
    rec.l_max = ref->l_max;

    GridRestriction restricted(oracle, *ref);
    SignSumHypothesis g;
    if (!restricted.has_active()) {
      g = constant_hypothesis(restricted.query(Point{0}));
      result.stages = 0;
      result.gamma = 0.0;
    } else {
      GhsParams p = params.ghs;
      p.epsilon = eps / 8.0;
      p.delta = params.delta;
      p.weak.truth = nullptr;
      p.weak.density = nullptr;
      Rng inner = rng.substream("alg2-ghs", iter);
      auto run = ghs_learn(restricted, params.schedule, p, inner);
      g = std::move(run.hypothesis);
      result.stages = run.stages;
      result.gamma = run.gamma;
    }
    GridHypothesis h = extend_hypothesis(g, *ref);
    auto h_fn = [&h](PointView x) { return h.eval(x); };

    std::optional<SensitiveValue> found;
    for (std::size_t attempt = 0; attempt <= params.test_retries && !rec.pass && !found; ++attempt) {
      Rng test_rng = rng.substream("alg2-test", iter * 64 + attempt);
      rec.pass = accuracy_test(oracle, h_fn, eps, params.delta, test_rng).pass;
      if (rec.pass) break;
      Rng search_rng = rng.substream("alg2-search", iter * 64 + attempt);
      try {
        found = find_sensitive(oracle, ref->grid, eps, params.delta, search_rng);
      } catch (const Error& e) {
        if (e.code() != Errc::no_disagreement_found) throw;
      }
    }

    if (rec.pass) {
      rec.queries = oracle.query_count();
      result.iterations.push_back(rec);
      result.grid_hypothesis = std::move(h);
      result.queries = oracle.query_count() - start;
      return result;
    }
    if (!found) {
      rec.queries = oracle.query_count();
      result.iterations.push_back(rec);
      return fall_back(errc_name(Errc::no_disagreement_found));
    }
    if (!grid.insert(found->coord, found->sigma))
      fail(Errc::learner_failure, "sensitive value search returned a known value");
    rec.added = std::move(found);
    rec.queries = oracle.query_count();
    result.iterations.push_back(std::move(rec));
  }
  return fall_back("iteration-cap");
}

}  // namespace ghs
