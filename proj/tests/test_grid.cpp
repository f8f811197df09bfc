#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "ghs/grid.hpp"
#include "grid_helpers.hpp"
#include "helpers.hpp"

using namespace ghs;
using ghs::test::lit;
using ghs::test::rect;

namespace {

bool contains(const std::vector<Residue>& s, Residue v) { return std::find(s.begin(), s.end(), v) != s.end(); }

Refinement manual(const Grid& g) {
  Refinement r{g};
  r.l_max = std::max<std::size_t>(1, g.max_set_size());
  return r;
}

}  // namespace

TEST_CASE("grid validation and lookups") {
  const auto d = Domain::make(2, 16);
  CHECK_THROWS_AS(Grid(d, {{1, 3}, {0}}), Error);
  CHECK_THROWS_AS(Grid(d, {{0, 3, 3}, {0}}), Error);
  CHECK_THROWS_AS(Grid(d, {{0, 16}, {0}}), Error);
  CHECK_THROWS_AS(Grid(d, {{0}}), Error);
  Grid g(d, {{0, 5, 9}, {0}});
  CHECK(g.floor(0, 4) == 0);
  CHECK(g.floor(0, 5) == 5);
  CHECK(g.floor(0, 15) == 9);
  CHECK(g.floor_index(0, 7) == 1);
  CHECK(g.ceil_above(0, 5) == 9);
  CHECK(g.ceil_above(0, 12) == 16);
  CHECK(g.width(0, 2) == 7);
  CHECK(g.corner_count() == 3);
  CHECK(g.nontrivial_count() == 1);
  CHECK(g.insert(1, 4));
  CHECK_FALSE(g.insert(1, 4));
  CHECK(g.set(1) == std::vector<Residue>{0, 4});
}

TEST_CASE("refinement hand example") {
  const Grid g(Domain::make(1, 16), {{0, 5}});
  const auto r = refine(g, 1, 2);
  CHECK(r.gap == 2);
  CHECK(r.grid.set(0) == std::vector<Residue>{0, 2, 4, 5, 7, 9, 11, 13, 15});
  CHECK(r.l_max == 9);
  CHECK(r.c == doctest::Approx(4.0));
  CHECK(r.size_bound() == doctest::Approx(10.0));
  CHECK(r.active() == std::vector<std::size_t>{0});
}

TEST_CASE("refinement of the trivial grid") {
  const auto d = Domain::make(3, 64);
  const auto r = refine(Grid::trivial(d), 1, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.grid.set(i) == std::vector<Residue>{0});
  CHECK(r.grid.corner_count() == 1);
  CHECK(r.l_max == 1);
  CHECK(r.active().empty());
  CHECK(top_corner_area(r.grid, 1) == doctest::Approx(1.0));
}

TEST_CASE("refinement preconditions") {
  const Grid g(Domain::make(2, 16), {{0, 5}, {0, 3}});
  CHECK_THROWS_AS(refine(g, 1, 2), Error);  // two non-trivial sets
  CHECK_THROWS_AS(refine(g, 2, 1), Error);  // a set larger than ell
  try {
    refine(g, 2, 2);
    FAIL("degenerate refinement accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::refinement_degenerate);
  }
}

TEST_CASE("refinement properties on random grids") {
  Rng root(2024);
  for (int t = 0; t < 300; ++t) {
    Rng rng = root.substream("grid", t);
    const auto rg = ghs::test::random_grid(rng, 6, 1u << 16, 8);
    const auto r = refine(rg.grid, rg.kappa, rg.ell);
    const auto& d = rg.grid.domain();
    CHECK(r.c >= 4.0);
    for (std::size_t i = 0; i < d.n; ++i) {
      for (Residue v : rg.grid.set(i)) CHECK(contains(r.grid.set(i), v));
      CHECK(r.grid.is_trivial(i) == rg.grid.is_trivial(i));
      if (!r.grid.is_trivial(i)) CHECK(r.grid.set(i).size() == r.l_max);
    }
    CHECK(static_cast<double>(r.l_max) <= r.size_bound() + 1e-9);
    const double work = static_cast<double>(d.n * rg.kappa * rg.ell) * std::log2(static_cast<double>(d.b));
    CHECK(static_cast<double>(r.steps) <= 32.0 * work);

    const std::uint64_t corners = r.grid.corner_count();
    if (corners <= 200000) {
      const auto areas = ghs::test::corner_areas(r.grid);
      for (double e : {0.01, 0.1, 0.5}) {
        const auto k = static_cast<std::uint64_t>(std::floor(e * static_cast<double>(corners)));
        double top = 0.0;
        for (std::uint64_t q = 0; q < k; ++q) top += areas[q];
        CHECK(top_corner_area(r.grid, k) == doctest::Approx(top).epsilon(1e-9));
        CHECK(top <= 2.0 * e + 1e-12);
      }
    }
  }
}

TEST_CASE("restricted oracle") {
  const auto d = Domain::make(2, 64);
  const auto c = ghs::test::union_of(d, {rect({lit(0, -1, 10, 30), lit(1, -1, 5, 40)})});
  ConceptOracle base(c);
  const auto r = refine(Grid(d, {{0, 10}, {0}}), 1, 2);
  GridRestriction res(base, r);
  CHECK(res.active() == std::vector<std::size_t>{0});
  CHECK(res.sizes() == std::vector<std::size_t>{r.l_max, 1});
  CHECK(res.domain().n == 1);
  CHECK(res.domain().b == r.l_max);
  CHECK(res.translate(1, 0) == 0);
  CHECK(res.translate(0, 1) == r.grid.set(0)[1]);
  CHECK_THROWS_AS(res.translate(1, 1), Error);
  CHECK_THROWS_AS(res.query(Point{r.l_max}), Error);

  // Exhaustive comparison against the base target at the grid points.
  for (Residue j = 0; j < r.l_max; ++j) {
    const auto before = base.query_count();
    CHECK(res.query(Point{j}) == c.eval(Point{r.grid.set(0)[j], 0}));
    CHECK(base.query_count() == before + 1);
    CHECK(res.query_full(Point{j, 0}) == c.eval(Point{r.grid.set(0)[j], 0}));
  }

  // A stride-2 set: index 1 hits residue 2.
  ConceptOracle small(ghs::test::union_of(Domain::make(1, 16), {rect({lit(0, -1, 2, 2)})}));
  const auto r2 = refine(Grid(small.domain(), {{0, 8}}), 1, 2);
  REQUIRE(r2.grid.set(0) == std::vector<Residue>{0, 2, 4, 6, 8, 10, 12, 14});
  GridRestriction stride(small, r2);
  CHECK(stride.translate(0, 1) == 2);
  CHECK(stride.lift(Point{1}) == Point{2});
  CHECK(stride.query(Point{1}) == -1);
  CHECK(stride.query(Point{2}) == 1);

  // No active coordinate: [2]^1 with only index 0 valid.
  const auto r0 = refine(Grid::trivial(d), 1, 1);
  GridRestriction flat(base, r0);
  CHECK_FALSE(flat.has_active());
  CHECK(flat.query(Point{0}) == c.eval(Point{0, 0}));
  CHECK_THROWS_AS(flat.query(Point{1}), Error);
}

TEST_CASE("restricted truth tables on random grids") {
  Rng root(7);
  for (int t = 0; t < 40; ++t) {
    Rng rng = root.substream("restrict", t);
    GenParams gp;
    gp.n = 2;
    gp.b = 32 + rng.below(33);
    gp.s = 2;
    gp.r = 2;
    const auto c = gen_target(gp, t);
    ConceptOracle base(c);
    std::vector<std::vector<Residue>> sets(2, std::vector<Residue>{0});
    const std::size_t coord = rng.below(2);
    sets[coord].push_back(1 + rng.below(gp.b - 1));
    const auto r = refine(Grid(c.domain(), sets), 1, 2);
    GridRestriction res(base, r);
    const auto& cd = res.domain();
    Point j(cd.n);
    for (std::uint64_t idx = 0; idx < *cd.size(); ++idx) {
      cd.point_at(idx, j);
      Point x{0, 0};
      x[coord] = r.grid.set(coord)[j[0]];
      CHECK(res.query(j) == c.eval(x));
    }
  }
}

TEST_CASE("extended hypothesis") {
  const auto d = Domain::make(1, 8);
  const auto r = manual(Grid(d, {{0, 4}}));
  SignSumHypothesis g(Domain::make(1, 2));
  g.add({{1}, 0.0});  // +1 at index 0, -1 at index 1
  const auto h = extend_hypothesis(g, r);
  CHECK(h.eval(Point{6}) == -1);
  CHECK(h.eval(Point{4}) == -1);
  CHECK(h.eval(Point{3}) == 1);
  CHECK(h.eval(Point{0}) == 1);
  const auto back = GridHypothesis::from_json(nlohmann::json::parse(h.to_json().dump()));
  CHECK(back.to_json().dump() == h.to_json().dump());
  for (Residue x = 0; x < 8; ++x) CHECK(back.eval(Point{x}) == h.eval(Point{x}));
}

TEST_CASE("extended hypotheses are constant on corner regions") {
  Rng root(11);
  for (int t = 0; t < 20; ++t) {
    Rng rng = root.substream("extend", t);
    const auto d = Domain::make(2, 17 + rng.below(16));
    std::vector<std::vector<Residue>> sets(2, std::vector<Residue>{0});
    sets[0].push_back(1 + rng.below(d.b - 1));
    if (t % 2) sets[1].push_back(1 + rng.below(d.b - 1));
    const auto r = refine(Grid(d, sets), 2, 2);
    const auto act = r.active();
    SignSumHypothesis g(Domain::make(act.size(), r.l_max));
    for (int k = 0; k < 5; ++k) {
      Frequency beta(act.size());
      for (auto& v : beta) v = rng.below(r.l_max);
      g.add({beta, 6.28 * rng.uniform()});
    }
    const auto h = extend_hypothesis(g, r);
    Point x(2), corner(2), idx(act.size());
    for (std::uint64_t i = 0; i < *d.size(); ++i) {
      d.point_at(i, x);
      for (std::size_t c = 0; c < 2; ++c) corner[c] = r.grid.floor(c, x[c]);
      CHECK(h.eval(x) == h.eval(corner));
      for (std::size_t a = 0; a < act.size(); ++a) idx[a] = r.grid.floor_index(act[a], x[act[a]]);
      CHECK(h.eval(x) == g.eval(idx));
    }
  }
}

TEST_CASE("sensitive value search hand trace") {
  const auto c = ghs::test::union_of(Domain::make(1, 8), {rect({lit(0, -1, 3, 5)})});
  const Grid g(c.domain(), {{0, 2, 4, 6}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ConceptOracle o(c);
    Rng rng(seed);
    const auto s = find_sensitive(o, g, 0.1, 0.1, rng);
    CHECK(s.coord == 0);
    CHECK(s.sigma == 3);
    CHECK(is_sensitive(o, s.coord, s.sigma, s.witness));
  }
  // Agreement everywhere: f(floor x) = f(x) for the grid of sensitive values.
  ConceptOracle o(c);
  Rng rng(3);
  try {
    find_sensitive(o, Grid(c.domain(), {{0, 3, 6}}), 0.1, 0.1, rng);
    FAIL("disagreement reported on an exact grid");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_disagreement_found);
  }
  // Draws that land on a grid point need only one query.
  CHECK(o.query_count() >= find_sensitive_draw_cap(0.1, 0.1));
  CHECK(o.query_count() <= 2 * find_sensitive_draw_cap(0.1, 0.1));
  CHECK(find_sensitive_draw_cap(0.1, 0.1) == static_cast<std::uint64_t>(std::ceil(80.0 * std::log(20.0))));
}

TEST_CASE("sensitive values found on random targets") {
  int found = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GenParams gp;
    gp.n = 2 + seed % 2;
    gp.b = 16 + seed % 17;
    gp.s = 2;
    gp.r = 2;
    const auto c = gen_target(gp, seed);
    const auto cand = candidate_sensitive_values(c);
    ConceptOracle o(c);
    Rng rng(seed);
    const auto r = refine(Grid::trivial(c.domain()), 1, 1);
    try {
      const auto s = find_sensitive(o, r.grid, 0.05, 0.1, rng);
      ++found;
      CHECK(is_sensitive(o, s.coord, s.sigma, s.witness));
      CHECK_FALSE(contains(r.grid.set(s.coord), s.sigma));
      CHECK(contains(cand[s.coord], s.sigma));
      CHECK(ghs::test::sensitive_somewhere(c, s.coord, s.sigma));
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_disagreement_found);
    }
  }
  CHECK(found >= 90);
}

TEST_CASE("accuracy test") {
  const auto c = ghs::test::union_of(Domain::make(1, 100), {rect({lit(0, -1, 30, 69)})});
  CHECK(accuracy_test_samples(0.1, 0.1) == static_cast<std::uint64_t>(std::ceil(12800.0 * std::log(20.0))));
  ConceptOracle o(c);
  Rng rng(1);
  auto same = accuracy_test(o, [&c](PointView x) { return c.eval(x); }, 0.1, 0.1, rng);
  CHECK(same.pass);
  CHECK(same.empirical_error == 0.0);
  CHECK(same.samples == accuracy_test_samples(0.1, 0.1));
  CHECK_FALSE(accuracy_test(o, [&c](PointView x) { return -c.eval(x); }, 0.1, 0.1, rng).pass);

  // Exact error 0.2: flipped on x < 20.
  auto off = [&c](PointView x) { return x[0] < 20 ? -c.eval(x) : c.eval(x); };
  int failed = 0;
  for (int t = 0; t < 100; ++t) {
    Rng r = Rng(5).substream("acc", t);
    failed += !accuracy_test(o, off, 0.1, 0.1, r).pass;
  }
  CHECK(failed >= 90);
}

TEST_CASE("grid learner on a constant target") {
  FunctionOracle o(Domain::make(3, 1u << 16), [](PointView) { return 1; });
  Algorithm2Params p;
  Rng rng(1);
  const auto r = algorithm2_learn(o, p, rng);
  REQUIRE(r.iterations.size() == 1);
  CHECK(r.iterations[0].pass);
  CHECK_FALSE(r.iterations[0].added);
  CHECK_FALSE(r.fallback);
  REQUIRE(r.grid_hypothesis);
  CHECK(r.eval(Point{123, 4567, 65535}) == 1);
  const auto t = r.transcript();
  CHECK(t["iterations"][0]["added"].is_null());
  CHECK(t["iterations"][0]["test"] == "pass");
  CHECK(t["fallback"] == false);
}

namespace {

void audit_run(const Concept& c, const Algorithm2Result& r) {
  const auto cand = candidate_sensitive_values(c);
  ConceptOracle fresh(c);
  std::vector<std::set<Residue>> seen(c.domain().n);
  std::size_t prev_kappa = 0, prev_ell = 0;
  for (const auto& it : r.iterations) {
    CHECK(it.kappa >= prev_kappa);
    CHECK(it.ell >= prev_ell);
    prev_kappa = it.kappa;
    prev_ell = it.ell;
    if (!it.added) continue;
    const auto& s = *it.added;
    CHECK(is_sensitive(fresh, s.coord, s.sigma, s.witness));
    CHECK(contains(cand[s.coord], s.sigma));
    CHECK(seen[s.coord].insert(s.sigma).second);
  }
}

}  // namespace

TEST_CASE("grid learner on two one-dimensional rectangles") {
  const auto d = Domain::make(2, 1u << 16);
  const auto c = ghs::test::union_of(d, {rect({lit(0, -1, 5000, 30000)}), rect({lit(1, -1, 20000, 52000)})});
  ConceptOracle o(c);
  Algorithm2Params p;
  Rng rng(3);
  const auto r = algorithm2_learn(o, p, rng);
  CHECK_FALSE(r.fallback);
  CHECK(r.iterations.size() <= 9);
  CHECK(r.iterations.back().pass);
  audit_run(c, r);
  Rng er(9);
  Point x(2);
  std::uint64_t wrong = 0;
  const std::uint64_t m = 100000;
  for (std::uint64_t i = 0; i < m; ++i) {
    x = {er.below(d.b), er.below(d.b)};
    wrong += r.eval(x) != c.eval(x);
  }
  CHECK(static_cast<double>(wrong) / m <= 3.0 * 0.1 / 8.0);
}

TEST_CASE("grid learner discovers planted sensitive values") {
  const auto d = Domain::make(2, 64);
  const auto c = ghs::test::union_of(d, {rect({lit(0, -1, 3, 5)})});
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ConceptOracle o(c);
    Algorithm2Params p;
    Rng rng(seed);
    const auto r = algorithm2_learn(o, p, rng);
    audit_run(c, r);
    for (const auto& it : r.iterations) {
      if (!it.added) continue;
      CHECK(it.added->coord == 0);
      CHECK((it.added->sigma == 3 || it.added->sigma == 6));
    }
  }
}

TEST_CASE("grid learner falls back when the grid degenerates") {
  const auto c = ghs::test::union_of(Domain::make(1, 8), {rect({lit(0, -1, 2, 5)})});
  ConceptOracle o(c);
  Algorithm2Params p;
  p.epsilon = 0.05;
  Rng rng(4);
  const auto r = algorithm2_learn(o, p, rng);
  CHECK(r.fallback);
  CHECK(r.fallback_reason == "refinement-degenerate");
  REQUIRE(r.fallback_hypothesis);
  CHECK(r.transcript()["fallback"] == true);
  for (Residue x = 0; x < 8; ++x) CHECK(r.eval(Point{x}) == c.eval(Point{x}));
}
