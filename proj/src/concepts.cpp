#include "ghs/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ghs {

int eval_literal(const Literal& lit, Residue x, Residue b) {
  const Residue y = lit.twist == 1 ? x : mulmod(x, lit.twist, b);
  const bool inside = lit.base.lo <= y && y <= lit.base.hi;
  return inside ? lit.base.sign : -lit.base.sign;
}

int Gate::eval(PointView x, Residue b) const {
  if (type == GateType::rectangle) {
    for (const auto& lit : literals)
      if (eval_literal(lit, x[lit.base.var], b) != -1) return 1;
    return -1;
  }
  int prod = 1;
  for (const auto& lit : literals) prod *= eval_literal(lit, x[lit.base.var], b);
  return prod;
}

const char* kind_name(ConceptKind kind) {
  switch (kind) {
    case ConceptKind::union_rect: return "union_rect";
    case ConceptKind::maj_parity: return "maj_parity";
    case ConceptKind::maj_or_rect: return "maj_or_rect";
  }
  return "?";
}

ConceptKind parse_kind(const std::string& name) {
  if (name == "union_rect") return ConceptKind::union_rect;
  if (name == "maj_parity") return ConceptKind::maj_parity;
  if (name == "maj_or_rect") return ConceptKind::maj_or_rect;
  fail(Errc::invalid_argument, "unknown concept kind '" + name + "'");
}

Concept::Concept(Domain domain, ConceptKind kind, std::vector<Gate> gates, bool disjoint)
    : domain_(Domain::make(domain.n, domain.b)),
      kind_(kind),
      gates_(std::move(gates)),
      disjoint_(disjoint) {
  if (gates_.empty()) fail(Errc::malformed_concept, "concept needs at least one gate");
  if (is_majority() && gates_.size() % 2 == 0)
    fail(Errc::malformed_concept, "majority fan-in must be odd, got " + std::to_string(gates_.size()));
  const GateType want = kind_ == ConceptKind::maj_parity ? GateType::parity : GateType::rectangle;
  for (const auto& g : gates_) {
    if (g.type != want)
      fail(Errc::malformed_concept, std::string("gate type does not match kind ") + kind_name(kind_));
    if (g.literals.empty()) fail(Errc::malformed_concept, "gate without literals");
    std::set<std::size_t> vars;
    for (const auto& lit : g.literals) {
      const auto& base = lit.base;
      if (base.var >= domain_.n) fail(Errc::malformed_concept, "literal variable out of range");
      if (base.sign != 1 && base.sign != -1) fail(Errc::malformed_concept, "literal sign must be +-1");
      if (base.lo > base.hi || base.hi >= domain_.b)
        fail(Errc::malformed_concept, "literal range must satisfy lo <= hi < b");
      if (lit.twist == 0 || lit.twist >= domain_.b || gcd(lit.twist, domain_.b) != 1)
        fail(Errc::not_invertible, "literal twist must be a unit modulo b");
      if (g.type == GateType::rectangle && !lit.is_basic())
        fail(Errc::malformed_concept, "rectangle literals must be basic");
      if (!vars.insert(base.var).second)
        fail(Errc::malformed_concept, "gate has two literals on one variable");
    }
  }
}

int Concept::child_sum(PointView x) const {
  int sum = 0;
  for (const auto& g : gates_) sum += g.eval(x, domain_.b);
  return sum;
}

int Concept::eval(PointView x) const {
  if (kind_ == ConceptKind::union_rect) {
    for (const auto& g : gates_)
      if (g.eval(x, domain_.b) == -1) return -1;
    return 1;
  }
  return child_sum(x) > 0 ? 1 : -1;
}

nlohmann::ordered_json Concept::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = domain_.n;
  j["b"] = domain_.b;
  j["kind"] = kind_name(kind_);
  auto gates = nlohmann::ordered_json::array();
  for (const auto& g : gates_) {
    nlohmann::ordered_json gj;
    gj["type"] = g.type == GateType::rectangle ? "rectangle" : "parity";
    auto lits = nlohmann::ordered_json::array();
    for (const auto& lit : g.literals) {
      nlohmann::ordered_json lj;
      lj["var"] = lit.base.var;
      lj["sign"] = lit.base.sign;
      lj["lo"] = lit.base.lo;
      lj["hi"] = lit.base.hi;
      lj["z"] = lit.twist;
      lits.push_back(std::move(lj));
    }
    gj["literals"] = std::move(lits);
    gates.push_back(std::move(gj));
  }
  j["gates"] = std::move(gates);
  j["disjoint"] = disjoint_;
  return j;
}

Concept Concept::from_json(const nlohmann::json& j) {
  try {
    const auto domain = Domain::make(j.at("n").get<std::size_t>(), j.at("b").get<Residue>());
    const auto kind_text = j.at("kind").get<std::string>();
    if (kind_text != "union_rect" && kind_text != "maj_parity" && kind_text != "maj_or_rect")
      fail(Errc::malformed_concept, "unknown concept kind '" + kind_text + "'");
    const auto kind = parse_kind(kind_text);
    std::vector<Gate> gates;
    for (const auto& gj : j.at("gates")) {
      Gate g;
      const auto type = gj.at("type").get<std::string>();
      if (type == "rectangle") {
        g.type = GateType::rectangle;
      } else if (type == "parity") {
        g.type = GateType::parity;
      } else {
        fail(Errc::malformed_concept, "unknown gate type '" + type + "'");
      }
      for (const auto& lj : gj.at("literals")) {
        Literal lit;
        lit.base.var = lj.at("var").get<std::size_t>();
        lit.base.sign = lj.at("sign").get<int>();
        lit.base.lo = lj.at("lo").get<Residue>();
        lit.base.hi = lj.at("hi").get<Residue>();
        lit.twist = lj.value("z", Residue{1});
        g.literals.push_back(lit);
      }
      gates.push_back(std::move(g));
    }
    return Concept(domain, kind, std::move(gates), j.value("disjoint", false));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_concept, std::string("target json: ") + e.what());
  }
}

std::vector<int> truth_table(const Concept& c, std::uint64_t budget) {
  const auto& dom = c.domain();
  if (!dom.fits(budget)) fail(Errc::budget_exceeded, "domain too large for an exhaustive truth table");
  const std::uint64_t size = *dom.size();
  std::vector<int> table(size);
  Point x(dom.n, 0);
  for (std::uint64_t idx = 0; idx < size; ++idx) {
    dom.point_at(idx, x);
    table[idx] = c.eval(x);
  }
  return table;
}

bool is_disjoint(const Concept& c, std::uint64_t budget) {
  const auto& dom = c.domain();
  if (!dom.fits(budget)) fail(Errc::budget_exceeded, "domain too large for an exhaustive overlap scan");
  Point x(dom.n, 0);
  for (std::uint64_t idx = 0; idx < *dom.size(); ++idx) {
    dom.point_at(idx, x);
    int hits = 0;
    for (const auto& g : c.gates())
      if (g.eval(x, dom.b) == -1) ++hits;
    if (hits > 1) return false;
  }
  return true;
}

std::vector<std::vector<Residue>> candidate_sensitive_values(const Concept& c) {
  const auto& dom = c.domain();
  std::vector<std::set<Residue>> sets(dom.n);
  for (const auto& g : c.gates()) {
    for (const auto& lit : g.literals) {
      if (!lit.is_basic()) fail(Errc::non_basic_literal, "sensitivity analysis needs basic literals");
      sets[lit.base.var].insert(lit.base.lo);
      sets[lit.base.var].insert((lit.base.hi + 1) % dom.b);
    }
  }
  std::vector<std::vector<Residue>> out(dom.n);
  for (std::size_t i = 0; i < dom.n; ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

bool is_sensitive(MembershipOracle& oracle, std::size_t coord, Residue sigma, PointView witness) {
  const auto& dom = oracle.domain();
  if (coord >= dom.n || sigma >= dom.b || !dom.contains(witness))
    fail(Errc::invalid_argument, "is_sensitive arguments outside the domain");
  Point x(witness.begin(), witness.end());
  x[coord] = (sigma + dom.b - 1) % dom.b;
  const int before = oracle.query(x);
  x[coord] = sigma;
  return before != oracle.query(x);
}

Discriminator best_discriminator(const Concept& c, std::span<const double> distribution,
                                 std::uint64_t budget) {
  if (!c.is_majority()) fail(Errc::invalid_argument, "discriminator needs a majority concept");
  const auto& dom = c.domain();
  if (!dom.fits(budget)) fail(Errc::budget_exceeded, "domain too large for exhaustive correlation");
  if (distribution.size() != *dom.size()) fail(Errc::invalid_argument, "distribution size mismatch");
  std::vector<double> corr(c.gates().size(), 0.0);
  Point x(dom.n, 0);
  for (std::uint64_t idx = 0; idx < *dom.size(); ++idx) {
    if (distribution[idx] == 0.0) continue;
    dom.point_at(idx, x);
    const int f = c.eval(x);
    for (std::size_t g = 0; g < corr.size(); ++g)
      corr[g] += distribution[idx] * f * c.gates()[g].eval(x, dom.b);
  }
  Discriminator best;
  best.correlation = -1.0;
  for (std::size_t g = 0; g < corr.size(); ++g) {
    if (std::abs(corr[g]) > best.correlation) best = {g, std::abs(corr[g])};
  }
  return best;
}

namespace {

std::vector<std::size_t> pick_vars(std::size_t n, std::size_t r, Rng& rng) {
  std::vector<std::size_t> vars(n);
  std::iota(vars.begin(), vars.end(), std::size_t{0});
  for (std::size_t i = 0; i < r; ++i) std::swap(vars[i], vars[i + rng.below(n - i)]);
  vars.resize(r);
  std::sort(vars.begin(), vars.end());
  return vars;
}

BasicLiteral random_interval(std::size_t var, int sign, Residue lo_min, Residue span, double width_fraction,
                             Rng& rng) {
  const auto max_w = std::max<Residue>(
      1, std::min<Residue>(span, static_cast<Residue>(width_fraction * static_cast<double>(span))));
  const Residue w = 1 + rng.below(max_w);
  const Residue lo = lo_min + rng.below(span - w + 1);
  return BasicLiteral{var, sign, lo, lo + w - 1};
}

Residue random_unit(Residue b, Rng& rng) {
  for (;;) {
    const Residue z = 1 + rng.below(b - 1);
    if (gcd(z, b) == 1) return z;
  }
}

}  // namespace

Concept gen_target(const GenParams& p, std::uint64_t seed) {
  const auto dom = Domain::make(p.n, p.b);
  if (p.r < 1 || p.r > p.n) fail(Errc::invalid_argument, "need 1 <= r <= n");
  if (p.s < 1) fail(Errc::invalid_argument, "need s >= 1");
  if (p.kind != ConceptKind::union_rect && p.s % 2 == 0)
    fail(Errc::invalid_argument, "majority fan-in must be odd");
  if (p.disjoint && p.b < p.s) fail(Errc::invalid_argument, "disjoint union needs b >= s");
  if (!(p.width_fraction > 0.0 && p.width_fraction <= 1.0))
    fail(Errc::invalid_argument, "width fraction must lie in (0, 1]");

  Rng rng = Rng(seed).substream("gen-target");
  std::vector<Gate> gates;
  const std::size_t shared = p.disjoint ? rng.below(p.n) : 0;
  for (std::size_t g = 0; g < p.s; ++g) {
    Gate gate;
    gate.type = p.kind == ConceptKind::maj_parity ? GateType::parity : GateType::rectangle;
    auto vars = pick_vars(p.n, p.r, rng);
    if (p.disjoint && std::find(vars.begin(), vars.end(), shared) == vars.end()) {
      vars.back() = shared;
      std::sort(vars.begin(), vars.end());
    }
    for (auto v : vars) {
      Literal lit;
      if (p.disjoint && v == shared) {
        // Rectangle g owns block g of the shared coordinate.
        const Residue block_lo = p.b * g / p.s;
        const Residue block_hi = p.b * (g + 1) / p.s;
        lit.base = random_interval(v, -1, block_lo, block_hi - block_lo, p.width_fraction, rng);
      } else if (gate.type == GateType::rectangle) {
        lit.base = random_interval(v, -1, 0, p.b, p.width_fraction, rng);
      } else {
        lit.base = random_interval(v, rng.sign(), 0, p.b, p.width_fraction, rng);
        if (p.twisted) lit.twist = random_unit(p.b, rng);
      }
      gate.literals.push_back(lit);
    }
    gates.push_back(std::move(gate));
  }
  return Concept(dom, p.kind, std::move(gates), p.disjoint);
}

}  // namespace ghs
