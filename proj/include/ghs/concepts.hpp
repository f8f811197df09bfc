#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ghs/common.hpp"
#include "ghs/rng.hpp"
#include "json.hpp"

namespace ghs {

// Truth encoding throughout: -1 is True, +1 is False.

/// sigma on [lo, hi] of coordinate var, -sigma elsewhere.
struct BasicLiteral {
  std::size_t var = 0;
  int sign = -1;
  Residue lo = 0;
  Residue hi = 0;

  friend bool operator==(const BasicLiteral&, const BasicLiteral&) = default;
};

/// A basic literal read through the twist x -> x*z mod b.
struct Literal {
  BasicLiteral base;
  Residue twist = 1;

  bool is_basic() const { return twist == 1; }
  friend bool operator==(const Literal&, const Literal&) = default;
};

int eval_literal(const Literal& lit, Residue x, Residue b);

enum class GateType { rectangle, parity };

struct Gate {
  GateType type = GateType::rectangle;
  std::vector<Literal> literals;

  int eval(PointView x, Residue b) const;
  friend bool operator==(const Gate&, const Gate&) = default;
};

enum class ConceptKind { union_rect, maj_parity, maj_or_rect };

const char* kind_name(ConceptKind kind);
ConceptKind parse_kind(const std::string& name);

/// Immutable target concept over [b]^n. Construction validates every
/// structural invariant; evaluation never fails on a constructed concept.
class Concept {
 public:
  Concept(Domain domain, ConceptKind kind, std::vector<Gate> gates, bool disjoint = false);

  const Domain& domain() const { return domain_; }
  ConceptKind kind() const { return kind_; }
  const std::vector<Gate>& gates() const { return gates_; }
  bool disjoint_claimed() const { return disjoint_; }
  bool is_majority() const { return kind_ != ConceptKind::union_rect; }

  int eval(PointView x) const;
  /// Sum of child outputs; for majority kinds this is odd and nonzero.
  int child_sum(PointView x) const;

  nlohmann::ordered_json to_json() const;
  static Concept from_json(const nlohmann::json& j);

  friend bool operator==(const Concept&, const Concept&) = default;

 private:
  Domain domain_;
  ConceptKind kind_;
  std::vector<Gate> gates_;
  bool disjoint_;
};

/// Full +-1 table in Domain index order.
std::vector<int> truth_table(const Concept& c, std::uint64_t budget = 1u << 20);

/// Exhaustive overlap scan: true iff no point satisfies two rectangles.
bool is_disjoint(const Concept& c, std::uint64_t budget = 1u << 20);

class MembershipOracle {
 public:
  virtual ~MembershipOracle() = default;
  virtual const Domain& domain() const = 0;
  virtual int query(PointView x) = 0;
  virtual std::uint64_t query_count() const = 0;
};

/// Counts every query; safe under concurrent callers.
class ConceptOracle final : public MembershipOracle {
 public:
  explicit ConceptOracle(Concept target) : target_(std::move(target)) {}

  const Domain& domain() const override { return target_.domain(); }
  int query(PointView x) override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return target_.eval(x);
  }
  std::uint64_t query_count() const override { return count_.load(std::memory_order_relaxed); }
  const Concept& target() const { return target_; }

 private:
  Concept target_;
  std::atomic<std::uint64_t> count_{0};
};

/// Oracle over an arbitrary +-1 function; used by tests and restricted views.
class FunctionOracle final : public MembershipOracle {
 public:
  FunctionOracle(Domain domain, std::function<int(PointView)> fn)
      : domain_(domain), fn_(std::move(fn)) {}

  const Domain& domain() const override { return domain_; }
  int query(PointView x) override {
    count_.fetch_add(1, std::memory_order_relaxed);
    return fn_(x);
  }
  std::uint64_t query_count() const override { return count_.load(std::memory_order_relaxed); }

 private:
  Domain domain_;
  std::function<int(PointView)> fn_;
  std::atomic<std::uint64_t> count_{0};
};

/// Per-coordinate superset of the i-sensitive values: {lo, (hi+1) mod b} for
/// every literal. Requires basic literals.
std::vector<std::vector<Residue>> candidate_sensitive_values(const Concept& c);

/// f(w with x_i = sigma-1 mod b) != f(w with x_i = sigma). Two queries.
bool is_sensitive(MembershipOracle& oracle, std::size_t coord, Residue sigma, PointView witness);

struct Discriminator {
  std::size_t index = 0;
  double correlation = 0.0;
};

/// Child maximizing |E_D[f h_i]| for an explicit distribution D given in
/// Domain index order.
Discriminator best_discriminator(const Concept& c, std::span<const double> distribution,
                                 std::uint64_t budget = 1u << 20);

struct GenParams {
  ConceptKind kind = ConceptKind::union_rect;
  std::size_t n = 2;
  Residue b = 16;
  std::size_t s = 2;
  std::size_t r = 2;
  bool disjoint = false;
  /// Literal widths are drawn uniformly from [1, max(1, width_fraction * b)].
  double width_fraction = 0.5;
  /// maj_parity only: draw random invertible twists.
  bool twisted = false;
};

Concept gen_target(const GenParams& params, std::uint64_t seed);

}  // namespace ghs
