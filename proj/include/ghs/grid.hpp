#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ghs/concepts.hpp"
#include "ghs/ghs.hpp"

namespace ghs {

/// L_1 x ... x L_n with 0 in every L_i; each L_i sorted and strictly increasing.
class Grid {
 public:
  Grid(Domain domain, std::vector<std::vector<Residue>> sets);
  /// {0}^n.
  static Grid trivial(Domain domain);

  const Domain& domain() const { return domain_; }
  const std::vector<std::vector<Residue>>& sets() const { return sets_; }
  const std::vector<Residue>& set(std::size_t i) const { return sets_.at(i); }
  bool is_trivial(std::size_t i) const { return sets_.at(i).size() == 1; }
  std::size_t nontrivial_count() const;
  std::size_t max_set_size() const;

  /// Inserts sigma into L_i; returns false when already present.
  bool insert(std::size_t i, Residue sigma);

  /// Largest element of L_i that is <= v.
  Residue floor(std::size_t i, Residue v) const;
  /// Position of floor(i, v) within L_i.
  std::size_t floor_index(std::size_t i, Residue v) const;
  /// Smallest element of L_i above v, or b.
  Residue ceil_above(std::size_t i, Residue v) const;

  /// Number of corners, saturating at UINT64_MAX.
  std::uint64_t corner_count() const;
  /// Width of the region covered along coordinate i by the corner value L_i[j].
  Residue width(std::size_t i, std::size_t j) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Domain domain_;
  std::vector<std::vector<Residue>> sets_;
};

struct Refinement {
  Grid grid;
  std::size_t kappa = 1;
  std::size_t ell = 1;
  Residue gap = 1;          // floor(b / (4 kappa ell))
  double c = 4.0;           // (b / (kappa ell)) / gap
  std::size_t l_max = 1;    // common size of the non-trivial sets (1 when none)
  std::uint64_t steps = 0;  // elementary operations performed

  /// Coordinates with more than one value, ascending.
  std::vector<std::size_t> active() const;
  double size_bound() const { return static_cast<double>(ell) + c * static_cast<double>(kappa * ell); }
};

/// Gap filling with stride floor(b/(4 kappa ell)) followed by padding every
/// non-trivial set to a common size with the smallest missing residues.
/// Throws refinement_degenerate when b <= 4 kappa ell.
Refinement refine(const Grid& grid, std::size_t kappa, std::size_t ell);

/// Sum of the `count` largest corner areas as a fraction of b^n. Areas are
/// grouped by value, so the cost depends on the number of distinct areas;
/// throws budget_exceeded past `max_classes` of them.
double top_corner_area(const Grid& grid, std::uint64_t count, std::size_t max_classes = 1u << 22);

/// MEM(f restricted to the refined grid) over the compact domain
/// [L_max]^{#active}; trivial coordinates are pinned to 0. With no active
/// coordinate the compact domain is [2]^1 and only index 0 is valid.
class GridRestriction final : public MembershipOracle {
 public:
  GridRestriction(MembershipOracle& base, const Refinement& refinement);

  const Domain& domain() const override { return compact_; }
  int query(PointView j) override;
  std::uint64_t query_count() const override { return base_.query_count(); }

  /// Per-coordinate index ranges over the full n coordinates: 1 for trivial
  /// coordinates and L_max otherwise.
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  /// tau_i(j).
  Residue translate(std::size_t coord, std::size_t j) const;
  /// Base point for an index vector over all n coordinates.
  Point lift(PointView full_index) const;
  /// Restricted query addressed by an index vector over all n coordinates.
  int query_full(PointView full_index);
  const std::vector<std::size_t>& active() const { return active_; }
  bool has_active() const { return !active_.empty(); }

 private:
  MembershipOracle& base_;
  Grid grid_;
  std::vector<std::size_t> active_;
  std::vector<std::size_t> sizes_;
  Domain compact_;
};

/// g(tau^{-1}(floor x)) on [b]^n.
class GridHypothesis {
 public:
  GridHypothesis(Grid grid, std::vector<std::size_t> active, SignSumHypothesis inner);

  const Grid& grid() const { return grid_; }
  const std::vector<std::size_t>& active() const { return active_; }
  const SignSumHypothesis& inner() const { return inner_; }

  int eval(PointView x) const;

  nlohmann::ordered_json to_json() const;
  static GridHypothesis from_json(const nlohmann::json& j);

 private:
  Grid grid_;
  std::vector<std::size_t> active_;
  SignSumHypothesis inner_;
};

GridHypothesis extend_hypothesis(const SignSumHypothesis& g, const Refinement& refinement);

struct SensitiveValue {
  std::size_t coord = 0;
  Residue sigma = 0;
  Point witness;
};

/// Samples x until f(floor x) != f(x), locates the first coordinate whose
/// floor flips f along the hybrid chain, then bisects that coordinate's value.
/// Throws no_disagreement_found when the draw cap is reached.
SensitiveValue find_sensitive(MembershipOracle& oracle, const Grid& refined, double epsilon, double delta, Rng& rng);

std::uint64_t find_sensitive_draw_cap(double epsilon, double delta);

struct AccuracyResult {
  bool pass = false;
  double empirical_error = 0.0;
  std::uint64_t samples = 0;
};

std::uint64_t accuracy_test_samples(double epsilon, double delta);

/// Empirical error on ceil(128/eps^2 ln(2/delta)) uniform samples; passes iff
/// it is at most 3 eps / 8.
AccuracyResult accuracy_test(MembershipOracle& oracle, const std::function<int(PointView)>& h, double epsilon,
                             double delta, Rng& rng);

struct Algorithm2Params {
  double epsilon = 0.1;
  double delta = 0.1;
  GammaSchedule schedule;
  GhsParams ghs;  // epsilon and delta are overwritten per iteration
  std::size_t max_iterations = 64;
  std::size_t test_retries = 3;
};

struct IterationRecord {
  std::size_t kappa = 0;
  std::size_t ell = 0;
  std::size_t l_max = 0;
  std::uint64_t queries = 0;  // cumulative base-oracle queries at the end of the iteration
  bool pass = false;
  std::optional<SensitiveValue> added;
};

struct Algorithm2Result {
  std::optional<GridHypothesis> grid_hypothesis;
  std::optional<SignSumHypothesis> fallback_hypothesis;
  std::vector<IterationRecord> iterations;
  bool fallback = false;
  std::string fallback_reason;
  std::size_t stages = 0;  // boosting stages of the final inner run
  double gamma = 0.0;
  std::uint64_t queries = 0;

  int eval(PointView x) const;
  nlohmann::ordered_json transcript() const;
};

Algorithm2Result algorithm2_learn(MembershipOracle& oracle, const Algorithm2Params& params, Rng& rng);

}  // namespace ghs
