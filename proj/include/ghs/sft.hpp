#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "ghs/fourier.hpp"
#include "ghs/rng.hpp"

namespace ghs {

/// Query access to a bounded f: [b]^n -> C.
struct QueryFunction {
  Domain domain;
  std::function<Complex(PointView)> eval;
  /// Caller-supplied bound on max |f(x)|.
  double sup_bound = 1.0;
};

struct HeavyEntry {
  Frequency frequency;
  Complex amplitude;
};

using HeavyList = std::vector<HeavyEntry>;

/// A set of frequencies: components before `prefix.size()` are fixed to
/// `prefix`, the component at coordinate prefix.size() is congruent to
/// `residue` modulo `modulus` (modulus divides b), later components are free.
/// Bisection refines the modulus one prime factor of b at a time.
struct SearchNode {
  Frequency prefix;
  Residue modulus = 1;
  Residue residue = 0;

  std::size_t coordinate() const { return prefix.size(); }
  bool contains(PointView alpha) const;
};

struct SftParams {
  /// Shifted queries drawn per random base point; pairs within a batch form
  /// an unbiased U-statistic for the projected energy.
  std::size_t shifts_per_point = 32;
  /// Median-of-means arms.
  std::size_t arms = 5;
  /// Base points per arm; 0 derives it from the variance bound at error
  /// gamma^2/8.
  std::size_t points_per_arm = 0;
  /// Pilot sample used to bound E|f|^2.
  std::size_t pilot_points = 512;
  /// Hard ceiling on total evaluations of f; 0 means none.
  std::uint64_t max_queries = 0;
  unsigned threads = 1;
  /// When set, the survived-node tree is written here as indented text.
  std::ostream* debug_tree = nullptr;
};

struct SftStats {
  std::uint64_t queries = 0;
  std::size_t levels = 0;
  std::size_t nodes_estimated = 0;
  std::size_t candidates = 0;
};

/// Hoeffding sample mean of f conj(chi_beta); |error| <= eta w.p. >= 1-delta.
Complex estimate_coefficient(const QueryFunction& f, PointView beta, double eta, double delta, Rng& rng,
                             std::uint64_t* queries = nullptr);

/// Sample size used by estimate_coefficient.
std::uint64_t coefficient_sample_size(double sup_bound, double eta, double delta);

/// Exactly {alpha : |hat f(alpha)| >= gamma/2} from a full table.
HeavyList find_heavy_brute(const Domain& domain, std::span<const Complex> table, double gamma,
                           const DftOptions& options = {});

/// Significant-coefficient search from queries. With probability >= 1-delta
/// every |hat f(alpha)| > gamma is listed and every listed beta has
/// |hat f(beta)| >= gamma/2. Entries are sorted by frequency.
HeavyList find_heavy_sft(const QueryFunction& f, double gamma, double delta, Rng& rng,
                         const SftParams& params = {}, SftStats* stats = nullptr);

/// Median-of-means estimate of sum_{alpha in node} |hat f(alpha)|^2.
double interval_weight_estimate(const QueryFunction& f, const SearchNode& node, double gamma, double delta,
                                Rng& rng, const SftParams& params = {}, SftStats* stats = nullptr);

/// ceil(16 sup^2 / gamma^2), the cap on the output list length.
std::size_t heavy_list_cap(double sup_bound, double gamma);

}  // namespace ghs
