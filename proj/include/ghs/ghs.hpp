#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ghs/concepts.hpp"
#include "ghs/fourier.hpp"
#include "ghs/rng.hpp"
#include "ghs/sft.hpp"

namespace ghs {

/// x -> cos(theta + 2 pi (<beta, x> mod b) / b), the real part of
/// conj(e^{i theta} chi_beta).
struct WeakHypothesis {
  Frequency beta;
  double theta = 0.0;
};

double weak_hyp_eval(const WeakHypothesis& w, const Domain& domain, PointView x);

/// sign(sum_j w_j(x)) with sign(0) := +1. Terms sharing a frequency are
/// folded into one complex weight, so evaluation costs one character per
/// distinct frequency.
class SignSumHypothesis {
 public:
  SignSumHypothesis() = default;
  explicit SignSumHypothesis(Domain domain) : domain_(domain) {}

  const Domain& domain() const { return domain_; }
  const std::vector<WeakHypothesis>& terms() const { return terms_; }
  void add(WeakHypothesis w);

  double gamma = 0.0;
  std::size_t stages = 0;

  double sum(PointView x) const;
  int eval(PointView x) const { return sum(x) < 0.0 ? -1 : 1; }

  nlohmann::ordered_json to_json() const;
  static SignSumHypothesis from_json(const nlohmann::json& j);

 private:
  Domain domain_;
  std::vector<WeakHypothesis> terms_;
  std::map<Frequency, Complex> folded_;
};

/// Constants of the smooth booster. Stage bound S_max = ceil(C / (eps g^2))
/// where g is the booster's advantage parameter.
inline constexpr double kBoostConstant = 3.0;

/// Smooth boosting state. Margins are N_j(x) = f(x) sum_{i<j} h_i(x) - (j-1) theta_m
/// with theta_m = g/(2+g); the measure is M_j(x) = 1 if N_j(x) < 0 and
/// (1-g)^{N_j(x)/2} otherwise.
class BoostState {
 public:
  BoostState(Domain domain, double advantage, double epsilon);

  const Domain& domain() const { return domain_; }
  std::size_t stage() const { return hypotheses_.size() + 1; }
  double advantage() const { return advantage_; }
  double epsilon() const { return epsilon_; }
  double margin_offset() const { return margin_offset_; }
  std::size_t max_stages() const;

  double margin(int label, PointView x) const;
  double measure_from_margin(double margin) const;
  double measure(int label, PointView x) const { return measure_from_margin(margin(label, x)); }

  double mu_hat() const { return mu_hat_; }
  void set_mu_hat(double mu_hat);

  /// b^n * D~_j(x) = M_j(x) / mu_hat.
  double relative_density(int label, PointView x) const;
  /// D~_j(x) = M_j(x) / (b^n mu_hat).
  double pseudo_density(int label, PointView x) const;
  /// Upper bound on relative_density.
  double relative_density_bound() const { return 1.0 / mu_hat_; }

  void push(WeakHypothesis h);
  const std::vector<WeakHypothesis>& hypotheses() const { return hypotheses_; }
  void finish() { finished_ = true; }
  bool finished() const { return finished_; }

 private:
  Domain domain_;
  double advantage_;
  double epsilon_;
  double margin_offset_;
  double log_decay_;
  double mu_hat_ = 1.0;
  std::vector<WeakHypothesis> hypotheses_;
  bool finished_ = false;
};

/// Draws uniform points and accepts each with probability M_j(x); accepted
/// examples are distributed as D_j.
std::pair<Point, int> simulate_ex(const BoostState& state, MembershipOracle& oracle, Rng& rng, double delta);

/// Pointwise access to a pseudo-distribution as a density relative to uniform:
/// relative(x, f(x)) = b^n D~(x).
struct PseudoDensity {
  std::function<double(PointView, int)> relative;
  double sup = 1.0;
};

enum class HeavyStrategy { automatic, brute, sft };

struct WeakLearnOptions {
  HeavyStrategy strategy = HeavyStrategy::automatic;
  std::uint64_t exhaustive_budget = 1u << 20;
  SftParams sft;
  unsigned threads = 1;
  /// Materialized labels in Domain index order; brute mode queries the
  /// oracle for a table when absent.
  const std::vector<int>* truth = nullptr;
  /// Brute mode only: precomputed relative densities in index order.
  const std::vector<double>* density = nullptr;
};

/// Finds beta with |E_D[f conj chi_beta]| large and returns the phase
/// corrected cosine. Throws no_correlated_character when the heavy list is
/// empty.
WeakHypothesis weak_learn(MembershipOracle& oracle, const PseudoDensity& pd, double gamma, double delta, Rng& rng,
                          const WeakLearnOptions& options = {});

struct StageTrace {
  std::size_t stage = 0;
  double mu = -1.0;  // exact mean measure, when the domain is materialized
  double mu_hat = 0.0;
  double max_density_times_size = -1.0;  // b^n max_x D_j(x), exhaustive only
  double pseudo_ratio = -1.0;            // D~_j / D_j, exhaustive only
  double advantage = -1.0;               // exact E_{D_j}[f h_j], exhaustive only
};

struct GhsParams {
  double epsilon = 0.1;
  double delta = 0.1;
  double boost_constant = kBoostConstant;
  WeakLearnOptions weak;
  /// Retries per stage before the stage is declared failed.
  std::size_t stage_retries = 3;
  /// Use the exact mean measure when the domain is materialized; otherwise
  /// mu is estimated by uniform sampling.
  bool exact_measure = true;
  /// Called after every completed stage.
  std::function<void(const StageTrace&)> on_stage;
};

struct BoostResult {
  SignSumHypothesis hypothesis;
  std::size_t stages = 0;
  std::size_t max_stages = 0;
};

/// Smooth boosting with the Fourier weak learner at correlation level gamma.
/// The booster's advantage parameter is gamma/4.
BoostResult boost(MembershipOracle& oracle, double gamma, const GhsParams& params, Rng& rng);

struct GammaSchedule {
  double start = 0.25;
  double factor = 0.5;
  double min = 1.0 / 4096.0;

  std::vector<double> values() const;
  void validate() const;
};

struct GhsAttempt {
  double gamma = 0.0;
  std::string outcome;  // "ok" or an error name
  std::size_t stages = 0;
};

struct GhsResult {
  SignSumHypothesis hypothesis;
  double gamma = 0.0;
  std::size_t stages = 0;
  std::uint64_t queries = 0;
  std::vector<GhsAttempt> attempts;
};

/// Anneals gamma along the schedule until a boosting run completes.
GhsResult ghs_learn(MembershipOracle& oracle, const GammaSchedule& schedule, const GhsParams& params, Rng& rng);

}  // namespace ghs
