#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ghs/concepts.hpp"
#include "ghs/ghs.hpp"
#include "ghs/grid.hpp"

namespace ghs {

/// A learned hypothesis of either kind, as stored in model files.
class Model {
 public:
  explicit Model(SignSumHypothesis h) : h_(std::move(h)) {}
  explicit Model(GridHypothesis h) : h_(std::move(h)) {}

  const Domain& domain() const;
  int eval(PointView x) const;
  nlohmann::ordered_json to_json() const;
  static Model from_json(const nlohmann::json& j);

 private:
  std::variant<SignSumHypothesis, GridHypothesis> h_;
};

enum class ErrorMode { exhaustive, sample };

ErrorMode parse_error_mode(const std::string& name);

struct ErrorEstimate {
  double value = 0.0;
  /// 95% half-width from Hoeffding's bound; 0 in exhaustive mode.
  double half_width = 0.0;
  ErrorMode mode = ErrorMode::exhaustive;
  std::uint64_t samples = 0;

  nlohmann::ordered_json to_json() const;
};

/// Exhaustive mode scans [b]^n (budget permitting); sample mode draws m
/// uniform points from `rng`.
ErrorEstimate estimate_error(const std::function<int(PointView)>& h, const Concept& target, ErrorMode mode,
                             std::uint64_t m, Rng& rng, std::uint64_t budget = 1u << 20, unsigned threads = 1);

enum class Algorithm { ghs, grid };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct ExperimentConfig {
  std::optional<Concept> target;
  std::string target_path;  // used when target is empty
  Algorithm algorithm = Algorithm::ghs;
  double epsilon = 0.1;
  double delta = 0.1;
  GammaSchedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t exhaustive_budget = 1u << 20;
  std::uint64_t query_cap = 0;   // 0: unlimited
  double wall_clock_cap = 0.0;   // seconds, 0: unlimited
  unsigned threads = 1;
  /// Error measurement: automatic picks exhaustive when the domain fits.
  std::optional<ErrorMode> error_mode;
  std::uint64_t error_samples = 200000;
  std::size_t grid_max_iterations = 64;
  std::string model_path;
  std::string report_path;

  void validate() const;
};

struct RunReport {
  bool ok = false;
  nlohmann::ordered_json json;
  std::optional<Model> model;

  /// The report with wall_time removed, for reproducibility comparisons.
  std::string deterministic_dump() const;
};

/// Learns the configured target, measures the error, and writes the model and
/// report files when paths are set. Learner failures are reported, not thrown.
RunReport run_experiment(const ExperimentConfig& config);

struct SweepRow {
  Residue b = 0;
  std::size_t n = 0;
  std::size_t s = 0;
  std::size_t r = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t queries = 0;
  std::size_t stages = 0;
  double error = 0.0;
  double wall_time = 0.0;
  std::string status;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool all_ok = true;

  void write_csv(std::ostream& out) const;
};

/// Cartesian product over the list-valued fields b, n, s, r, epsilon and
/// seeds of a sweep description; scalar fields apply to every run.
SweepResult sweep(const nlohmann::json& spec);

}  // namespace ghs
