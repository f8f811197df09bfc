#include "ghs/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace ghs {

const Domain& Model::domain() const {
  return std::visit(
      [](const auto& h) -> const Domain& {
        if constexpr (std::is_same_v<std::decay_t<decltype(h)>, SignSumHypothesis>) {
          return h.domain();
        } else {
          return h.grid().domain();
        }
      },
      h_);
}

int Model::eval(PointView x) const {
  return std::visit([&](const auto& h) { return h.eval(x); }, h_);
}

nlohmann::ordered_json Model::to_json() const {
  return std::visit([](const auto& h) { return h.to_json(); }, h_);
}

Model Model::from_json(const nlohmann::json& j) {
  const auto kind = j.value("kind", std::string());
  if (kind == "sign_sum") return Model(SignSumHypothesis::from_json(j));
  if (kind == "grid_sign_sum") return Model(GridHypothesis::from_json(j));
  fail(Errc::invalid_argument, "unknown model kind '" + kind + "'");
}

ErrorMode parse_error_mode(const std::string& name) {
  if (name == "exhaustive") return ErrorMode::exhaustive;
  if (name == "sample") return ErrorMode::sample;
  fail(Errc::invalid_argument, "error mode must be exhaustive or sample");
}

nlohmann::ordered_json ErrorEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode == ErrorMode::exhaustive ? "exhaustive" : "sample";
  j["value"] = value;
  j["half_width"] = half_width;
  j["samples"] = samples;
  return j;
}

ErrorEstimate estimate_error(const std::function<int(PointView)>& h, const Concept& target, ErrorMode mode,
                             std::uint64_t m, Rng& rng, std::uint64_t budget, unsigned threads) {
  const auto& dom = target.domain();
  ErrorEstimate e;
  e.mode = mode;
  if (mode == ErrorMode::exhaustive) {
    if (!dom.fits(budget)) fail(Errc::budget_exceeded, "domain too large for exhaustive error");
    const std::uint64_t size = *dom.size();
    const std::size_t chunks = std::max<unsigned>(1, threads);
    std::vector<std::uint64_t> wrong(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        Point x(dom.n);
        const std::uint64_t lo = size * c / chunks, hi = size * (c + 1) / chunks;
        for (std::uint64_t idx = lo; idx < hi; ++idx) {
          dom.point_at(idx, x);
          if (h(x) != target.eval(x)) ++wrong[c];
        }
      }
    });
    std::uint64_t total = 0;
    for (auto w : wrong) total += w;
    e.samples = size;
    e.value = static_cast<double>(total) / static_cast<double>(size);
    return e;
  }
  if (m == 0) fail(Errc::invalid_argument, "sampled error needs m >= 1");
  Point x(dom.n);
  std::uint64_t wrong = 0;
  for (std::uint64_t k = 0; k < m; ++k) {
    for (auto& v : x) v = rng.below(dom.b);
    if (h(x) != target.eval(x)) ++wrong;
  }
  e.samples = m;
  e.value = static_cast<double>(wrong) / static_cast<double>(m);
  e.half_width = std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(m)));
  return e;
}

const char* algorithm_name(Algorithm a) { return a == Algorithm::ghs ? "ghs" : "grid"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "ghs") return Algorithm::ghs;
  if (name == "grid") return Algorithm::grid;
  fail(Errc::invalid_argument, "algorithm must be ghs or grid");
}

void ExperimentConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  schedule.validate();
  if (!target && target_path.empty()) fail(Errc::invalid_argument, "no target given");
  if (wall_clock_cap < 0.0) fail(Errc::invalid_argument, "wall-clock cap must be non-negative");
  if (grid_max_iterations == 0) fail(Errc::invalid_argument, "grid iteration cap must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

/// Enforces the query and wall-clock caps on top of the counting oracle.
class CappedOracle final : public MembershipOracle {
 public:
  CappedOracle(MembershipOracle& base, std::uint64_t query_cap, double wall_cap)
      : base_(base), query_cap_(query_cap), wall_cap_(wall_cap), start_(Clock::now()) {}

  const Domain& domain() const override { return base_.domain(); }
  std::uint64_t query_count() const override { return base_.query_count(); }
  int query(PointView x) override {
    const auto used = base_.query_count();
    if (query_cap_ && used >= query_cap_) fail(Errc::budget_exceeded, "query cap reached");
    if (wall_cap_ > 0.0 && (used & 1023) == 0 &&
        std::chrono::duration<double>(Clock::now() - start_).count() > wall_cap_)
      fail(Errc::budget_exceeded, "wall-clock cap reached");
    return base_.query(x);
  }

 private:
  MembershipOracle& base_;
  std::uint64_t query_cap_;
  double wall_cap_;
  Clock::time_point start_;
};

Concept load_concept(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::invalid_argument, "cannot open target file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_concept, std::string("target json: ") + e.what());
  }
  return Concept::from_json(j);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(Errc::invalid_argument, "cannot write " + path);
  out << text << '\n';
}

}  // namespace

std::string RunReport::deterministic_dump() const {
  auto copy = json;
  copy.erase("wall_time");
  return copy.dump(2);
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Concept target = config.target ? *config.target : load_concept(config.target_path);
  const auto& dom = target.domain();
  ConceptOracle counted(target);
  CappedOracle oracle(counted, config.query_cap, config.wall_clock_cap);
  const Rng root(config.seed);
  const auto started = Clock::now();

  RunReport report;
  auto& j = report.json;
  j["seed"] = config.seed;
  j["algorithm"] = algorithm_name(config.algorithm);
  j["target"] = {{"n", dom.n}, {"b", dom.b}, {"kind", kind_name(target.kind())}, {"gates", target.gates().size()}};
  j["epsilon"] = config.epsilon;
  j["delta"] = config.delta;

  std::size_t stages = 0;
  double gamma = 0.0;
  nlohmann::ordered_json transcript = nullptr;
  nlohmann::ordered_json attempts = nlohmann::ordered_json::array();
  std::string failure;

  GhsParams params;
  params.epsilon = config.epsilon;
  params.delta = config.delta;
  params.weak.exhaustive_budget = config.exhaustive_budget;
  params.weak.threads = config.threads;
  params.weak.sft.threads = config.threads;

  try {
    Rng learn = root.substream("learn");
    if (config.algorithm == Algorithm::ghs) {
      auto res = ghs_learn(oracle, config.schedule, params, learn);
      stages = res.stages;
      gamma = res.gamma;
      for (const auto& a : res.attempts) attempts.push_back({{"gamma", a.gamma}, {"outcome", a.outcome}, {"stages", a.stages}});
      report.model.emplace(std::move(res.hypothesis));
    } else {
      Algorithm2Params ap;
      ap.epsilon = config.epsilon;
      ap.delta = config.delta;
      ap.schedule = config.schedule;
      ap.ghs = params;
      ap.max_iterations = config.grid_max_iterations;
      auto res = algorithm2_learn(oracle, ap, learn);
      stages = res.stages;
      gamma = res.gamma;
      transcript = res.transcript();
      if (res.grid_hypothesis) {
        report.model.emplace(std::move(*res.grid_hypothesis));
      } else {
        report.model.emplace(std::move(*res.fallback_hypothesis));
      }
    }
  } catch (const Error& e) {
    failure = std::string(errc_name(e.code())) + ": " + e.what();
  }
  const double wall = std::chrono::duration<double>(Clock::now() - started).count();

  report.ok = failure.empty();
  j["status"] = report.ok ? "ok" : "failed";
  j["failure"] = report.ok ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(failure);
  j["stages"] = stages;
  j["queries"] = counted.query_count();
  j["wall_time"] = wall;
  j["gamma"] = gamma;
  j["gamma_attempts"] = std::move(attempts);
  j["grid"] = std::move(transcript);

  if (report.model) {
    const ErrorMode mode = config.error_mode.value_or(dom.fits(config.exhaustive_budget) ? ErrorMode::exhaustive
                                                                                          : ErrorMode::sample);
    Rng eval_rng = root.substream("eval");
    const Model& model = *report.model;
    auto err = estimate_error([&model](PointView x) { return model.eval(x); }, target, mode, config.error_samples,
                              eval_rng, config.exhaustive_budget, config.threads);
    j["error"] = err.to_json();
  } else {
    j["error"] = nullptr;
  }
  j["model"] = config.model_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(config.model_path);

  if (report.model && !config.model_path.empty()) write_file(config.model_path, report.model->to_json().dump(2));
  if (!config.report_path.empty()) write_file(config.report_path, j.dump(2));
  return report;
}

void SweepResult::write_csv(std::ostream& out) const {
  out << "b,n,s,r,epsilon,seed,queries,stages,error,wall_time,status\n";
  for (const auto& r : rows) {
    out << r.b << ',' << r.n << ',' << r.s << ',' << r.r << ',' << r.epsilon << ',' << r.seed << ',' << r.queries
        << ',' << r.stages << ',' << std::setprecision(10) << r.error << ',' << std::setprecision(6) << r.wall_time
        << ',' << r.status << '\n';
  }
}

namespace {

template <class T>
std::vector<T> list_field(const nlohmann::json& spec, const char* key, std::vector<T> fallback) {
  if (!spec.contains(key)) return fallback;
  const auto& v = spec.at(key);
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

std::string csv_safe(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n' || c == '"') c = ';';
  return s;
}

}  // namespace

SweepResult sweep(const nlohmann::json& spec) {
  SweepResult out;
  std::vector<Residue> bs;
  std::vector<std::size_t> ns, ss, rs;
  std::vector<double> epss;
  std::vector<std::uint64_t> seeds;
  ExperimentConfig base;
  GenParams gen;
  try {
    bs = list_field<Residue>(spec, "b", {16});
    ns = list_field<std::size_t>(spec, "n", {2});
    ss = list_field<std::size_t>(spec, "s", {2});
    rs = list_field<std::size_t>(spec, "r", {2});
    epss = list_field<double>(spec, "epsilon", {0.1});
    seeds = list_field<std::uint64_t>(spec, "seeds", {0});
    base.algorithm = parse_algorithm(spec.value("algorithm", std::string("ghs")));
    base.delta = spec.value("delta", 0.1);
    base.schedule.start = spec.value("gamma_start", base.schedule.start);
    base.schedule.min = spec.value("gamma_min", base.schedule.min);
    base.schedule.factor = spec.value("gamma_factor", base.schedule.factor);
    base.exhaustive_budget = spec.value("exhaustive_budget", base.exhaustive_budget);
    base.query_cap = spec.value("query_cap", base.query_cap);
    base.wall_clock_cap = spec.value("wall_clock_cap", base.wall_clock_cap);
    base.error_samples = spec.value("error_samples", base.error_samples);
    base.threads = spec.value("threads", 1u);
    gen.kind = parse_kind(spec.value("kind", std::string("union_rect")));
    gen.disjoint = spec.value("disjoint", false);
    gen.width_fraction = spec.value("width_fraction", gen.width_fraction);
    gen.twisted = spec.value("twisted", false);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("sweep json: ") + e.what());
  }

  for (auto b : bs)
    for (auto n : ns)
      for (auto s : ss)
        for (auto r : rs)
          for (auto eps : epss)
            for (auto seed : seeds) {
              SweepRow row;
              row.b = b;
              row.n = n;
              row.s = s;
              row.r = r;
              row.epsilon = eps;
              row.seed = seed;
              row.error = std::numeric_limits<double>::quiet_NaN();
              const auto started = Clock::now();
              try {
                gen.b = b;
                gen.n = n;
                gen.s = s;
                gen.r = r;
                ExperimentConfig cfg = base;
                cfg.target = gen_target(gen, seed);
                cfg.epsilon = eps;
                cfg.seed = seed;
                auto rep = run_experiment(cfg);
                row.queries = rep.json["queries"].get<std::uint64_t>();
                row.stages = rep.json["stages"].get<std::size_t>();
                if (!rep.json["error"].is_null()) row.error = rep.json["error"]["value"].get<double>();
                row.status = rep.ok ? "ok" : "failed:" + csv_safe(rep.json["failure"].get<std::string>());
              } catch (const Error& e) {
                row.status = "failed:" + csv_safe(std::string(errc_name(e.code())) + ": " + e.what());
              }
              row.wall_time = std::chrono::duration<double>(Clock::now() - started).count();
              if (row.status != "ok") out.all_ok = false;
              out.rows.push_back(std::move(row));
            }
  return out;
}

}  // namespace ghs
