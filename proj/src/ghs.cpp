#include "ghs/ghs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ghs {

double weak_hyp_eval(const WeakHypothesis& w, const Domain& domain, PointView x) {
  const double turn = static_cast<double>(dot_mod(w.beta, x, domain.b)) / static_cast<double>(domain.b);
  return std::cos(w.theta + 2.0 * std::numbers::pi * turn);
}

void SignSumHypothesis::add(WeakHypothesis w) {
  folded_[w.beta] += std::polar(1.0, w.theta);
  terms_.push_back(std::move(w));
}

double SignSumHypothesis::sum(PointView x) const {
  double acc = 0.0;
  for (const auto& [beta, weight] : folded_) acc += (weight * char_eval(domain_, beta, x)).real();
  return acc;
}

nlohmann::ordered_json SignSumHypothesis::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = "sign_sum";
  auto terms = nlohmann::ordered_json::array();
  for (const auto& t : terms_) {
    nlohmann::ordered_json tj;
    tj["beta"] = t.beta;
    tj["theta"] = t.theta;
    terms.push_back(std::move(tj));
  }
  j["terms"] = std::move(terms);
  j["b"] = domain_.b;
  j["n"] = domain_.n;
  j["gamma"] = gamma;
  j["stages"] = stages;
  return j;
}

SignSumHypothesis SignSumHypothesis::from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "sign_sum") fail(Errc::invalid_argument, "model kind is not sign_sum");
    SignSumHypothesis h(Domain::make(j.at("n").get<std::size_t>(), j.at("b").get<Residue>()));
    for (const auto& tj : j.at("terms")) {
      WeakHypothesis w{tj.at("beta").get<Frequency>(), tj.at("theta").get<double>()};
      if (!h.domain().contains(w.beta)) fail(Errc::invalid_argument, "model term frequency outside the domain");
      h.add(std::move(w));
    }
    h.gamma = j.at("gamma").get<double>();
    h.stages = j.at("stages").get<std::size_t>();
    return h;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::invalid_argument, std::string("model json: ") + e.what());
  }
}

BoostState::BoostState(Domain domain, double advantage, double epsilon)
    : domain_(domain), advantage_(advantage), epsilon_(epsilon) {
  if (!(advantage > 0.0 && advantage < 1.0)) fail(Errc::invalid_argument, "booster advantage must lie in (0, 1)");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  margin_offset_ = advantage / (2.0 + advantage);
  log_decay_ = 0.5 * std::log1p(-advantage);
}

std::size_t BoostState::max_stages() const {
  return static_cast<std::size_t>(std::ceil(kBoostConstant / (epsilon_ * advantage_ * advantage_)));
}

double BoostState::margin(int label, PointView x) const {
  double s = 0.0;
  for (const auto& h : hypotheses_) s += weak_hyp_eval(h, domain_, x);
  return label * s - static_cast<double>(hypotheses_.size()) * margin_offset_;
}

double BoostState::measure_from_margin(double margin) const {
  return margin < 0.0 ? 1.0 : std::exp(log_decay_ * margin);
}

void BoostState::set_mu_hat(double mu_hat) {
  if (!(mu_hat > 0.0)) fail(Errc::measure_collapse, "mean measure estimate must be positive");
  mu_hat_ = mu_hat;
}

double BoostState::relative_density(int label, PointView x) const {
  if (finished_) fail(Errc::terminated, "boosting has terminated");
  return measure(label, x) / mu_hat_;
}

double BoostState::pseudo_density(int label, PointView x) const {
  const double size = std::pow(static_cast<double>(domain_.b), static_cast<double>(domain_.n));
  return relative_density(label, x) / size;
}

void BoostState::push(WeakHypothesis h) {
  if (finished_) fail(Errc::terminated, "boosting has terminated");
  hypotheses_.push_back(std::move(h));
}

std::pair<Point, int> simulate_ex(const BoostState& state, MembershipOracle& oracle, Rng& rng, double delta) {
  if (state.finished()) fail(Errc::terminated, "boosting has terminated");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const auto cap = static_cast<std::uint64_t>(std::ceil(8.0 / state.epsilon() * std::log(1.0 / delta)));
  const auto& dom = state.domain();
  Point x(dom.n);
  for (std::uint64_t draw = 0; draw < std::max<std::uint64_t>(cap, 1); ++draw) {
    for (auto& v : x) v = rng.below(dom.b);
    const int label = oracle.query(x);
    if (rng.uniform() < state.measure(label, x)) return {x, label};
  }
  fail(Errc::measure_collapse, "rejection sampler exhausted its draw cap");
}

namespace {

bool use_brute(const Domain& dom, const WeakLearnOptions& options) {
  switch (options.strategy) {
    case HeavyStrategy::brute: return true;
    case HeavyStrategy::sft: return false;
    case HeavyStrategy::automatic: return dom.fits(options.exhaustive_budget);
  }
  return false;
}

std::vector<int> materialize(MembershipOracle& oracle, std::uint64_t budget) {
  const auto& dom = oracle.domain();
  if (!dom.fits(budget)) fail(Errc::budget_exceeded, "domain too large to materialize");
  std::vector<int> table(*dom.size());
  Point x(dom.n);
  for (std::uint64_t idx = 0; idx < table.size(); ++idx) {
    dom.point_at(idx, x);
    table[idx] = oracle.query(x);
  }
  return table;
}

double phase_of(Complex z) {
  double t = std::arg(z);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  return t;
}

}  // namespace

WeakHypothesis weak_learn(MembershipOracle& oracle, const PseudoDensity& pd, double gamma, double delta, Rng& rng,
                          const WeakLearnOptions& options) {
  if (!(gamma > 0.0)) fail(Errc::invalid_argument, "gamma must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const auto& dom = oracle.domain();

  if (use_brute(dom, options)) {
    std::vector<int> owned;
    const std::vector<int>* truth = options.truth;
    if (!truth) {
      owned = materialize(oracle, options.exhaustive_budget);
      truth = &owned;
    }
    std::vector<Complex> weighted(truth->size());
    Point x(dom.n);
    for (std::uint64_t idx = 0; idx < weighted.size(); ++idx) {
      double rho;
      if (options.density) {
        rho = (*options.density)[idx];
      } else {
        dom.point_at(idx, x);
        rho = pd.relative(x, (*truth)[idx]);
      }
      weighted[idx] = static_cast<double>((*truth)[idx]) * rho;
    }
    DftOptions dft;
    dft.budget = options.exhaustive_budget;
    dft.threads = options.threads;
    // Exact amplitudes: list exactly the characters with |hat f*| >= gamma/2.
    const auto heavy = find_heavy_brute(dom, weighted, gamma, dft);
    if (heavy.empty()) fail(Errc::no_correlated_character, "no character correlates at this gamma");
    const auto best = std::max_element(heavy.begin(), heavy.end(), [](const auto& a, const auto& c) {
      return std::abs(a.amplitude) < std::abs(c.amplitude);
    });
    return {best->frequency, phase_of(best->amplitude)};
  }

  QueryFunction fstar{dom,
                      [&](PointView x) {
                        const int label = oracle.query(x);
                        return Complex(label * pd.relative(x, label), 0.0);
                      },
                      pd.sup};
  SftParams sft = options.sft;
  sft.threads = options.threads;
  Rng search_rng = rng.substream("wl-search");
  const auto heavy = find_heavy_sft(fstar, gamma / 2.0, delta / 2.0, search_rng, sft);
  if (heavy.empty()) fail(Errc::no_correlated_character, "no character correlates at this gamma");
  const auto best = std::max_element(heavy.begin(), heavy.end(), [](const auto& a, const auto& c) {
    return std::abs(a.amplitude) < std::abs(c.amplitude);
  });
  // Listed frequencies carry |hat f*| >= gamma/4, so accuracy gamma/8 keeps the
  // phase within pi/6.
  Rng phase_rng = rng.substream("wl-phase");
  const Complex est = estimate_coefficient(fstar, best->frequency, gamma / 8.0, delta / 2.0, phase_rng);
  return {best->frequency, phase_of(est)};
}

BoostResult boost(MembershipOracle& oracle, double gamma, const GhsParams& params, Rng& rng) {
  if (!(gamma > 0.0 && gamma <= 1.0)) fail(Errc::invalid_argument, "gamma must lie in (0, 1]");
  if (!(params.delta > 0.0 && params.delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const auto& dom = oracle.domain();
  BoostState state(dom, gamma / 4.0, params.epsilon);
  const std::size_t max_stages =
      static_cast<std::size_t>(std::ceil(params.boost_constant / (params.epsilon * state.advantage() * state.advantage())));
  const double stage_delta = params.delta / (2.0 * static_cast<double>(max_stages));
  const double eps = params.epsilon;

  const bool exhaustive = use_brute(dom, params.weak);
  std::vector<int> owned;
  const std::vector<int>* truth = params.weak.truth;
  if (exhaustive && !truth) {
    owned = materialize(oracle, params.weak.exhaustive_budget);
    truth = &owned;
  }
  std::vector<double> sums;      // sum_i h_i(x), exhaustive only
  std::vector<double> measures;  // M_j(x), exhaustive only
  std::vector<double> density;
  if (exhaustive) {
    sums.assign(truth->size(), 0.0);
    measures.assign(truth->size(), 1.0);
  }

  SignSumHypothesis final_h(dom);
  final_h.gamma = gamma;
  Point x(dom.n);
  for (;;) {
    const std::size_t j = state.stage();
    const double offset = static_cast<double>(j - 1) * state.margin_offset();
    double mu = -1.0;
    double max_m = 0.0;
    if (exhaustive) {
      double total = 0.0;
      for (std::size_t idx = 0; idx < sums.size(); ++idx) {
        measures[idx] = state.measure_from_margin((*truth)[idx] * sums[idx] - offset);
        total += measures[idx];
        max_m = std::max(max_m, measures[idx]);
      }
      mu = total / static_cast<double>(sums.size());
    }

    double mu_hat;
    if (exhaustive && params.exact_measure) {
      mu_hat = mu;
    } else {
      // Multiplicative Chernoff at relative error 1/3, using mu >= eps/2
      // while boosting continues.
      Rng mu_rng = rng.substream("boost-mu", j);
      const auto m = static_cast<std::uint64_t>(std::ceil(54.0 / eps * std::log(2.0 / stage_delta)));
      double acc = 0.0;
      for (std::uint64_t i = 0; i < m; ++i) {
        if (exhaustive) {
          const auto idx = mu_rng.below(sums.size());
          acc += measures[idx];
        } else {
          for (auto& v : x) v = mu_rng.below(dom.b);
          acc += state.measure(oracle.query(x), x);
        }
      }
      mu_hat = acc / static_cast<double>(m);
    }
    if (mu_hat < eps) break;
    if (j > max_stages) fail(Errc::stage_budget_exhausted, "boosting exceeded its stage bound");
    state.set_mu_hat(mu_hat);

    WeakLearnOptions wl = params.weak;
    PseudoDensity pd{[&state](PointView p, int label) { return state.relative_density(label, p); },
                     state.relative_density_bound()};
    if (exhaustive) {
      density.resize(measures.size());
      for (std::size_t idx = 0; idx < measures.size(); ++idx) density[idx] = measures[idx] / mu_hat;
      wl.truth = truth;
      wl.density = &density;
    }

    std::optional<WeakHypothesis> h;
    const std::size_t attempts = exhaustive ? 1 : std::max<std::size_t>(1, params.stage_retries);
    for (std::size_t a = 0; a < attempts && !h; ++a) {
      Rng wl_rng = rng.substream("boost-wl", j * 16 + a);
      try {
        h = weak_learn(oracle, pd, gamma, stage_delta, wl_rng, wl);
      } catch (const Error& e) {
        if (e.code() != Errc::no_correlated_character || a + 1 == attempts) throw;
      }
    }

    if (exhaustive) {
      double adv = 0.0, total = 0.0;
      for (std::size_t idx = 0; idx < sums.size(); ++idx) {
        dom.point_at(idx, x);
        const double hv = weak_hyp_eval(*h, dom, x);
        adv += measures[idx] * (*truth)[idx] * hv;
        total += measures[idx];
        sums[idx] += hv;
      }
      if (params.on_stage) {
        StageTrace t;
        t.stage = j;
        t.mu = mu;
        t.mu_hat = mu_hat;
        t.max_density_times_size = max_m / mu;
        t.pseudo_ratio = mu / mu_hat;
        t.advantage = adv / total;
        params.on_stage(t);
      }
    } else if (params.on_stage) {
      StageTrace t;
      t.stage = j;
      t.mu_hat = mu_hat;
      params.on_stage(t);
    }
    final_h.add(*h);
    state.push(std::move(*h));
  }
  state.finish();
  final_h.stages = state.hypotheses().size();
  return {std::move(final_h), state.hypotheses().size(), max_stages};
}

std::vector<double> GammaSchedule::values() const {
  validate();
  std::vector<double> out;
  for (double g = start; g >= min * (1.0 - 1e-12); g *= factor) out.push_back(g);
  return out;
}

void GammaSchedule::validate() const {
  if (!(min > 0.0 && start >= min && start <= 1.0)) fail(Errc::invalid_argument, "gamma schedule needs 0 < min <= start <= 1");
  if (!(factor > 0.0 && factor < 1.0)) fail(Errc::invalid_argument, "gamma schedule factor must lie in (0, 1)");
}

GhsResult ghs_learn(MembershipOracle& oracle, const GammaSchedule& schedule, const GhsParams& params, Rng& rng) {
  const auto gammas = schedule.values();
  const std::uint64_t start_queries = oracle.query_count();
  GhsParams local = params;
  std::vector<int> owned;
  if (!local.weak.truth && use_brute(oracle.domain(), local.weak)) {
    owned = materialize(oracle, local.weak.exhaustive_budget);
    local.weak.truth = &owned;
  }
  GhsResult result;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    Rng attempt_rng = rng.substream("ghs-gamma", i);
    try {
      auto run = boost(oracle, gammas[i], local, attempt_rng);
      result.attempts.push_back({gammas[i], "ok", run.stages});
      result.hypothesis = std::move(run.hypothesis);
      result.gamma = gammas[i];
      result.stages = run.stages;
      result.queries = oracle.query_count() - start_queries;
      return result;
    } catch (const Error& e) {
      if (e.code() != Errc::no_correlated_character && e.code() != Errc::stage_budget_exhausted &&
          e.code() != Errc::measure_collapse)
        throw;
      result.attempts.push_back({gammas[i], errc_name(e.code()), 0});
    }
  }
  fail(Errc::learner_failure, "gamma schedule exhausted without a successful boosting run");
}

}  // namespace ghs
