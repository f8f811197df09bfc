// Command-line front end: gen, learn, eval, sweep.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ghs/harness.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) ghs::fail(ghs::Errc::invalid_argument, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    ghs::fail(ghs::Errc::invalid_argument, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) ghs::fail(ghs::Errc::invalid_argument, "cannot write " + path);
  out << text << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic sieve learner for unions and majorities of rectangles over [b]^n"};
  app.require_subcommand(1);

  ghs::GenParams gen;
  std::string kind = "union_rect";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random target concept");
  gen_cmd->add_option("--kind", kind, "union_rect | maj_parity | maj_or_rect")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Number of coordinates")->required();
  gen_cmd->add_option("--b", gen.b, "Alphabet size")->required();
  gen_cmd->add_option("--s", gen.s, "Number of gates")->required();
  gen_cmd->add_option("--r", gen.r, "Literals per gate")->required();
  gen_cmd->add_flag("--disjoint", gen.disjoint, "Pairwise disjoint rectangles");
  gen_cmd->add_flag("--twisted", gen.twisted, "Random invertible twists (maj_parity only)");
  gen_cmd->add_option("--width-fraction", gen.width_fraction, "Maximum literal width as a fraction of b");
  gen_cmd->add_option("--seed", gen_seed, "Seed")->required();
  gen_cmd->add_option("-o,--output", gen_out, "Output file (stdout when omitted)");

  ghs::ExperimentConfig cfg;
  std::string algo = "ghs";
  std::string error_mode;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a target from membership queries");
  learn_cmd->add_option("--target", cfg.target_path, "Target JSON")->required();
  learn_cmd->add_option("--algo", algo, "ghs | grid")->capture_default_str();
  learn_cmd->add_option("--epsilon", cfg.epsilon, "Accuracy parameter")->required();
  learn_cmd->add_option("--delta", cfg.delta, "Confidence parameter")->required();
  learn_cmd->add_option("--gamma-start", cfg.schedule.start, "First correlation level tried")->capture_default_str();
  learn_cmd->add_option("--gamma-min", cfg.schedule.min, "Smallest correlation level tried")->capture_default_str();
  learn_cmd->add_option("--gamma-factor", cfg.schedule.factor, "Schedule ratio")->capture_default_str();
  learn_cmd->add_option("--seed", cfg.seed, "Seed")->required();
  learn_cmd->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
  learn_cmd->add_option("--exhaustive-budget", cfg.exhaustive_budget, "Largest b^n handled exhaustively")
      ->capture_default_str();
  learn_cmd->add_option("--query-cap", cfg.query_cap, "Abort after this many queries (0: none)");
  learn_cmd->add_option("--wall-clock-cap", cfg.wall_clock_cap, "Abort after this many seconds (0: none)");
  learn_cmd->add_option("--error-mode", error_mode, "exhaustive | sample (default: exhaustive when it fits)");
  learn_cmd->add_option("--error-samples", cfg.error_samples, "Samples for sampled error")->capture_default_str();
  learn_cmd->add_option("-o,--output", cfg.model_path, "Model output file")->required();
  learn_cmd->add_option("--report", cfg.report_path, "Report output file")->required();

  std::string eval_target, eval_model, eval_mode = "exhaustive";
  std::uint64_t eval_m = 100000, eval_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Measure a model's error against a target");
  eval_cmd->add_option("--target", eval_target, "Target JSON")->required();
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
  eval_cmd->add_option("--mode", eval_mode, "exhaustive | sample")->capture_default_str();
  eval_cmd->add_option("--m", eval_m, "Sample count in sample mode")->capture_default_str();
  eval_cmd->add_option("--seed", eval_seed, "Sampling seed")->capture_default_str();

  std::string sweep_spec, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  sweep_cmd->add_option("--spec", sweep_spec, "Sweep JSON")->required();
  sweep_cmd->add_option("-o,--output", sweep_out, "CSV output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      gen.kind = ghs::parse_kind(kind);
      write_text(gen_out, ghs::gen_target(gen, gen_seed).to_json().dump(2));
      return 0;
    }
    if (*learn_cmd) {
      cfg.algorithm = ghs::parse_algorithm(algo);
      if (!error_mode.empty()) cfg.error_mode = ghs::parse_error_mode(error_mode);
      const auto report = ghs::run_experiment(cfg);
      if (!report.ok) {
        std::cerr << "learning failed: " << report.json["failure"].get<std::string>() << '\n';
        return 1;
      }
      return 0;
    }
    if (*eval_cmd) {
      const auto target = ghs::Concept::from_json(read_json(eval_target));
      const auto model = ghs::Model::from_json(read_json(eval_model));
      if (!(model.domain() == target.domain())) ghs::fail(ghs::Errc::invalid_argument, "model and target domains differ");
      ghs::Rng rng = ghs::Rng(eval_seed).substream("eval");
      const auto err = ghs::estimate_error([&model](ghs::PointView x) { return model.eval(x); }, target,
                                          ghs::parse_error_mode(eval_mode), eval_m, rng);
      std::cout << err.to_json().dump(2) << '\n';
      return 0;
    }
    if (*sweep_cmd) {
      const auto result = ghs::sweep(read_json(sweep_spec));
      std::ofstream out(sweep_out);
      if (!out) ghs::fail(ghs::Errc::invalid_argument, "cannot write " + sweep_out);
      result.write_csv(out);
      return result.all_ok ? 0 : 1;
    }
  } catch (const ghs::Error& e) {
    std::cerr << ghs::errc_name(e.code()) << ": " << e.what() << '\n';
    return 2;
  }
  return 0;
}
