#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mwp/corpus.hpp"
#include "mwp/engine.hpp"
#include "mwp/model.hpp"

using nlohmann::json;

namespace {

std::vector<mwp::Rational> parse_constants(const std::string& csv) {
  std::vector<mwp::Rational> out;
  size_t pos = 0;
  while (pos <= csv.size()) {
    size_t comma = csv.find(',', pos);
    std::string item = csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) {
      auto r = mwp::Rational::parse(item);
      if (!r) throw std::runtime_error("bad constant: " + item);
      for (const auto& seen : out) {
        if (seen == *r) throw std::runtime_error("duplicate constant: " + item);
      }
      out.push_back(*r);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= csv.size()) {
    size_t comma = csv.find(',', pos);
    std::string item = csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

mwp::Problem problem_from_text(const std::string& text) {
  mwp::Problem p;
  p.id = "cli";
  p.text = text;
  p.quantities = mwp::extract_quantities(text);
  if (p.quantities.empty()) {
    throw std::runtime_error("no quantities in text");
  }
  std::tie(p.question_start, p.question_end) = mwp::segment_question(text);
  p.answer = std::nan("");
  return p;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << j.dump(2) << "\n";
  }
}

struct CommonOpts {
  uint64_t seed = 1;
  int hidden = 64;
  int max_steps = 6;
  bool no_question = false;
  bool no_commutative = false;
  bool enable_pow = false;
  std::string constants = "1";
  double tol = 1e-4;
  int jobs = 1;
};

mwp::ModelConfig make_model_config(const CommonOpts& c) {
  mwp::ModelConfig cfg;
  cfg.hidden = c.hidden;
  cfg.embed_dim = c.hidden;
  cfg.no_question = c.no_question;
  cfg.no_commutative = c.no_commutative;
  cfg.seed = c.seed;
  cfg.op.enable_pow = c.enable_pow;
  cfg.op.max_steps = c.max_steps;
  cfg.op.constants = parse_constants(c.constants);
  return cfg;
}

void report_rejects(const mwp::LoadResult& loaded, const std::string& path) {
  if (loaded.rejects.empty()) return;
  std::fprintf(stderr, "note: %zu line(s) reported in the rejects list\n",
               loaded.rejects.size());
  if (!path.empty()) mwp::write_rejects(loaded.rejects, path);
}

int cmd_gen(uint64_t seed, int count, const std::string& templates, int minv,
            int maxv, const std::string& out) {
  mwp::OperatorConfig op;
  auto problems = mwp::generate_synthetic(seed, count, split_csv(templates),
                                          minv, maxv, op);
  mwp::write_jsonl(problems, out);
  std::cout << "wrote " << problems.size() << " problems to " << out << "\n";
  return 0;
}

int cmd_train(const CommonOpts& c, const std::string& data,
              const std::string& ckpt, int epochs, double lr, int batch,
              double target_acc, int acc_every, const mwp::LossOptions& loss,
              const std::string& log_path, const std::string& metrics_path,
              const std::string& rejects_path, bool verbose) {
  mwp::ModelConfig mc = make_model_config(c);
  mwp::LoadResult loaded = mwp::load_jsonl(data, mc.op);
  report_rejects(loaded, rejects_path);
  if (loaded.problems.empty()) throw std::runtime_error("empty corpus");

  mwp::Vocabulary vocab = mwp::Vocabulary::build(loaded.problems, mc.lowercase);
  mwp::Model model = mwp::Model::build(mc, std::move(vocab));

  mwp::TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch;
  tc.lr = lr;
  tc.tol = c.tol;
  tc.target_acc = target_acc;
  tc.acc_every = acc_every;
  tc.jobs = c.jobs;
  tc.verbose = verbose;
  tc.loss = loss;

  mwp::TrainResult result = mwp::train(model, loaded.problems, tc);
  model.save(ckpt);
  if (!log_path.empty()) mwp::write_train_log_csv(result.log, log_path);

  json metrics = result.train_metrics.to_json();
  metrics["epochs_run"] = result.epochs_run;
  metrics["excluded_from_training"] = result.excluded;
  if (!metrics_path.empty()) emit_json(metrics, metrics_path);
  std::cout << "trained " << result.epochs_run << " epoch(s), train accuracy "
            << result.train_metrics.value_accuracy << ", checkpoint " << ckpt
            << "\n";
  return 0;
}

int cmd_eval(const std::string& data, const std::string& ckpt, double tol,
             int jobs, const std::string& metrics_path,
             const std::string& rejects_path) {
  mwp::Model model = mwp::Model::load(ckpt);
  mwp::LoadResult loaded = mwp::load_jsonl(data, model.cfg.op);
  report_rejects(loaded, rejects_path);
  if (loaded.problems.empty()) throw std::runtime_error("empty corpus");
  mwp::Metrics metrics =
      mwp::evaluate_corpus(model, loaded.problems, tol, jobs);
  emit_json(metrics.to_json(), metrics_path);
  return 0;
}

int cmd_solve(const std::string& text, const std::string& ckpt) {
  mwp::Model model = mwp::Model::load(ckpt);
  mwp::Problem p = problem_from_text(text);
  mwp::Prediction pred = mwp::predict(model, p);

  mwp::StepList all{pred.steps};
  mwp::EvalOutcome full = mwp::evaluate(all, p, model.cfg.op);
  for (size_t t = 0; t < pred.steps.size(); ++t) {
    std::string val =
        t < full.step_values.size() ? full.step_values[t].str() : "?";
    std::cout << "e" << t + 1 << ": "
              << mwp::step_str_values(pred.steps[t], p, model.cfg.op) << " = "
              << val << "  (s_stop " << pred.stop_scores[t] << ")\n";
  }
  std::cout << "selected: e" << pred.final_index << "\n";
  if (pred.outcome.failed || !pred.outcome.final) {
    std::cout << "no valid answer (" << pred.outcome.reason_str() << ")\n";
  } else {
    std::cout << mwp::render_expanded(all,
                                      static_cast<size_t>(pred.final_index - 1),
                                      p, model.cfg.op)
              << " = " << pred.outcome.final->str() << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& text, const std::string& ckpt,
                const std::string& out_path) {
  mwp::Model model = mwp::Model::load(ckpt);
  mwp::Problem p = problem_from_text(text);
  std::vector<mwp::StepInspection> inspect;
  mwp::Prediction pred = mwp::predict(model, p, &inspect);

  json steps = json::array();
  for (size_t t = 0; t < inspect.size(); ++t) {
    json cands = json::array();
    for (const auto& c : inspect[t].candidates) {
      cands.push_back({{"step", mwp::step_str_values(c.step, p, model.cfg.op)},
                       {"s_var", c.scores.s_var},
                       {"s_expr", c.scores.s_expr},
                       {"s_stop", c.scores.s_stop},
                       {"s_e", c.scores.s_e}});
    }
    steps.push_back({{"step_index", t + 1},
                     {"chosen", inspect[t].chosen},
                     {"candidates", cands}});
  }
  json out{{"steps", steps},
           {"final_index", pred.final_index},
           {"value", pred.outcome.failed || !pred.outcome.final
                         ? json(nullptr)
                         : json(pred.outcome.final->as_double())}};
  emit_json(out, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mwps - trainable math word problem solver"};
  app.require_subcommand(1);

  CommonOpts c;

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  uint64_t gen_seed = 1;
  int gen_count = 200, gen_min = 1, gen_max = 20;
  std::string gen_templates = "all", gen_out;
  gen->add_option("--seed", gen_seed);
  gen->add_option("--count", gen_count);
  gen->add_option("--templates", gen_templates, "comma list or 'all'");
  gen->add_option("--min", gen_min);
  gen->add_option("--max", gen_max);
  gen->add_option("--out", gen_out)->required();

  // train
  auto* train = app.add_subcommand("train", "train a model");
  std::string train_data, train_ckpt, train_log, train_metrics, train_rejects;
  int epochs = 300, batch = 8, acc_every = 25;
  double lr = 1e-3, target_acc = 0.995;
  bool verbose = false;
  mwp::LossOptions loss;
  train->add_option("--data", train_data)->required();
  train->add_option("--ckpt", train_ckpt)->required();
  train->add_option("--seed", c.seed);
  train->add_option("--epochs", epochs);
  train->add_option("--lr", lr);
  train->add_option("--batch", batch);
  train->add_option("--hidden", c.hidden);
  train->add_option("--max-steps", c.max_steps);
  train->add_flag("--no-question", c.no_question);
  train->add_flag("--no-commutative", c.no_commutative);
  train->add_flag("--enable-pow", c.enable_pow);
  train->add_option("--constants", c.constants, "comma list, e.g. \"1,100\"");
  train->add_option("--tol", c.tol);
  train->add_option("--jobs", c.jobs);
  train->add_option("--target-acc", target_acc);
  train->add_option("--acc-every", acc_every);
  train->add_option("--stop-weight", loss.stop_weight);
  train->add_option("--stop-margin", loss.stop_margin);
  train->add_option("--stop-lookahead", loss.stop_lookahead);
  train->add_option("--log", train_log, "training log CSV path");
  train->add_option("--metrics", train_metrics, "metrics JSON path");
  train->add_option("--rejects", train_rejects, "rejects report path");
  train->add_flag("--verbose", verbose);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_data, eval_ckpt, eval_metrics, eval_rejects;
  double eval_tol = 1e-4;
  int eval_jobs = 1;
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--ckpt", eval_ckpt)->required();
  eval->add_option("--tol", eval_tol);
  eval->add_option("--jobs", eval_jobs);
  eval->add_option("--metrics", eval_metrics, "metrics JSON path (default stdout)");
  eval->add_option("--rejects", eval_rejects);

  // solve
  auto* solve = app.add_subcommand("solve", "solve a single problem");
  std::string solve_text, solve_ckpt;
  solve->add_option("--text", solve_text)->required();
  solve->add_option("--ckpt", solve_ckpt)->required();

  // inspect
  auto* inspect = app.add_subcommand("inspect", "per-step candidate scores");
  std::string inspect_text, inspect_ckpt, inspect_out;
  inspect->add_option("--text", inspect_text)->required();
  inspect->add_option("--ckpt", inspect_ckpt)->required();
  inspect->add_option("--out", inspect_out, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen(gen_seed, gen_count, gen_templates, gen_min, gen_max,
                     gen_out);
    }
    if (train->parsed()) {
      return cmd_train(c, train_data, train_ckpt, epochs, lr, batch,
                       target_acc, acc_every, loss, train_log, train_metrics,
                       train_rejects, verbose);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_data, eval_ckpt, eval_tol, eval_jobs, eval_metrics,
                      eval_rejects);
    }
    if (solve->parsed()) return cmd_solve(solve_text, solve_ckpt);
    if (inspect->parsed()) return cmd_inspect(inspect_text, inspect_ckpt,
                                              inspect_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
