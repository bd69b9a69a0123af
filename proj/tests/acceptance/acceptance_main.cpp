// Acceptance suite: runs every criterion end to end and prints one
// PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mwp/corpus.hpp"
#include "mwp/engine.hpp"
#include "mwp/gradcheck.hpp"
#include "mwp/model.hpp"
#include "mwp/rng.hpp"

using namespace mwp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

Outcome run_criterion(const std::function<void()>& fn) {
  Outcome out;
  auto t0 = std::chrono::steady_clock::now();
  try {
    fn();
    out.pass = true;
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = e.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  return out;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

Rational rat(int64_t n, int64_t d = 1) { return *Rational::make(n, d); }

std::vector<Quantity> quants(const std::vector<Rational>& values) {
  std::vector<Quantity> out;
  for (size_t i = 0; i < values.size(); ++i) {
    Quantity q;
    q.index = static_cast<int>(i);
    q.value = values[i];
    out.push_back(q);
  }
  return out;
}

std::vector<double> random_vec(Rng& rng, int n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& cli, const std::string& args,
            const fs::path& log) {
  std::string cmd = cli + " " + args + " > " + log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

// ---------------------------------------------------------------------------
// 1. evaluator oracle over the eight reference equations

void criterion_evaluator() {
  struct Sample {
    const char* equation;
    std::vector<Rational> quantities;
    std::vector<Rational> constants;
    Rational expected;
  };
  const std::vector<Sample> samples = {
      {"8 - 2", {rat(8), rat(2)}, {}, rat(6)},
      {"139 + 131", {rat(139), rat(118), rat(131)}, {}, rat(270)},
      {"316 + 230 * (6 - 1)", {rat(316), rat(230), rat(6)}, {rat(1)},
       rat(1466)},
      {"16 * 4 / 2", {rat(16), rat(4), rat(2)}, {}, rat(32)},
      {"90 / (1 - 2 / 3)", {rat(90), rat(2), rat(3)}, {rat(1)}, rat(270)},
      {"(6 * 8 - (6 * 3)) / (8 + 4)",
       {rat(6), rat(8), rat(6), rat(3), rat(8), rat(4)}, {}, rat(5, 2)},
      {"43 - 25", {rat(43), rat(25)}, {}, rat(18)},
      {"28 + 42", {rat(28), rat(42), rat(63)}, {}, rat(70)},
  };
  for (const auto& s : samples) {
    ParseResult pr = parse_equation(s.equation, quants(s.quantities),
                                    s.constants);
    require(pr.steps.has_value(),
            std::string("parse failed for ") + s.equation + ": " + pr.error);
    EvalOutcome eo = evaluate(*pr.steps, s.quantities, s.constants);
    require(!eo.failed, std::string("evaluation failed for ") + s.equation);
    require(eo.final->exact, "expected an exact rational");
    require(eo.final->r == s.expected,
            std::string(s.equation) + " evaluated to " + eo.final->r.str() +
                ", expected " + s.expected.str());
  }
}

// ---------------------------------------------------------------------------
// 2. step-wise commutative invariance, exact, 1000 seeded draws

StepExpression raw_step(OpFamily fam, OperandRef a, bool ainv, OperandRef b,
                        bool binv) {
  StepExpression s;
  s.family = fam;
  s.left = {a, ainv};
  s.right = {b, binv};
  return s;
}

void criterion_commutative() {
  const int d = 32;
  OperandRef q0{RefKind::quantity, 0}, q1{RefKind::quantity, 1};
  int full_violations = 0;
  int ablation_violations = 0;

  DecoderSpec spec;
  spec.hidden = d;
  spec.n_constants = 0;
  DecoderSpec ord = spec;
  ord.no_commutative = true;

  for (int draw = 0; draw < 1000; ++draw) {
    uint64_t seed = static_cast<uint64_t>(draw) + 1;
    ParameterStore store(seed);
    Decoder dec = Decoder::build(store, spec);
    Graph g;
    g.reset(store);
    Rng rng(seed * 977 + 13);
    OperandPool pool;
    pool.entries.push_back({q0, g.input(random_vec(rng, d))});
    pool.entries.push_back({q1, g.input(random_vec(rng, d))});
    pool.question = g.input(random_vec(rng, d));

    auto equal_embed_scores = [&](const StepExpression& a,
                                  const StepExpression& b) {
      int ha = -1, hb = -1;
      ScoreBreakdown sa = dec.score_step(g, a, pool, &ha);
      ScoreBreakdown sb = dec.score_step(g, b, pool, &hb);
      auto va = g.value(ha);
      auto vb = g.value(hb);
      for (size_t k = 0; k < va.size(); ++k) {
        if (va[k] != vb[k]) return false;
      }
      return sa.s_var == sb.s_var && sa.s_expr == sb.s_expr &&
             sa.s_stop == sb.s_stop && sa.s_e == sb.s_e;
    };

    bool ok =
        equal_embed_scores(raw_step(OpFamily::add, q0, false, q1, false),
                           raw_step(OpFamily::add, q1, false, q0, false)) &&
        equal_embed_scores(raw_step(OpFamily::mul, q0, false, q1, false),
                           raw_step(OpFamily::mul, q1, false, q0, false)) &&
        equal_embed_scores(raw_step(OpFamily::add, q0, false, q1, true),
                           raw_step(OpFamily::add, q1, true, q0, false));
    if (!ok) ++full_violations;

    // ordered-constructor ablation is expected to violate a + b == b + a
    ParameterStore store2(seed);
    Decoder dec2 = Decoder::build(store2, ord);
    Graph g2;
    g2.reset(store2);
    Rng rng2(seed * 977 + 13);
    OperandPool pool2;
    pool2.entries.push_back({q0, g2.input(random_vec(rng2, d))});
    pool2.entries.push_back({q1, g2.input(random_vec(rng2, d))});
    pool2.question = g2.input(random_vec(rng2, d));
    auto ha = g2.value(dec2.embed_step(
        g2, raw_step(OpFamily::add, q0, false, q1, false), pool2));
    auto hb = g2.value(dec2.embed_step(
        g2, raw_step(OpFamily::add, q1, false, q0, false), pool2));
    bool differs = false;
    for (size_t k = 0; k < ha.size(); ++k) differs = differs || ha[k] != hb[k];
    if (differs) ++ablation_violations;
  }
  require(full_violations == 0,
          "commutative invariance violated in " +
              std::to_string(full_violations) + "/1000 draws");
  require(ablation_violations > 0,
          "no-commutative ablation unexpectedly preserved invariance "
          "(documented expected failure did not appear)");
}

// ---------------------------------------------------------------------------
// 3. end-to-end gradient check on a 2-quantity, 1-step problem

void criterion_gradcheck() {
  auto problems = generate_synthetic(61, 2, {"sub"}, 2, 9, OperatorConfig{});
  const Problem& p = problems[0];
  require(p.quantities.size() == 2, "expected a 2-quantity problem");
  require(p.gold_steps && p.gold_steps->steps.size() == 1,
          "expected a 1-step problem");

  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.embed_dim = 16;
  cfg.seed = 1;
  Model m = Model::build(cfg, Vocabulary::build(problems, true));
  // warm-up steps move ReLU pre-activations and candidate-score gaps away
  // from the kinks of the zero-bias initialization; the loss is evaluated
  // at a point where it is smooth within the finite-difference step
  Adam warm(5e-3);
  for (int i = 0; i < 10; ++i) train_step(m, problems[1], warm);

  EncodedInput in = m.prepare(p);
  auto loss_fn = [&] {
    Graph g;
    g.reset(m.store);
    return build_loss(g, m, p, in).report.objective;
  };
  auto grad_fn = [&] {
    Graph g;
    g.reset(m.store);
    LossBuild lb = build_loss(g, m, p, in);
    g.backward(lb.objective_node);
    return lb.report.objective;
  };
  {
    Graph g;
    g.reset(m.store);
    LossBuild lb = build_loss(g, m, p, in);
    require(lb.report.objective > 1e-4,
            "loss vanished at the evaluation point; the check would be "
            "vacuous");
  }
  FdOptions opts;
  opts.step = 1e-5;
  opts.skip_kinks = true;
  opts.kink_tol = 1e-2;
  auto reports = finite_difference_check(m.store, loss_fn, grad_fn, opts);
  long checked = 0, kinks = 0;
  for (const auto& r : reports) {
    require(r.max_rel_err < 1e-4,
            "parameter group " + r.param + " rel err " +
                std::to_string(r.max_rel_err));
    checked += r.coords_checked;
    kinks += r.kinks_skipped;
  }
  require(checked > 0 && kinks * 200 <= checked,
          "too many kink coordinates skipped: " + std::to_string(kinks) +
              " of " + std::to_string(checked + kinks));
}

// ---------------------------------------------------------------------------
// 4. enumeration counts against the closed forms and a brute-force oracle

void criterion_enumeration() {
  for (int n = 2; n <= 6; ++n) {
    std::vector<OperandRef> refs;
    for (int i = 0; i < n; ++i) refs.push_back({RefKind::quantity, i});
    int64_t pairs = static_cast<int64_t>(n) * (n - 1) / 2;

    for (bool pow : {false, true}) {
      OperatorConfig op;
      op.allow_self_pairs = true;
      op.enable_pow = pow;
      auto got = Decoder::enumerate_steps(refs, op);
      int64_t want_count =
          pow ? 8 * pairs + 5 * n : 6 * pairs + 4 * n;
      require(static_cast<int64_t>(got.size()) == want_count,
              "n=" + std::to_string(n) + " pow=" + std::to_string(pow) +
                  ": got " + std::to_string(got.size()) + ", want " +
                  std::to_string(want_count));

      // oracle: enumerate ordered applications, canonicalize, dedupe
      std::vector<StepExpression> oracle;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          OperandRef a{RefKind::quantity, i}, b{RefKind::quantity, j};
          oracle.push_back(raw_step(OpFamily::add, a, false, b, false).canonical());
          oracle.push_back(raw_step(OpFamily::add, a, false, b, true).canonical());
          oracle.push_back(raw_step(OpFamily::mul, a, false, b, false).canonical());
          oracle.push_back(raw_step(OpFamily::mul, a, false, b, true).canonical());
          if (pow) {
            oracle.push_back(raw_step(OpFamily::pow, a, false, b, false).canonical());
          }
        }
      }
      std::sort(oracle.begin(), oracle.end(), step_less);
      oracle.erase(std::unique(oracle.begin(), oracle.end()), oracle.end());
      std::sort(got.begin(), got.end(), step_less);
      require(got == oracle, "enumeration disagrees with the oracle at n=" +
                                 std::to_string(n));
    }
  }
}

// ---------------------------------------------------------------------------
// 5. loss properties: non-negative margins; rigged ties give zero

void criterion_loss_properties() {
  auto problems = generate_synthetic(5, 100, {}, 1, 20, OperatorConfig{});
  Graph g;
  for (int block = 0; block < 5; ++block) {
    ModelConfig cfg;
    cfg.hidden = 16;
    cfg.embed_dim = 16;
    cfg.seed = static_cast<uint64_t>(block) + 11;
    Model m = Model::build(cfg, Vocabulary::build(problems, true));
    for (int k = 0; k < 20; ++k) {
      const Problem& p = problems[static_cast<size_t>(block * 20 + k)];
      g.reset(m.store);
      LossBuild lb = build_loss(g, m, p, m.prepare(p));
      for (double margin : lb.report.margins) {
        require(margin >= 0.0, "negative margin " + std::to_string(margin));
      }
    }
  }

  // rigged parameters: all-zero decoder scores tie every candidate, so the
  // gold step attains the max and the loss is exactly zero
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.embed_dim = 16;
  cfg.seed = 3;
  Model m = Model::build(cfg, Vocabulary::build(problems, true));
  for (size_t i = 0; i < m.store.size(); ++i) {
    auto& prm = m.store.at(static_cast<int>(i));
    if (prm.name.rfind("decoder.", 0) == 0) {
      std::fill(prm.value.data.begin(), prm.value.data.end(), 0.0);
    }
  }
  for (int k = 0; k < 20; ++k) {
    const Problem& p = problems[static_cast<size_t>(k)];
    g.reset(m.store);
    LossBuild lb = build_loss(g, m, p, m.prepare(p));
    require(lb.report.total == 0.0,
            "rigged loss is " + std::to_string(lb.report.total));
  }
}

// ---------------------------------------------------------------------------
// 6 + 7. overfit run and the ablation grid

struct OverfitResult {
  double train_acc = 0.0;
  double heldout_acc = 0.0;
  int epochs_run = 0;
  double seconds = 0.0;
  json metrics;
};

OverfitResult overfit_run(bool no_question, bool no_commutative,
                          const fs::path& metrics_path) {
  auto t0 = std::chrono::steady_clock::now();
  OperatorConfig op;
  auto train_set = generate_synthetic(1, 200, {}, 1, 20, op);
  auto heldout = generate_synthetic(2, 60, {}, 1, 20, op);

  ModelConfig cfg;
  cfg.hidden = 64;
  cfg.embed_dim = 64;
  cfg.seed = 1;
  cfg.no_question = no_question;
  cfg.no_commutative = no_commutative;
  Model m = Model::build(cfg, Vocabulary::build(train_set, true));

  TrainConfig tc;
  tc.epochs = 300;
  tc.batch_size = 8;
  tc.lr = 1e-3;
  tc.target_acc = 0.995;
  tc.acc_every = 25;
  TrainResult r = train(m, train_set, tc);

  OverfitResult out;
  out.train_acc = r.train_metrics.value_accuracy;
  out.heldout_acc =
      evaluate_corpus(m, heldout, 1e-4).value_accuracy;
  out.epochs_run = r.epochs_run;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
  out.metrics = r.train_metrics.to_json();
  out.metrics["heldout_accuracy"] = out.heldout_acc;
  out.metrics["epochs_run"] = out.epochs_run;
  std::ofstream os(metrics_path);
  os << out.metrics.dump(2) << "\n";
  return out;
}

void criterion_overfit(const fs::path& dir, OverfitResult& base_out) {
  base_out = overfit_run(false, false, dir / "metrics_full.json");
  require(base_out.epochs_run <= 300, "ran more than 300 epochs");
  require(base_out.seconds <= 600.0,
          "overfit run took " + std::to_string(base_out.seconds) + "s");
  require(base_out.train_acc >= 0.95,
          "train accuracy " + std::to_string(base_out.train_acc));
  require(base_out.heldout_acc >= 0.70,
          "heldout accuracy " + std::to_string(base_out.heldout_acc));
}

void criterion_ablations(const fs::path& dir, const OverfitResult& base) {
  // the no-flag cell of the grid is the criterion-6 run
  require(base.metrics.contains("value_accuracy"),
          "base metrics missing value_accuracy");

  struct Cell {
    bool no_question, no_commutative;
    const char* name;
  };
  const std::vector<Cell> cells = {{true, false, "metrics_noq.json"},
                                   {false, true, "metrics_nocomm.json"},
                                   {true, true, "metrics_both.json"}};
  std::vector<std::future<OverfitResult>> futures;
  for (const auto& cell : cells) {
    futures.push_back(std::async(std::launch::async, [&dir, cell] {
      return overfit_run(cell.no_question, cell.no_commutative,
                         dir / cell.name);
    }));
  }
  for (size_t i = 0; i < cells.size(); ++i) {
    OverfitResult r = futures[i].get();
    json parsed = json::parse(read_file(dir / cells[i].name));
    require(parsed.contains("value_accuracy"),
            std::string(cells[i].name) + " missing value_accuracy");
    require(parsed.contains("config_echo"), "metrics missing config echo");
    // no accuracy ordering asserted between ablation cells
    (void)r;
  }

  // question-path gradients are exactly zero under no_question
  auto probe = generate_synthetic(91, 2, {"add"}, 1, 9, OperatorConfig{});
  ModelConfig cfg;
  cfg.hidden = 16;
  cfg.embed_dim = 16;
  cfg.seed = 5;
  cfg.no_question = true;
  Model m = Model::build(cfg, Vocabulary::build(probe, true));
  Graph g;
  g.reset(m.store);
  LossBuild lb = build_loss(g, m, probe[0], m.prepare(probe[0]));
  g.backward(lb.objective_node);
  for (double gv : g.grad_of(lb.question_node)) {
    require(gv == 0.0, "question-path gradient is nonzero under no_question");
  }
}

// ---------------------------------------------------------------------------
// 8. CLI determinism: identical seeds give identical artifacts

void criterion_determinism(const std::string& cli, const fs::path& dir) {
  require(!cli.empty(), "no --cli path provided");
  fs::path data = dir / "det.jsonl";
  fs::path log = dir / "cli.log";
  require(run_cli(cli, "gen --seed 1 --count 48 --min 1 --max 20 --out " +
                           data.string(), log) == 0,
          "gen failed: " + read_file(log));

  auto train_once = [&](const std::string& tag) {
    fs::path ckpt = dir / ("det_" + tag + ".ckpt");
    fs::path metrics = dir / ("det_" + tag + ".json");
    int rc = run_cli(cli,
                     "train --data " + data.string() + " --ckpt " +
                         ckpt.string() + " --seed 1 --epochs 30 --hidden 24 "
                         "--acc-every 10 --metrics " + metrics.string(),
                     log);
    require(rc == 0, "train failed: " + read_file(log));
    return std::pair<std::string, std::string>(read_file(ckpt),
                                               read_file(metrics));
  };
  auto [ckpt1, metrics1] = train_once("a");
  auto [ckpt2, metrics2] = train_once("b");
  require(!ckpt1.empty(), "first checkpoint is empty");
  require(ckpt1 == ckpt2, "checkpoints differ between identical runs");
  require(metrics1 == metrics2, "metrics JSON differs between identical runs");
}

void cli_contract(const std::string& cli, const fs::path& dir) {
  require(!cli.empty(), "no --cli path provided");
  fs::path log = dir / "cli2.log";
  require(run_cli(cli, "--definitely-not-a-flag", log) == 2,
          "bad flags should exit 2");
  require(run_cli(cli, "gen", log) == 2, "missing required flag should exit 2");

  fs::path empty = dir / "empty.jsonl";
  std::ofstream(empty).close();
  fs::path ckpt = dir / "det_a.ckpt";
  require(run_cli(cli, "eval --data " + empty.string() + " --ckpt " +
                           ckpt.string(), log) == 1,
          "eval on an empty corpus should exit 1");
  std::string msg = read_file(log);
  require(msg.find("empty corpus") != std::string::npos,
          "missing 'empty corpus' message: " + msg);

  require(run_cli(cli, "eval --data " + empty.string() +
                           " --ckpt /nonexistent/x.ckpt", log) == 1,
          "missing checkpoint should exit 1");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }
  fs::path dir = fs::temp_directory_path() / "mwps_acceptance";
  fs::create_directories(dir);

  struct Row {
    int id;
    std::string name;
    Outcome outcome;
  };
  std::vector<Row> rows;
  OverfitResult base;

  rows.push_back({1, "evaluator oracle (8 reference equations, exact)",
                  run_criterion(criterion_evaluator)});
  rows.push_back({2, "step-wise commutative invariance (1000 draws)",
                  run_criterion(criterion_commutative)});
  rows.push_back({3, "end-to-end gradient check vs central differences",
                  run_criterion(criterion_gradcheck)});
  rows.push_back({4, "candidate enumeration counts vs brute-force oracle",
                  run_criterion(criterion_enumeration)});
  rows.push_back({5, "loss properties (margins >= 0, rigged ties give 0)",
                  run_criterion(criterion_loss_properties)});
  rows.push_back({6, "overfit run (train >= 0.95, heldout >= 0.70)",
                  run_criterion([&] { criterion_overfit(dir, base); })});
  rows.push_back({7, "ablation grid completes and emits metrics",
                  run_criterion([&] { criterion_ablations(dir, base); })});
  rows.push_back({8, "determinism: train --seed 1 twice is bit-identical",
                  run_criterion([&] { criterion_determinism(cli, dir); })});

  Outcome contract = run_criterion([&] { cli_contract(cli, dir); });

  // stated runtime budgets
  auto enforce_budget = [&](size_t idx, double budget) {
    if (rows[idx].outcome.pass && rows[idx].outcome.seconds > budget) {
      rows[idx].outcome.pass = false;
      rows[idx].outcome.detail =
          "exceeded runtime budget of " + std::to_string(budget) + "s";
    }
  };
  enforce_budget(0, 1.0);
  enforce_budget(1, 10.0);
  enforce_budget(2, 120.0);

  bool all_pass = contract.pass;
  for (const auto& row : rows) {
    all_pass = all_pass && row.outcome.pass;
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n",
                row.outcome.pass ? "PASS" : "FAIL", row.id, row.name.c_str(),
                row.outcome.seconds, row.outcome.pass ? "" : " -- ",
                row.outcome.pass ? "" : row.outcome.detail.c_str());
  }
  std::printf("%s cli contract: exit codes 0/1/2 (%.2fs)%s%s\n",
              contract.pass ? "PASS" : "FAIL", contract.seconds,
              contract.pass ? "" : " -- ",
              contract.pass ? "" : contract.detail.c_str());
  if (rows[5].outcome.pass) {
    std::printf("  overfit: train %.3f heldout %.3f epochs %d (%.1fs)\n",
                base.train_acc, base.heldout_acc, base.epochs_run,
                base.seconds);
  }
  return all_pass ? 0 : 1;
}
