#pragma once

#include <map>
#include <string>
#include <vector>

#include "mwp/evaluator.hpp"
#include "mwp/model.hpp"
#include "mwp/optim.hpp"

namespace mwp {

struct LossReport {
  std::vector<double> margins;  // max candidate score - gold score, per step
  double total = 0.0;           // sum of margins (the max-margin loss)
  int gold_argmax = 0;  // steps where the gold step is the decode argmax
  int steps = 0;
  // auxiliary termination supervision (see LossOptions)
  double stop_penalty = 0.0;
  double objective = 0.0;  // total + stop_weight * stop_penalty
};

// Termination supervision. The max-margin loss alone saturates at exactly
// zero once the gold step out-ranks every candidate, leaving the stop
// scores across steps unshaped, so the final-step selection (argmax of
// s_stop) stays arbitrary. The hinge below ranks the gold final step's
// s_stop above the stop scores of (a) the earlier gold steps and (b) the
// greedy continuation steps decoded past the gold list, which are exactly
// the states the final-step selection compares at inference.
struct LossOptions {
  double stop_weight = 1.0;
  double stop_margin = 1.0;
  int stop_lookahead = -1;  // continuation steps to supervise; -1 = to the
                            // decode horizon
};

struct LossBuild {
  LossReport report;
  int eq8_node = -1;       // sum of per-step margins
  int objective_node = -1; // training objective
  int question_node = -1;  // encoder h_qn node (diagnostics)
  // pool composition right after the last teacher-forced step
  std::vector<OperandRef> pool_refs;
};

// Teacher-forced loss over the gold step list: at each step the margin is
// max_e s_e - s_gold, the gold embedding is appended to the pool, and the
// pool is rationalized. Throws std::logic_error when the gold step is
// missing from the candidate set and std::invalid_argument when the gold
// list is longer than max_steps.
LossBuild build_loss(Graph& g, const Model& m, const Problem& p,
                     const EncodedInput& in, const LossOptions& opts = {});

// Single-problem training step: forward, backward, one optimizer update.
LossReport train_step(Model& m, const Problem& p, Adam& adam,
                      const LossOptions& opts = {});

struct StepInspection {
  std::vector<ScoredCandidate> candidates;  // node ids are pass-local
  size_t chosen = 0;
};

struct Prediction {
  std::vector<StepExpression> steps;
  std::vector<double> stop_scores;
  std::vector<ScoreBreakdown> chosen_scores;
  int final_index = 1;  // 1-based t* = argmax s_stop, ties earliest
  EvalOutcome outcome;  // evaluation of steps[0..final_index)
};

// 0-based argmax with ties resolving to the earliest step.
int select_final(const std::vector<double>& stop_scores);

Prediction predict(const Model& m, const Problem& p,
                   std::vector<StepInspection>* inspect = nullptr);

struct Metrics {
  double value_accuracy = 0.0;
  int n = 0;
  // gold step count (0 = no gold steps) -> {problems, correct}
  std::map<int, std::pair<int, int>> by_steps;
  int failures = 0;  // predictions whose evaluation failed
  uint64_t seed = 0;
  nlohmann::json config_echo;

  nlohmann::json to_json() const;
};

// Runs prediction over the corpus against frozen parameters; problems are
// independent, so jobs > 1 splits them across threads with a fixed merge
// order. Throws std::runtime_error("empty corpus") on an empty list.
Metrics evaluate_corpus(const Model& m, const std::vector<Problem>& problems,
                        double tol, int jobs = 1);

struct TrainConfig {
  int epochs = 300;
  int batch_size = 8;
  double lr = 1e-3;
  double tol = 1e-4;
  // early stop once training value accuracy reaches this
  double target_acc = 0.995;
  int acc_every = 25;  // scheduled accuracy evaluations, in epochs
  int jobs = 1;
  bool verbose = false;
  LossOptions loss;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_acc = -1.0;  // latest known; -1 before the first evaluation
};

struct TrainResult {
  std::vector<EpochLog> log;
  int excluded = 0;  // problems without usable gold steps
  int epochs_run = 0;
  Metrics train_metrics;
};

// Teacher-forced training with per-batch gradient accumulation in a fixed
// order; identical seed and config give bitwise-identical parameters.
TrainResult train(Model& m, const std::vector<Problem>& problems,
                  const TrainConfig& cfg);

void write_train_log_csv(const std::vector<EpochLog>& log,
                         const std::string& path);

}  // namespace mwp
