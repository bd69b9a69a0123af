#include "mwp/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "mwp/rng.hpp"

namespace mwp {

using nlohmann::json;

LossBuild build_loss(Graph& g, const Model& m, const Problem& p,
                     const EncodedInput& in, const LossOptions& opts) {
  if (!p.gold_steps) {
    throw std::invalid_argument("build_loss: problem " + p.id +
                                " has no gold steps");
  }
  const auto& gold = p.gold_steps->steps;
  if (static_cast<int>(gold.size()) > m.cfg.op.max_steps) {
    throw std::invalid_argument("build_loss: gold step list longer than "
                                "max_steps");
  }

  EncoderNodes enc = m.encoder.encode(g, in);
  OperandPool pool = m.decoder.make_pool(g, enc);

  LossBuild out;
  out.question_node = enc.question;
  std::vector<int> margin_nodes;
  std::vector<int> gold_stop_nodes;
  for (size_t t = 0; t < gold.size(); ++t) {
    std::vector<ScoredCandidate> cands = m.decoder.score_all(g, pool, m.cfg.op);
    int gold_idx = -1;
    for (size_t c = 0; c < cands.size(); ++c) {
      if (cands[c].step == gold[t]) {
        gold_idx = static_cast<int>(c);
        break;
      }
    }
    if (gold_idx < 0) {
      // indicates an enumeration or canonicalization bug, never bad data
      throw std::logic_error("gold step " + step_str(gold[t]) +
                             " not found in candidate set");
    }
    std::vector<int> se_nodes;
    se_nodes.reserve(cands.size());
    for (const auto& c : cands) se_nodes.push_back(c.se_node);
    int max_node = g.max_of(se_nodes);
    int margin =
        g.sub(max_node, cands[static_cast<size_t>(gold_idx)].se_node);
    margin_nodes.push_back(margin);
    out.report.margins.push_back(g.value0(margin));
    if (Decoder::argmax_candidate(cands) == static_cast<size_t>(gold_idx)) {
      ++out.report.gold_argmax;
    }
    ++out.report.steps;

    // teacher forcing: the gold step joins the pool, then everything is
    // rationalized against its embedding
    const auto& chosen = cands[static_cast<size_t>(gold_idx)];
    gold_stop_nodes.push_back(chosen.sstop_node);
    pool.entries.push_back(
        {{RefKind::step, static_cast<int>(t)}, chosen.h_node});
    m.decoder.rationalize(g, pool, chosen.h_node);
  }
  out.eq8_node = g.sum_of(margin_nodes);
  out.report.total = g.value0(out.eq8_node);
  for (const auto& e : pool.entries) out.pool_refs.push_back(e.ref);

  // termination hinges: the gold final step's stop score must beat the
  // stop score of every earlier gold step and of a few greedy
  // continuation steps, each by stop_margin
  int final_stop = gold_stop_nodes.back();
  std::vector<int> hinge_nodes;
  for (size_t t = 0; t + 1 < gold_stop_nodes.size(); ++t) {
    hinge_nodes.push_back(g.relu(
        g.affine(g.sub(gold_stop_nodes[t], final_stop), 1.0,
                 opts.stop_margin)));
  }
  int lookahead = m.cfg.op.max_steps - static_cast<int>(gold.size());
  if (opts.stop_lookahead >= 0) {
    lookahead = std::min(lookahead, opts.stop_lookahead);
  }
  for (int k = 0; k < lookahead; ++k) {
    std::vector<ScoredCandidate> cands = m.decoder.score_all(g, pool, m.cfg.op);
    size_t best = Decoder::argmax_candidate(cands);
    hinge_nodes.push_back(g.relu(
        g.affine(g.sub(cands[best].sstop_node, final_stop), 1.0,
                 opts.stop_margin)));
    pool.entries.push_back(
        {{RefKind::step, static_cast<int>(gold.size()) + k},
         cands[best].h_node});
    m.decoder.rationalize(g, pool, cands[best].h_node);
  }
  if (hinge_nodes.empty()) {
    out.objective_node = out.eq8_node;
    out.report.stop_penalty = 0.0;
  } else {
    int penalty = g.sum_of(hinge_nodes);
    out.report.stop_penalty = g.value0(penalty);
    out.objective_node =
        g.add(out.eq8_node, g.affine(penalty, opts.stop_weight, 0.0));
  }
  out.report.objective = g.value0(out.objective_node);
  return out;
}

LossReport train_step(Model& m, const Problem& p, Adam& adam,
                      const LossOptions& opts) {
  Graph g;
  g.reset(m.store);
  EncodedInput in = m.prepare(p);
  LossBuild lb = build_loss(g, m, p, in, opts);
  m.store.zero_grads();
  g.backward(lb.objective_node);
  adam.step(m.store);
  return lb.report;
}

int select_final(const std::vector<double>& stop_scores) {
  if (stop_scores.empty()) {
    throw std::invalid_argument("select_final: no steps");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(stop_scores.size()); ++i) {
    if (stop_scores[static_cast<size_t>(i)] >
        stop_scores[static_cast<size_t>(best)]) {
      best = i;
    }
  }
  return best;
}

namespace {

Prediction predict_prepared(const Model& m, const Problem& p,
                            const EncodedInput& in,
                            std::vector<StepInspection>* inspect) {
  // prediction never runs backward, so the store stays untouched
  Graph g;
  g.reset(const_cast<ParameterStore&>(m.store));
  EncoderNodes enc = m.encoder.encode(g, in);
  OperandPool pool = m.decoder.make_pool(g, enc);

  Prediction pred;
  for (int t = 0; t < m.cfg.op.max_steps; ++t) {
    std::vector<ScoredCandidate> cands = m.decoder.score_all(g, pool, m.cfg.op);
    size_t best = Decoder::argmax_candidate(cands);
    pred.steps.push_back(cands[best].step);
    pred.stop_scores.push_back(cands[best].scores.s_stop);
    pred.chosen_scores.push_back(cands[best].scores);
    if (inspect) {
      StepInspection si;
      si.candidates = cands;
      si.chosen = best;
      inspect->push_back(std::move(si));
    }
    pool.entries.push_back({{RefKind::step, t}, cands[best].h_node});
    m.decoder.rationalize(g, pool, cands[best].h_node);
  }
  int final0 = select_final(pred.stop_scores);
  pred.final_index = final0 + 1;
  StepList chosen;
  chosen.steps.assign(pred.steps.begin(),
                      pred.steps.begin() + pred.final_index);
  pred.outcome = evaluate(chosen, p, m.cfg.op);
  return pred;
}

}  // namespace

Prediction predict(const Model& m, const Problem& p,
                   std::vector<StepInspection>* inspect) {
  return predict_prepared(m, p, m.prepare(p), inspect);
}

json Metrics::to_json() const {
  json bs = json::object();
  for (const auto& [k, v] : by_steps) {
    double acc = v.first > 0 ? static_cast<double>(v.second) / v.first : 0.0;
    bs[std::to_string(k)] = {
        {"n", v.first}, {"correct", v.second}, {"accuracy", acc}};
  }
  return json{{"value_accuracy", value_accuracy}, {"n", n},
              {"by_steps", bs},   {"failures", failures},
              {"config_echo", config_echo}, {"seed", seed}};
}

Metrics evaluate_corpus(const Model& m, const std::vector<Problem>& problems,
                        double tol, int jobs) {
  if (problems.empty()) throw std::runtime_error("empty corpus");
  const size_t n = problems.size();
  std::vector<char> correct(n, 0), failed(n, 0);

  auto run_range = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      Prediction pred = predict(m, problems[i]);
      failed[i] = pred.outcome.failed ? 1 : 0;
      correct[i] = answers_match(pred.outcome, problems[i].answer, tol) ? 1 : 0;
    }
  };

  if (jobs <= 1 || n < 2) {
    run_range(0, n);
  } else {
    size_t workers = std::min<size_t>(static_cast<size_t>(jobs), n);
    std::vector<std::thread> threads;
    size_t chunk = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
      size_t lo = w * chunk;
      size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      threads.emplace_back(run_range, lo, hi);
    }
    for (auto& t : threads) t.join();
  }

  Metrics metrics;
  metrics.n = static_cast<int>(n);
  metrics.seed = m.cfg.seed;
  metrics.config_echo = m.config_echo();
  for (size_t i = 0; i < n; ++i) {
    int key = problems[i].gold_steps
                  ? static_cast<int>(problems[i].gold_steps->steps.size())
                  : 0;
    auto& bucket = metrics.by_steps[key];
    ++bucket.first;
    if (correct[i]) {
      ++bucket.second;
      metrics.value_accuracy += 1.0;
    }
    if (failed[i]) ++metrics.failures;
  }
  metrics.value_accuracy /= static_cast<double>(n);
  return metrics;
}

namespace {

bool trainable(const Problem& p, const OperatorConfig& op) {
  if (!p.gold_steps) return false;
  if (static_cast<int>(p.gold_steps->steps.size()) > op.max_steps) return false;
  if (!op.enable_pow) {
    for (const auto& s : p.gold_steps->steps) {
      if (s.family == OpFamily::pow) return false;
    }
  }
  return true;
}

}  // namespace

TrainResult train(Model& m, const std::vector<Problem>& problems,
                  const TrainConfig& cfg) {
  TrainResult result;
  std::vector<size_t> order;
  for (size_t i = 0; i < problems.size(); ++i) {
    if (trainable(problems[i], m.cfg.op)) order.push_back(i);
  }
  result.excluded = static_cast<int>(problems.size() - order.size());
  if (order.empty()) throw std::runtime_error("no trainable problems");

  std::vector<EncodedInput> prepared(problems.size());
  for (size_t i : order) prepared[i] = m.prepare(problems[i]);

  Adam adam(cfg.lr);
  Rng shuffle_rng(m.cfg.seed);
  Graph g;

  double latest_acc = -1.0;
  int last_eval_epoch = -1000;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int gold_top = 0, steps_total = 0;
    for (size_t b = 0; b < order.size(); b += static_cast<size_t>(cfg.batch_size)) {
      size_t hi = std::min(order.size(), b + static_cast<size_t>(cfg.batch_size));
      m.store.zero_grads();
      for (size_t k = b; k < hi; ++k) {
        size_t idx = order[k];
        g.reset(m.store);
        LossBuild lb = build_loss(g, m, problems[idx], prepared[idx], cfg.loss);
        g.backward(lb.objective_node);
        epoch_loss += lb.report.objective;
        gold_top += lb.report.gold_argmax;
        steps_total += lb.report.steps;
      }
      adam.step(m.store);
    }

    bool saturated = gold_top == steps_total;
    bool eval_due = epoch == cfg.epochs ||
                    epoch - last_eval_epoch >= cfg.acc_every ||
                    (saturated && epoch - last_eval_epoch >= 3);
    if (eval_due) {
      latest_acc =
          evaluate_corpus(m, problems, cfg.tol, cfg.jobs).value_accuracy;
      last_eval_epoch = epoch;
    }
    result.log.push_back({epoch, epoch_loss, latest_acc});
    result.epochs_run = epoch;
    if (cfg.verbose) {
      std::fprintf(stderr, "epoch %d loss %.6f acc %.4f\n", epoch, epoch_loss,
                   latest_acc);
    }
    if (latest_acc >= cfg.target_acc && epoch >= 1 && eval_due) break;
    if (epoch_loss == 0.0 && saturated) {
      // zero loss means zero gradients; nothing further can change
      if (last_eval_epoch != epoch) {
        latest_acc =
            evaluate_corpus(m, problems, cfg.tol, cfg.jobs).value_accuracy;
        result.log.back().train_acc = latest_acc;
      }
      break;
    }
  }

  result.train_metrics = evaluate_corpus(m, problems, cfg.tol, cfg.jobs);
  return result;
}

void write_train_log_csv(const std::vector<EpochLog>& log,
                         const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "epoch,loss,train_acc\n";
  for (const auto& e : log) {
    os << e.epoch << "," << e.loss << "," << e.train_acc << "\n";
  }
}

}  // namespace mwp
