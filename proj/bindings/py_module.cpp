#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "mwp/corpus.hpp"
#include "mwp/engine.hpp"
#include "mwp/model.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<int64_t>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<uint64_t>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out[py::str(it.key())] = json_to_py(it.value());
      }
      return out;
    }
    default:
      return py::none();
  }
}

json problem_to_json(const mwp::Problem& p) {
  json quantities = json::array();
  for (const auto& q : p.quantities) {
    quantities.push_back({{"value", q.value.str()},
                          {"value_float", q.value.to_double()},
                          {"start", q.start},
                          {"end", q.end}});
  }
  json j{{"id", p.id},
         {"text", p.text},
         {"answer", p.answer},
         {"quantities", quantities},
         {"question_start", p.question_start},
         {"question_end", p.question_end},
         {"gold_steps", p.gold_steps
                            ? json(static_cast<int>(p.gold_steps->steps.size()))
                            : json(nullptr)}};
  if (p.gold_equation) j["equation"] = *p.gold_equation;
  return j;
}

std::vector<mwp::Rational> constants_from_strings(
    const std::vector<std::string>& items) {
  std::vector<mwp::Rational> out;
  for (const auto& s : items) {
    auto r = mwp::Rational::parse(s);
    if (!r) throw std::invalid_argument("bad constant: " + s);
    out.push_back(*r);
  }
  return out;
}

mwp::Problem problem_from_text(const std::string& text) {
  mwp::Problem p;
  p.id = "py";
  p.text = text;
  p.quantities = mwp::extract_quantities(text);
  if (p.quantities.empty()) throw std::invalid_argument("no quantities in text");
  std::tie(p.question_start, p.question_end) = mwp::segment_question(text);
  return p;
}

py::object py_extract_quantities(const std::string& text) {
  json out = json::array();
  for (const auto& q : mwp::extract_quantities(text)) {
    out.push_back({{"value", q.value.str()},
                   {"value_float", q.value.to_double()},
                   {"start", q.start},
                   {"end", q.end}});
  }
  return json_to_py(out);
}

py::object py_evaluate_equation(const std::string& equation,
                                const std::vector<std::string>& quantity_values,
                                const std::vector<std::string>& constants) {
  std::vector<mwp::Quantity> qs;
  for (size_t i = 0; i < quantity_values.size(); ++i) {
    auto r = mwp::Rational::parse(quantity_values[i]);
    if (!r) throw std::invalid_argument("bad quantity: " + quantity_values[i]);
    mwp::Quantity q;
    q.index = static_cast<int>(i);
    q.value = *r;
    qs.push_back(q);
  }
  auto consts = constants_from_strings(constants);
  mwp::ParseResult pr = mwp::parse_equation(equation, qs, consts);
  if (!pr.steps) throw std::invalid_argument("parse error: " + pr.error);
  std::vector<mwp::Rational> qvals;
  for (const auto& q : qs) qvals.push_back(q.value);
  mwp::EvalOutcome eo = mwp::evaluate(*pr.steps, qvals, consts);
  json steps = json::array();
  for (const auto& s : pr.steps->steps) steps.push_back(mwp::step_str(s));
  json out{{"steps", steps},
           {"failed", eo.failed},
           {"value", eo.failed || !eo.final ? json(nullptr)
                                            : json(eo.final->as_double())},
           {"value_str", eo.failed || !eo.final ? json(nullptr)
                                                : json(eo.final->str())}};
  return json_to_py(out);
}

py::object py_generate(uint64_t seed, int count,
                       const std::vector<std::string>& templates, int min_value,
                       int max_value, const std::string& out_path) {
  mwp::OperatorConfig op;
  auto problems =
      mwp::generate_synthetic(seed, count, templates, min_value, max_value, op);
  if (!out_path.empty()) mwp::write_jsonl(problems, out_path);
  json out = json::array();
  for (const auto& p : problems) out.push_back(problem_to_json(p));
  return json_to_py(out);
}

py::object py_load_jsonl(const std::string& path) {
  mwp::OperatorConfig op;
  mwp::LoadResult loaded = mwp::load_jsonl(path, op);
  json problems = json::array();
  for (const auto& p : loaded.problems) problems.push_back(problem_to_json(p));
  json rejects = json::array();
  for (const auto& r : loaded.rejects) {
    rejects.push_back({{"line", r.line}, {"reason", r.reason}});
  }
  return json_to_py(json{{"problems", problems}, {"rejects", rejects}});
}

py::object py_train(const std::string& data_path, const std::string& ckpt_path,
                    uint64_t seed, int hidden, int epochs, double lr, int batch,
                    int max_steps, bool no_question, bool no_commutative,
                    bool enable_pow, const std::vector<std::string>& constants,
                    double tol, double target_acc, int acc_every, int jobs) {
  mwp::ModelConfig mc;
  mc.hidden = hidden;
  mc.embed_dim = hidden;
  mc.seed = seed;
  mc.no_question = no_question;
  mc.no_commutative = no_commutative;
  mc.op.enable_pow = enable_pow;
  mc.op.max_steps = max_steps;
  mc.op.constants = constants_from_strings(constants);

  mwp::LoadResult loaded = mwp::load_jsonl(data_path, mc.op);
  if (loaded.problems.empty()) throw std::runtime_error("empty corpus");
  mwp::Vocabulary vocab = mwp::Vocabulary::build(loaded.problems, mc.lowercase);
  mwp::Model model = mwp::Model::build(mc, std::move(vocab));

  mwp::TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = batch;
  tc.lr = lr;
  tc.tol = tol;
  tc.target_acc = target_acc;
  tc.acc_every = acc_every;
  tc.jobs = jobs;
  mwp::TrainResult result = mwp::train(model, loaded.problems, tc);
  model.save(ckpt_path);

  json metrics = result.train_metrics.to_json();
  metrics["epochs_run"] = result.epochs_run;
  metrics["excluded_from_training"] = result.excluded;
  return json_to_py(metrics);
}

class PySolver {
 public:
  explicit PySolver(const std::string& ckpt_path)
      : model_(mwp::Model::load(ckpt_path)) {}

  py::object solve(const std::string& text) const {
    mwp::Problem p = problem_from_text(text);
    mwp::Prediction pred = mwp::predict(model_, p);
    json steps = json::array();
    mwp::StepList all{pred.steps};
    for (size_t t = 0; t < pred.steps.size(); ++t) {
      steps.push_back({{"step", mwp::step_str_values(pred.steps[t], p,
                                                     model_.cfg.op)},
                       {"s_stop", pred.stop_scores[t]}});
    }
    json out{{"steps", steps},
             {"final_index", pred.final_index},
             {"expression",
              mwp::render_expanded(all,
                                   static_cast<size_t>(pred.final_index - 1),
                                   p, model_.cfg.op)},
             {"failed", pred.outcome.failed},
             {"value", pred.outcome.failed || !pred.outcome.final
                           ? json(nullptr)
                           : json(pred.outcome.final->as_double())}};
    return json_to_py(out);
  }

  py::object inspect(const std::string& text) const {
    mwp::Problem p = problem_from_text(text);
    std::vector<mwp::StepInspection> inspect;
    mwp::Prediction pred = mwp::predict(model_, p, &inspect);
    json steps = json::array();
    for (size_t t = 0; t < inspect.size(); ++t) {
      json cands = json::array();
      for (const auto& c : inspect[t].candidates) {
        cands.push_back({{"step", mwp::step_str_values(c.step, p, model_.cfg.op)},
                         {"s_var", c.scores.s_var},
                         {"s_expr", c.scores.s_expr},
                         {"s_stop", c.scores.s_stop},
                         {"s_e", c.scores.s_e}});
      }
      steps.push_back({{"step_index", t + 1},
                       {"chosen", inspect[t].chosen},
                       {"candidates", cands}});
    }
    return json_to_py(json{{"steps", steps},
                           {"final_index", pred.final_index}});
  }

  py::object evaluate_file(const std::string& data_path, double tol,
                           int jobs) const {
    mwp::LoadResult loaded = mwp::load_jsonl(data_path, model_.cfg.op);
    if (loaded.problems.empty()) throw std::runtime_error("empty corpus");
    mwp::Metrics metrics =
        mwp::evaluate_corpus(model_, loaded.problems, tol, jobs);
    return json_to_py(metrics.to_json());
  }

 private:
  mwp::Model model_;
};

}  // namespace

PYBIND11_MODULE(_mwps, m) {
  m.doc() = "math word problem solver with a question-aware deductive decoder";

  m.def("extract_quantities", &py_extract_quantities, py::arg("text"));
  m.def("segment_question",
        [](const std::string& text) { return mwp::segment_question(text); },
        py::arg("text"));
  m.def("evaluate_equation", &py_evaluate_equation, py::arg("equation"),
        py::arg("quantities"), py::arg("constants") = std::vector<std::string>{"1"});
  m.def("generate", &py_generate, py::arg("seed"), py::arg("count"),
        py::arg("templates") = std::vector<std::string>{},
        py::arg("min_value") = 1, py::arg("max_value") = 20,
        py::arg("out_path") = std::string());
  m.def("template_names", &mwp::synthetic_template_names);
  m.def("load_jsonl", &py_load_jsonl, py::arg("path"));
  m.def("train", &py_train, py::arg("data_path"), py::arg("ckpt_path"),
        py::arg("seed") = 1, py::arg("hidden") = 64, py::arg("epochs") = 300,
        py::arg("lr") = 1e-3, py::arg("batch") = 8, py::arg("max_steps") = 6,
        py::arg("no_question") = false, py::arg("no_commutative") = false,
        py::arg("enable_pow") = false,
        py::arg("constants") = std::vector<std::string>{"1"},
        py::arg("tol") = 1e-4, py::arg("target_acc") = 0.995,
        py::arg("acc_every") = 25, py::arg("jobs") = 1);

  py::class_<PySolver>(m, "Solver")
      .def(py::init<const std::string&>(), py::arg("ckpt_path"))
      .def("solve", &PySolver::solve, py::arg("text"))
      .def("inspect", &PySolver::inspect, py::arg("text"))
      .def("evaluate_file", &PySolver::evaluate_file, py::arg("data_path"),
           py::arg("tol") = 1e-4, py::arg("jobs") = 1);

  m.attr("__version__") = "0.1.0";
}
