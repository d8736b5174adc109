#pragma once

// Penalized maximum likelihood with the distribution-aware prior, optimized
// by L-BFGS from zero weights.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "astcrf/inference.hpp"
#include "astcrf/lbfgs.hpp"

namespace astcrf {

struct TrainConfig {
  double delta2 = 500.0;
  double q = 0.5;
  int G = 200;
  int lbfgs_history = 10;
  double grad_tol = 1e-6;

  void validate() const {
    if (!(delta2 > 0.0)) throw TrainingError("delta2 must be positive");
    if (!(q >= 0.0)) throw TrainingError("q must be non-negative");
    if (G < 0) throw TrainingError("G must be non-negative");
    if (lbfgs_history < 1) throw TrainingError("lbfgs_history must be at least 1");
    if (!(grad_tol >= 0.0)) throw TrainingError("grad_tol must be non-negative");
  }
};

struct PriorWeights {
  std::vector<double> chi;
  /// N_u for every observed label count u (the keys form U).
  std::map<int, int> counts;
  double n_bar = 0.0;
};

/// chi_i = (N_bar / N_{S(t_i)})^q, where N_u counts examples with u non-EMPTY
/// labels and N_bar is the mean of N_u over observed u.
inline PriorWeights compute_prior_weights(const std::vector<TransformLabeling>& data, double q) {
  if (!(q >= 0.0)) throw TrainingError("q must be non-negative");
  PriorWeights pw;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int s = data[i].actual_count();
    if (s == 0) throw TrainingError("example " + std::to_string(i) + " has no non-EMPTY label");
    ++pw.counts[s];
  }
  if (pw.counts.empty()) return pw;
  long total = 0;
  for (const auto& [u, n] : pw.counts) total += n;
  pw.n_bar = static_cast<double>(total) / static_cast<double>(pw.counts.size());
  for (const auto& ex : data) {
    pw.chi.push_back(std::pow(pw.n_bar / pw.counts.at(ex.actual_count()), q));
  }
  return pw;
}

/// Training examples prepared once against a fixed vocabulary and
/// admissible sets; evaluation only recomputes potentials.
class TrainingProblem {
 public:
  TrainingProblem(const std::vector<TransformLabeling>& data, const Model& skeleton, std::vector<double> chi,
                  double delta2)
      : chi_(std::move(chi)), delta2_(delta2), size_(skeleton.size()) {
    if (chi_.size() != data.size()) throw TrainingError("prior weights do not match the data");
    examples_.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      Example ex{InstanceGraph(data[i].ast, skeleton), {}};
      for (std::size_t ci = 0; ci < ex.graph.cliques().size(); ++ci) {
        const int e = ex.graph.entry_of(static_cast<int>(ci), data[i]);
        if (e < 0 || !ex.graph.table(static_cast<int>(ci)).admissible[e]) {
          throw TrainingError("example " + std::to_string(i) + " (" + data[i].ast.source_id +
                              ") violates the admissible sets at clique " + to_string(ex.graph.cliques()[ci]));
        }
        ex.observed.push_back(e);
      }
      examples_.push_back(std::move(ex));
    }
  }

  int size() const noexcept { return size_; }

  /// Regularized log-likelihood at `w`; writes its gradient.
  double evaluate(const std::vector<double>& w, std::vector<double>& grad) const {
    grad.assign(static_cast<std::size_t>(size_), 0.0);
    double value = 0.0;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      const auto& ex = examples_[i];
      const double chi = chi_[i];
      const auto pot = compute_potentials(ex.graph, w);
      SumProductResult sp;
      try {
        sp = sum_product(ex.graph, pot);
      } catch (const Error& e) {
        throw TrainingError("inference failed on example " + std::to_string(i) + ": " + e.what());
      }
      double observed = 0.0;
      for (std::size_t ci = 0; ci < ex.observed.size(); ++ci) {
        const auto& t = ex.graph.table(static_cast<int>(ci));
        observed += pot.clique[ci][ex.observed[ci]];
        for (int f : t.features[ex.observed[ci]]) grad[f] += chi;
        for (int e = 0; e < t.shape.size; ++e) {
          const double p = sp.marginals[ci][e];
          if (p == 0.0) continue;
          for (int f : t.features[e]) grad[f] -= chi * p;
        }
      }
      value += chi * (observed - sp.log_z);
    }
    for (int k = 0; k < size_; ++k) {
      value -= w[k] * w[k] / (2.0 * delta2_);
      grad[k] -= w[k] / delta2_;
    }
    return value;
  }

 private:
  struct Example {
    InstanceGraph graph;
    std::vector<int> observed;
  };
  std::vector<Example> examples_;
  std::vector<double> chi_;
  double delta2_;
  int size_;
};

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// One-shot objective and gradient at `model.weights`.
inline ObjectiveValue objective_and_gradient(const std::vector<TransformLabeling>& data, const Model& model,
                                             const PriorWeights& prior, const TrainConfig& config) {
  TrainingProblem problem(data, model, prior.chi, config.delta2);
  ObjectiveValue out;
  out.value = problem.evaluate(model.weights, out.gradient);
  return out;
}

struct TrainRecord {
  int iteration;
  double objective;
  double grad_norm;
  int evaluations;
};

struct TrainReport {
  std::vector<TrainRecord> log;
  double objective = 0.0;
  double grad_norm = 0.0;
  int evaluations = 0;
  std::string stop_reason;
};

inline Json train_record_to_json(const TrainRecord& r) {
  return {{"iteration", r.iteration}, {"objective", r.objective}, {"grad_norm", r.grad_norm},
          {"evaluations", r.evaluations}};
}

inline Model train(const std::vector<TransformLabeling>& data, const FeatureVocabulary& vocab,
                   const AdmissibleSets& admissible, const TrainConfig& config, TrainReport* report = nullptr) {
  config.validate();
  Model model;
  model.vocab = vocab;
  model.admissible = admissible;
  model.weights.assign(static_cast<std::size_t>(vocab.size()), 0.0);
  model.hyper.delta2 = config.delta2;
  model.hyper.q = config.q;
  model.hyper.G = config.G;

  const auto prior = compute_prior_weights(data, config.q);
  TrainingProblem problem(data, model, prior.chi, config.delta2);

  LbfgsOptions opt;
  opt.history = config.lbfgs_history;
  opt.max_evaluations = config.G;
  opt.grad_tol = config.grad_tol;
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};

  auto negated = [&](const std::vector<double>& w, std::vector<double>& g) {
    const double v = problem.evaluate(w, g);
    for (double& x : g) x = -x;
    return -v;
  };
  LbfgsResult res;
  try {
    res = lbfgs_minimize(negated, model.weights, opt, [&](int it, double v, double gn, int evals) {
      rep.log.push_back({it, -v, gn, evals});
    });
  } catch (const TrainingError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrainingError(std::string("training aborted: ") + e.what());
  }
  model.weights = std::move(res.x);
  rep.objective = -res.value;
  rep.grad_norm = detail::inf_norm(res.gradient);
  rep.evaluations = res.evaluations;
  rep.stop_reason = res.stop_reason;
  return model;
}

}  // namespace astcrf
