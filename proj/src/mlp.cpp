#include "grokmlp/mlp.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "grokmlp/rng.hpp"

namespace grokmlp {

namespace {

// Column n of `hidden` is the post-ReLU hidden vector for batch element n.
// The two-hot input makes the first layer a pair of column gathers.
void forward_hidden(const Model& model, const Batch& batch, Eigen::MatrixXd& hidden) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  hidden.resize(model.n_hidden, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = batch.a[static_cast<std::size_t>(i)];
    const int b = batch.b[static_cast<std::size_t>(i)];
    if (a < 0 || a >= model.p || b < 0 || b >= model.p) {
      throw std::out_of_range("forward: input symbol outside [0, p)");
    }
    hidden.col(i) = model.w_a.col(a) + model.w_b.col(b) + model.bias_h;
  }
  hidden = hidden.cwiseMax(0.0);
}

// Column-wise softmax cross-entropy. On return `probs` holds the softmax and
// the result is the mean loss over the batch.
double softmax_xent(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                    Eigen::MatrixXd& probs) {
  const Eigen::Index n = logits.cols();
  probs.resize(logits.rows(), n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.col(i).maxCoeff();
    probs.col(i) = (logits.col(i).array() - m).exp();
    const double z = probs.col(i).sum();
    probs.col(i) /= z;
    loss += std::log(z) + m - logits(labels[static_cast<std::size_t>(i)], i);
  }
  return loss / static_cast<double>(n);
}

// Summed squared error against the one-hot target, mean over the batch.
// `residual` gets logits - onehot.
double squared_error(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     Eigen::MatrixXd& residual) {
  const Eigen::Index n = logits.cols();
  residual = logits;
  for (Eigen::Index i = 0; i < n; ++i) {
    residual(labels[static_cast<std::size_t>(i)], i) -= 1.0;
  }
  return residual.squaredNorm() / static_cast<double>(n);
}

// Mean loss over the batch; on return `dlogits` holds dL/dlogits.
double loss_and_dlogits(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                        Eigen::MatrixXd& dlogits, LossKind kind) {
  const double inv_n = 1.0 / static_cast<double>(logits.cols());
  if (kind == LossKind::mse) {
    const double loss = squared_error(logits, labels, dlogits);
    dlogits *= 2.0 * inv_n;
    return loss;
  }
  const double loss = softmax_xent(logits, labels, dlogits);
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    dlogits(labels[static_cast<std::size_t>(i)], i) -= 1.0;
  }
  dlogits *= inv_n;
  return loss;
}

struct TrainWorkspace {
  Eigen::MatrixXd hidden;   // N x B
  Eigen::MatrixXd logits;   // p x B
  Eigen::MatrixXd probs;    // p x B, reused as dL/dlogits
  Eigen::MatrixXd dhidden;  // N x B
};

double loss_and_grads_ws(const Model& model, const Batch& batch, Gradients& grads,
                         TrainWorkspace& ws, LossKind kind) {
  if (batch.size() == 0) throw std::invalid_argument("loss_and_grads: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());

  forward_hidden(model, batch, ws.hidden);
  ws.logits.noalias() = model.w_out.transpose() * ws.hidden;
  const double loss = loss_and_dlogits(ws.logits, batch.label, ws.probs, kind);

  grads.w_out.noalias() = ws.hidden * ws.probs.transpose();
  ws.dhidden.noalias() = model.w_out * ws.probs;
  // ReLU subgradient: zero wherever the activation is zero.
  ws.dhidden = (ws.hidden.array() > 0.0).select(ws.dhidden, 0.0);

  grads.w_a.setZero(model.n_hidden, model.p);
  grads.w_b.setZero(model.n_hidden, model.p);
  for (Eigen::Index i = 0; i < n; ++i) {
    grads.w_a.col(batch.a[static_cast<std::size_t>(i)]) += ws.dhidden.col(i);
    grads.w_b.col(batch.b[static_cast<std::size_t>(i)]) += ws.dhidden.col(i);
  }
  grads.bias_h = ws.dhidden.rowwise().sum();
  return loss;
}

template <typename T>
void adamw_update_one(T& param, const T& grad, T& m, T& v, const AdamwConfig& c, double bc1,
                      double bc2) {
  param *= (1.0 - c.learning_rate * c.weight_decay);
  m = c.beta1 * m + (1.0 - c.beta1) * grad;
  v.array() = c.beta2 * v.array() + (1.0 - c.beta2) * grad.array().square();
  param.array() -= c.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
}

struct EvalStats {
  double loss = 0.0;
  double acc = 0.0;
};

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& col) {
  int best = 0;
  for (int j = 1; j < col.size(); ++j) {
    if (col[j] > col[best]) best = j;
  }
  return best;
}

EvalStats eval_batch(const Model& model, const Batch& batch, TrainWorkspace& ws, LossKind kind) {
  forward_hidden(model, batch, ws.hidden);
  ws.logits.noalias() = model.w_out.transpose() * ws.hidden;
  EvalStats stats;
  stats.loss = kind == LossKind::mse ? squared_error(ws.logits, batch.label, ws.probs)
                                     : softmax_xent(ws.logits, batch.label, ws.probs);
  long correct = 0;
  for (Eigen::Index i = 0; i < ws.logits.cols(); ++i) {
    if (argmax_lowest(ws.logits.col(i)) == batch.label[static_cast<std::size_t>(i)]) ++correct;
  }
  stats.acc = static_cast<double>(correct) / static_cast<double>(batch.size());
  return stats;
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::val_threshold: return "val-threshold";
    case StopReason::plateau: return "plateau";
    case StopReason::hard_limit: return "hard-limit";
  }
  return "unknown";
}

std::string to_string(LossKind kind) {
  return kind == LossKind::mse ? "mse" : "cross-entropy";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "cross-entropy") return LossKind::cross_entropy;
  throw std::invalid_argument("unknown loss kind: " + s + " (expected cross-entropy or mse)");
}

StopReason stop_reason_from_string(const std::string& s) {
  if (s == "val-threshold") return StopReason::val_threshold;
  if (s == "plateau") return StopReason::plateau;
  if (s == "hard-limit") return StopReason::hard_limit;
  throw std::invalid_argument("unknown stop reason: " + s);
}

Batch Batch::from(const std::vector<Triple>& triples) {
  Batch batch;
  batch.a.reserve(triples.size());
  batch.b.reserve(triples.size());
  batch.label.reserve(triples.size());
  for (const Triple& t : triples) {
    batch.a.push_back(t.a);
    batch.b.push_back(t.b);
    batch.label.push_back(t.label);
  }
  return batch;
}

TrainingDiverged::TrainingDiverged(long step_, double loss_)
    : std::runtime_error("training diverged at step " + std::to_string(step_) +
                         " (loss = " + std::to_string(loss_) + ")"),
      step(step_),
      loss(loss_) {}

Model init_model(int p, int n_hidden, std::uint64_t seed) {
  if (p < 2) throw std::invalid_argument("init_model: modulus must be >= 2");
  if (n_hidden < 1) throw std::invalid_argument("init_model: need at least one hidden neuron");
  Model model;
  model.p = p;
  model.n_hidden = n_hidden;
  model.w_a.resize(n_hidden, p);
  model.w_b.resize(n_hidden, p);
  model.w_out.resize(n_hidden, p);
  model.bias_h = Eigen::VectorXd::Zero(n_hidden);

  Rng rng(derive_seed(seed, Stream::init));
  const double in_bound = 1.0 / std::sqrt(2.0 * p);      // two-hot input has fan-in 2p
  const double out_bound = 1.0 / std::sqrt(double(n_hidden));
  auto fill = [&rng](Eigen::MatrixXd& m, double bound) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        m(i, j) = rng.uniform(-bound, bound);
      }
    }
  };
  fill(model.w_a, in_bound);
  fill(model.w_b, in_bound);
  fill(model.w_out, out_bound);
  return model;
}

Eigen::MatrixXd forward(const Model& model, const Batch& batch) {
  Eigen::MatrixXd hidden;
  forward_hidden(model, batch, hidden);
  Eigen::MatrixXd logits = (model.w_out.transpose() * hidden).transpose();
  return logits;  // |batch| x p
}

double loss_and_grads(const Model& model, const Batch& batch, Gradients& grads, LossKind kind) {
  TrainWorkspace ws;
  return loss_and_grads_ws(model, batch, grads, ws, kind);
}

OptimizerState make_optimizer_state(const Model& model) {
  OptimizerState state;
  auto zero_like = [&model](Gradients& g) {
    g.w_a = Eigen::MatrixXd::Zero(model.n_hidden, model.p);
    g.w_b = Eigen::MatrixXd::Zero(model.n_hidden, model.p);
    g.w_out = Eigen::MatrixXd::Zero(model.n_hidden, model.p);
    g.bias_h = Eigen::VectorXd::Zero(model.n_hidden);
  };
  zero_like(state.m);
  zero_like(state.v);
  return state;
}

void adamw_step(Model& model, const Gradients& grads, OptimizerState& state,
                const AdamwConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  adamw_update_one(model.w_a, grads.w_a, state.m.w_a, state.v.w_a, config, bc1, bc2);
  adamw_update_one(model.w_b, grads.w_b, state.m.w_b, state.v.w_b, config, bc1, bc2);
  adamw_update_one(model.bias_h, grads.bias_h, state.m.bias_h, state.v.bias_h, config, bc1, bc2);
  adamw_update_one(model.w_out, grads.w_out, state.m.w_out, state.v.w_out, config, bc1, bc2);
}

double evaluate_accuracy(const Model& model, const std::vector<Triple>& triples) {
  if (triples.empty()) throw std::invalid_argument("evaluate_accuracy: empty triple set");
  const Batch batch = Batch::from(triples);
  TrainWorkspace ws;
  forward_hidden(model, batch, ws.hidden);
  ws.logits.noalias() = model.w_out.transpose() * ws.hidden;
  long correct = 0;
  for (Eigen::Index i = 0; i < ws.logits.cols(); ++i) {
    if (argmax_lowest(ws.logits.col(i)) == batch.label[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(triples.size());
}

RunRecord train(const TrainConfig& config, const EvalCallback& on_eval) {
  if (config.eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
  if (config.max_steps < 0) throw std::invalid_argument("train: max_steps must be >= 0");

  const SplitDataset data =
      make_dataset(config.p, config.train_frac, config.alpha, config.master_seed);
  const Batch train_batch = Batch::from(data.train);
  const Batch val_batch = Batch::from(data.val);

  Model model = init_model(config.p, config.n_hidden, config.master_seed);
  OptimizerState opt = make_optimizer_state(model);
  Gradients grads;
  TrainWorkspace ws;

  RunRecord record;
  record.config = config;
  std::vector<double> running_max;  // running max of val accuracy, per eval

  long step = 0;
  for (;;) {
    // First evaluation happens after eval_every updates: the plateau tracker
    // follows the maximum validation accuracy of trained models, so the
    // random-init accuracy never counts as a maximum to beat.
    if (step > 0 && step % config.eval_every == 0) {
      const EvalStats train_stats = eval_batch(model, train_batch, ws, config.loss);
      const EvalStats val_stats = eval_batch(model, val_batch, ws, config.loss);
      if (!std::isfinite(train_stats.loss)) throw TrainingDiverged(step, train_stats.loss);

      const MetricsRow row{step, train_stats.loss, train_stats.acc, val_stats.acc};
      record.history.push_back(row);
      running_max.push_back(running_max.empty() ? row.val_acc
                                                : std::max(running_max.back(), row.val_acc));
      if (on_eval) on_eval(row);

      if (!record.saturation && train_stats.acc >= config.saturation_train_acc) {
        record.saturation = ModelCheckpoint{model, step};
      }
      if (row.val_acc > config.val_acc_stop) {
        record.stop_reason = StopReason::val_threshold;
        break;
      }
      if (step >= config.plateau_window + config.eval_every) {
        // Most recent eval at or before (step - window); the eval at step k*E
        // sits at index k-1. Cadence divides the default window exactly.
        const auto idx =
            static_cast<std::size_t>((step - config.plateau_window) / config.eval_every - 1);
        if (running_max.back() - running_max[idx] < config.plateau_min_delta) {
          record.stop_reason = StopReason::plateau;
          break;
        }
      }
    }
    if (step >= config.max_steps) {
      record.stop_reason = StopReason::hard_limit;
      break;
    }
    const double loss = loss_and_grads_ws(model, train_batch, grads, ws, config.loss);
    if (!std::isfinite(loss)) throw TrainingDiverged(step, loss);
    adamw_step(model, grads, opt, config.optim);
    ++step;
  }

  record.final_model = ModelCheckpoint{std::move(model), step};
  return record;
}

}  // namespace grokmlp
