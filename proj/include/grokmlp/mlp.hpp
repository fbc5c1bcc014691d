#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grokmlp/dataset.hpp"

namespace grokmlp {

// One-hidden-layer ReLU MLP over a two-hot (a, b) input. Row i of each
// matrix is neuron i's weight vector over the p input (or output) symbols.
// There is no output bias; all arithmetic is double precision.
struct Model {
  Eigen::MatrixXd w_a;     // N x p
  Eigen::MatrixXd w_b;     // N x p
  Eigen::VectorXd bias_h;  // N
  Eigen::MatrixXd w_out;   // N x p, (i, j) = hidden i -> logit j
  int p = 0;
  int n_hidden = 0;
};

struct Gradients {
  Eigen::MatrixXd w_a;
  Eigen::MatrixXd w_b;
  Eigen::VectorXd bias_h;
  Eigen::MatrixXd w_out;
};

struct AdamwConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class LossKind { cross_entropy, mse };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& s);

struct OptimizerState {
  Gradients m;  // first moments
  Gradients v;  // second moments
  long step = 0;
};

struct TrainConfig {
  int p = 97;
  int n_hidden = 256;
  double train_frac = 0.3;
  double alpha = 0.0;
  std::uint64_t master_seed = 1;
  AdamwConfig optim;
  LossKind loss = LossKind::cross_entropy;
  long eval_every = 100;
  long plateau_window = 50000;     // steps without a val-accuracy improvement
  double plateau_min_delta = 1e-4;
  double val_acc_stop = 0.999;     // stop once val accuracy rises past this
  long max_steps = 500000;
  double saturation_train_acc = 0.99;
};

enum class StopReason { val_threshold, plateau, hard_limit };

std::string to_string(StopReason reason);
StopReason stop_reason_from_string(const std::string& s);

struct MetricsRow {
  long step = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct ModelCheckpoint {
  Model model;
  long step = 0;
};

struct RunRecord {
  TrainConfig config;
  std::vector<MetricsRow> history;
  std::optional<ModelCheckpoint> saturation;  // first eval with train acc >= 0.99
  ModelCheckpoint final_model;
  StopReason stop_reason = StopReason::hard_limit;
};

// Struct-of-arrays view of a triple list, as consumed by the forward pass.
struct Batch {
  std::vector<int> a;
  std::vector<int> b;
  std::vector<int> label;

  static Batch from(const std::vector<Triple>& triples);
  std::size_t size() const { return a.size(); }
};

// Thrown when the training loss stops being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(long step, double loss);
  long step;
  double loss;
};

// Weights uniform in +/- 1/sqrt(fan_in); the two-hot input counts as fan-in
// 2p for w_a/w_b and N for w_out. Hidden bias starts at zero.
Model init_model(int p, int n_hidden, std::uint64_t seed);

// Logits, one row per batch element.
Eigen::MatrixXd forward(const Model& model, const Batch& batch);

// Mean loss and its gradients (manual backprop); softmax cross-entropy by
// default, or summed squared error against the one-hot target. Gradient
// buffers are resized as needed.
double loss_and_grads(const Model& model, const Batch& batch, Gradients& grads,
                      LossKind kind = LossKind::cross_entropy);

OptimizerState make_optimizer_state(const Model& model);

// Decoupled weight decay applied before the bias-corrected Adam update.
void adamw_step(Model& model, const Gradients& grads, OptimizerState& state,
                const AdamwConfig& config);

// Fraction of triples whose argmax logit equals the label; argmax ties break
// to the lowest index.
double evaluate_accuracy(const Model& model, const std::vector<Triple>& triples);

using EvalCallback = std::function<void(const MetricsRow&)>;

// Full-batch training with evaluation every `eval_every` steps and the
// stopping rules from TrainConfig. Deterministic given the config.
RunRecord train(const TrainConfig& config, const EvalCallback& on_eval = nullptr);

}  // namespace grokmlp
