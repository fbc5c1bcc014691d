#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "grokmlp/checkpoint.hpp"
#include "grokmlp/dataset.hpp"
#include "grokmlp/mlp.hpp"

using namespace grokmlp;

namespace {

// Dense-path loss oracle: two-hot input times a stacked (2p x N) first layer,
// plain loops throughout. Independent of the library's forward/backward.
double dense_loss(const Model& m, const Batch& batch, LossKind kind = LossKind::cross_entropy) {
  const int p = m.p;
  const int n = m.n_hidden;
  double total = 0.0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    std::vector<double> x(2 * static_cast<std::size_t>(p), 0.0);
    x[static_cast<std::size_t>(batch.a[e])] = 1.0;
    x[static_cast<std::size_t>(p + batch.b[e])] = 1.0;
    std::vector<double> hidden(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      double acc = m.bias_h[i];
      for (int j = 0; j < p; ++j) acc += m.w_a(i, j) * x[static_cast<std::size_t>(j)];
      for (int j = 0; j < p; ++j) acc += m.w_b(i, j) * x[static_cast<std::size_t>(p + j)];
      hidden[static_cast<std::size_t>(i)] = acc > 0.0 ? acc : 0.0;
    }
    std::vector<double> logits(static_cast<std::size_t>(p), 0.0);
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < n; ++i) logits[static_cast<std::size_t>(j)] += m.w_out(i, j) * hidden[static_cast<std::size_t>(i)];
    }
    if (kind == LossKind::mse) {
      for (int j = 0; j < p; ++j) {
        const double target = j == batch.label[e] ? 1.0 : 0.0;
        const double r = logits[static_cast<std::size_t>(j)] - target;
        total += r * r;
      }
    } else {
      double mx = logits[0];
      for (double v : logits) mx = std::max(mx, v);
      double sumexp = 0.0;
      for (double v : logits) sumexp += std::exp(v - mx);
      total += std::log(sumexp) + mx - logits[static_cast<std::size_t>(batch.label[e])];
    }
  }
  return total / static_cast<double>(batch.size());
}

Model tiny_model(int p, int n) {
  Model m;
  m.p = p;
  m.n_hidden = n;
  m.w_a = Eigen::MatrixXd::Zero(n, p);
  m.w_b = Eigen::MatrixXd::Zero(n, p);
  m.w_out = Eigen::MatrixXd::Zero(n, p);
  m.bias_h = Eigen::VectorXd::Zero(n);
  return m;
}

}  // namespace

TEST_CASE("init_model is deterministic, bounded and zero-biased") {
  const Model m1 = init_model(97, 256, 11);
  const Model m2 = init_model(97, 256, 11);
  CHECK((m1.w_a - m2.w_a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m1.w_out - m2.w_out).cwiseAbs().maxCoeff() == 0.0);

  const double in_bound = 1.0 / std::sqrt(194.0);
  CHECK(m1.w_a.cwiseAbs().maxCoeff() <= in_bound);
  CHECK(m1.w_b.cwiseAbs().maxCoeff() <= in_bound);
  // with ~25k draws the max should sit right at the bound
  CHECK(m1.w_a.cwiseAbs().maxCoeff() > 0.99 * in_bound);
  const double out_bound = 1.0 / std::sqrt(256.0);
  CHECK(m1.w_out.cwiseAbs().maxCoeff() <= out_bound);
  CHECK(m1.bias_h.cwiseAbs().maxCoeff() == 0.0);

  const Model m3 = init_model(97, 256, 12);
  CHECK((m1.w_a - m3.w_a).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward of the zero model is zero") {
  const Model m = tiny_model(5, 3);
  Batch batch;
  batch.a = {0, 4};
  batch.b = {1, 2};
  batch.label = {1, 1};
  const Eigen::MatrixXd logits = forward(m, batch);
  REQUIRE(logits.rows() == 2);
  REQUIRE(logits.cols() == 5);
  CHECK(logits.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ReLU clips a negative pre-activation") {
  Model m = tiny_model(5, 1);
  m.w_a(0, 2) = 1.0;
  m.w_b(0, 3) = -2.0;
  m.w_out.row(0).setOnes();
  Batch batch;
  batch.a = {2};
  batch.b = {3};
  batch.label = {0};
  // pre-activation 1 - 2 = -1 -> hidden 0 -> logits 0
  CHECK(forward(m, batch).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward rejects out-of-range symbols") {
  const Model m = tiny_model(5, 2);
  Batch batch;
  batch.a = {5};
  batch.b = {0};
  batch.label = {0};
  CHECK_THROWS_AS(forward(m, batch), std::out_of_range);
}

TEST_CASE("structured forward matches the dense two-hot oracle") {
  const Model m = init_model(13, 17, 123);
  const Batch batch = Batch::from(generate_triples(13));
  const Eigen::MatrixXd logits = forward(m, batch);

  double max_diff = 0.0;
  for (std::size_t e = 0; e < batch.size(); ++e) {
    std::vector<double> x(26, 0.0);
    x[static_cast<std::size_t>(batch.a[e])] = 1.0;
    x[static_cast<std::size_t>(13 + batch.b[e])] = 1.0;
    for (int j = 0; j < 13; ++j) {
      double logit = 0.0;
      for (int i = 0; i < 17; ++i) {
        double pre = m.bias_h[i];
        for (int c = 0; c < 13; ++c) pre += m.w_a(i, c) * x[static_cast<std::size_t>(c)];
        for (int c = 0; c < 13; ++c) pre += m.w_b(i, c) * x[static_cast<std::size_t>(13 + c)];
        logit += m.w_out(i, j) * std::max(0.0, pre);
      }
      max_diff = std::max(max_diff, std::abs(logit - logits(static_cast<Eigen::Index>(e), j)));
    }
  }
  CHECK(max_diff <= 1e-12);
}

TEST_CASE("loss of the zero model is ln(p)") {
  const Model m = tiny_model(97, 8);
  const Batch batch = Batch::from(generate_triples(97));
  Gradients g;
  const double loss = loss_and_grads(m, batch, g);
  CHECK(loss == doctest::Approx(std::log(97.0)).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
  for (const LossKind kind : {LossKind::cross_entropy, LossKind::mse}) {
    CAPTURE(to_string(kind));
    Model m = init_model(7, 8, 2024);
    const Batch batch = Batch::from(generate_triples(7));
    Gradients g;
    loss_and_grads(m, batch, g, kind);

    const double h = 1e-5;
    double worst = 0.0;
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = dense_loss(m, batch, kind);
      param = saved - h;
      const double down = dense_loss(m, batch, kind);
      param = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8});
      worst = std::max(worst, rel);
    };
    for (Eigen::Index i = 0; i < 8; ++i) {
      for (Eigen::Index j = 0; j < 7; ++j) {
        probe(m.w_a(i, j), g.w_a(i, j));
        probe(m.w_b(i, j), g.w_b(i, j));
        probe(m.w_out(i, j), g.w_out(i, j));
      }
      probe(m.bias_h(i), g.bias_h(i));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("mse loss of the zero model is exactly 1") {
  // each example contributes sum_j (0 - onehot_j)^2 = 1
  const Model m = tiny_model(97, 8);
  const Batch batch = Batch::from(generate_triples(97));
  Gradients g;
  CHECK(loss_and_grads(m, batch, g, LossKind::mse) == 1.0);
}

TEST_CASE("loss kind names round trip") {
  CHECK(loss_kind_from_string(to_string(LossKind::mse)) == LossKind::mse);
  CHECK(loss_kind_from_string(to_string(LossKind::cross_entropy)) == LossKind::cross_entropy);
  CHECK_THROWS_AS(loss_kind_from_string("hinge"), std::invalid_argument);
}

TEST_CASE("duplicating the batch leaves loss and gradients unchanged") {
  const Model m = init_model(7, 6, 5);
  Batch batch;
  batch.a = {0, 1, 2, 3};
  batch.b = {3, 2, 6, 0};
  batch.label = {3, 3, 1, 3};
  Batch doubled;
  for (int rep = 0; rep < 2; ++rep) {
    doubled.a.insert(doubled.a.end(), batch.a.begin(), batch.a.end());
    doubled.b.insert(doubled.b.end(), batch.b.begin(), batch.b.end());
    doubled.label.insert(doubled.label.end(), batch.label.begin(), batch.label.end());
  }
  Gradients g1, g2;
  const double l1 = loss_and_grads(m, batch, g1);
  const double l2 = loss_and_grads(m, doubled, g2);
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-14));
  CHECK((g1.w_a - g2.w_a).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((g1.w_out - g2.w_out).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((g1.bias_h - g2.bias_h).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("adamw: zero gradients") {
  Model m = init_model(5, 4, 77);
  const Model before = m;
  Gradients zero;
  zero.w_a = Eigen::MatrixXd::Zero(4, 5);
  zero.w_b = Eigen::MatrixXd::Zero(4, 5);
  zero.w_out = Eigen::MatrixXd::Zero(4, 5);
  zero.bias_h = Eigen::VectorXd::Zero(4);
  OptimizerState state = make_optimizer_state(m);

  SUBCASE("no weight decay: parameters unchanged") {
    AdamwConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step(m, zero, state, cfg);
    CHECK((m.w_a - before.w_a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.w_out - before.w_out).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("wd=1, lr=1e-3: every parameter scaled by exactly 1 - lr*wd = 0.999") {
    AdamwConfig cfg;  // defaults are lr 1e-3, wd 1.0
    adamw_step(m, zero, state, cfg);
    const double factor = 1.0 - cfg.learning_rate * cfg.weight_decay;
    CHECK(factor == doctest::Approx(0.999).epsilon(1e-15));
    // materialize the expected product so both sides round identically
    const Eigen::MatrixXd exp_a = factor * before.w_a;
    const Eigen::MatrixXd exp_b = factor * before.w_b;
    const Eigen::MatrixXd exp_out = factor * before.w_out;
    CHECK((m.w_a - exp_a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.w_b - exp_b).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.w_out - exp_out).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("adamw single step matches a hand-computed update") {
  // One live parameter w_a(0,0) = 1 with gradient 2 (as if minimizing x^2).
  Model m = tiny_model(2, 1);
  m.w_a(0, 0) = 1.0;
  Gradients g;
  g.w_a = Eigen::MatrixXd::Zero(1, 2);
  g.w_b = Eigen::MatrixXd::Zero(1, 2);
  g.w_out = Eigen::MatrixXd::Zero(1, 2);
  g.bias_h = Eigen::VectorXd::Zero(1);
  g.w_a(0, 0) = 2.0;

  AdamwConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.weight_decay = 0.1;
  OptimizerState state = make_optimizer_state(m);
  adamw_step(m, g, state, cfg);

  // hand calculation, written out from the update rule
  const double decayed = 1.0 * (1.0 - 1e-3 * 0.1);
  const double m1 = 0.1 * 2.0;            // (1-beta1)*g
  const double v1 = 0.001 * 4.0;          // (1-beta2)*g^2
  const double mhat = m1 / (1.0 - 0.9);   // bias correction, t=1
  const double vhat = v1 / (1.0 - 0.999);
  const double expected = decayed - 1e-3 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(m.w_a(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(m.w_a(0, 1) == 0.0);
  CHECK(state.step == 1);
}

TEST_CASE("evaluate_accuracy ties break to the lowest index") {
  const SplitDataset data = make_dataset(97, 0.3, 0.0, 7);
  const Model zero = tiny_model(97, 4);
  // all logits equal -> prediction 0 -> correct iff label == 0; the
  // stratified val set has 68 triples per class
  const double acc = evaluate_accuracy(zero, data.val);
  CHECK(acc == 68.0 / 6596.0);
}

TEST_CASE("a perfect lookup model scores 1.0") {
  // one neuron per (a, b) pair: fires exactly on its pair
  const int p = 5;
  Model m = tiny_model(p, p * p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      const int i = a * p + b;
      m.w_a(i, a) = 1.0;
      m.w_b(i, b) = 1.0;
      m.bias_h[i] = -1.0;
      m.w_out(i, (a + b) % p) = 1.0;
    }
  }
  const auto triples = generate_triples(p);
  CHECK(evaluate_accuracy(m, triples) == 1.0);
}

TEST_CASE("train mechanics on a tiny run") {
  TrainConfig cfg;
  cfg.p = 7;
  cfg.n_hidden = 16;
  cfg.train_frac = 0.3;
  cfg.alpha = 0.0;
  cfg.master_seed = 3;
  cfg.eval_every = 25;
  cfg.max_steps = 300;
  cfg.plateau_window = 100000;  // never fires here

  const RunRecord r1 = train(cfg);
  const RunRecord r2 = train(cfg);
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].step == r2.history[i].step);
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);  // bit-identical
    CHECK(r1.history[i].train_acc == r2.history[i].train_acc);
    CHECK(r1.history[i].val_acc == r2.history[i].val_acc);
  }
  CHECK(r1.history.front().step == cfg.eval_every);  // the untrained model is not evaluated
  for (std::size_t i = 1; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].step - r1.history[i - 1].step == cfg.eval_every);
  }
  if (r1.saturation) CHECK(r1.saturation->step <= r1.final_model.step);
  CHECK(r1.final_model.step <= cfg.max_steps);
  CHECK((r1.stop_reason == StopReason::hard_limit || r1.stop_reason == StopReason::val_threshold));
}

TEST_CASE("non-finite loss surfaces as TrainingDiverged") {
  TrainConfig cfg;
  cfg.p = 5;
  cfg.n_hidden = 4;
  cfg.train_frac = 0.4;
  cfg.master_seed = 1;
  cfg.eval_every = 1;
  cfg.max_steps = 50;
  cfg.plateau_window = 1000000;
  cfg.optim.learning_rate = 1e200;  // weight products overflow the logits within a step
  cfg.optim.weight_decay = 0.0;
  CHECK_THROWS_AS(train(cfg), TrainingDiverged);
}

TEST_CASE("plateau stop fires at the earliest possible window") {
  TrainConfig cfg;
  cfg.p = 7;
  cfg.n_hidden = 4;
  cfg.train_frac = 0.3;
  cfg.master_seed = 9;
  cfg.eval_every = 25;
  cfg.plateau_window = 100;
  cfg.plateau_min_delta = 2.0;  // unreachable: no improvement ever counts
  cfg.max_steps = 100000;
  const RunRecord r = train(cfg);
  CHECK(r.stop_reason == StopReason::plateau);
  // first eval at 25, first comparable window at plateau_window + eval_every
  CHECK(r.final_model.step == 125);
}

TEST_CASE("checkpoint JSON round trip is exact") {
  const Model m = init_model(11, 9, 31);
  CheckpointInfo info;
  info.kind = "final";
  info.step = 1234;
  info.alpha = 0.25;
  info.master_seed = 31;
  info.stop_reason = "plateau";
  const auto path = std::filesystem::temp_directory_path() / "grokmlp_ckpt_test.json";
  save_checkpoint(m, info, path);

  const LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.model.p == 11);
  CHECK(loaded.model.n_hidden == 9);
  CHECK((loaded.model.w_a - m.w_a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.w_b - m.w_b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.w_out - m.w_out).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.bias_h - m.bias_h).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.info.kind == "final");
  CHECK(loaded.info.step == 1234);
  CHECK(loaded.info.alpha == 0.25);
  CHECK(loaded.info.stop_reason == "plateau");
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader refuses version and schema mismatches") {
  const Model m = init_model(5, 3, 1);
  CheckpointInfo info;
  info.kind = "final";
  const auto path = std::filesystem::temp_directory_path() / "grokmlp_ckpt_bad.json";
  save_checkpoint(m, info, path);

  // bump the version in place
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const std::string needle = "\"format_version\":1";
  const auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, needle.size(), "\"format_version\":2");
  std::ofstream(path) << text;
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("format_version"),
                       std::runtime_error);

  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
}
