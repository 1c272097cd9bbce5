#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "psyling/neural/adamw.hpp"
#include "psyling/neural/checkpoint.hpp"
#include "psyling/neural/grad_check.hpp"
#include "psyling/neural/loss.hpp"
#include "psyling/neural/lstm.hpp"

using namespace psyling;
using namespace psyling::neural;
using M = Mat<double>;

namespace {

Seq<double> random_seq(std::size_t T, Eigen::Index B, Eigen::Index D, Rng& rng) {
  Seq<double> x(T, M(B, D));
  for (auto& m : x) init_uniform(m, 1.0, rng);
  return x;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST(Lstm, ZeroParametersGiveZeroState) {
  BiLstmStack<double> stack("s", 3, 4, 2, 0.0);
  Rng rng(1);
  auto x = random_seq(5, 2, 3, rng);
  M last = stack.forward(x, {5, 3}, nullptr);
  EXPECT_EQ(last.rows(), 2);
  EXPECT_EQ(last.cols(), 8);
  EXPECT_EQ(last.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lstm, SingleStepMatchesHandEvaluatedCell) {
  LstmDirection<double> dir("d", 1, 1, false);
  dir.Wx().value << 0.5, -0.3, 0.8, 1.2;  // i f g o
  dir.Wh().value << 0.1, 0.2, 0.3, 0.4;
  dir.b().value << 0.05, 1.0, -0.1, 0.2;
  const double x = 0.7;
  Seq<double> in(1, M::Constant(1, 1, x)), out;
  M h = dir.forward(in, {1}, out);
  const double i = sig(0.5 * x + 0.05), g = std::tanh(0.8 * x - 0.1), o = sig(1.2 * x + 0.2);
  const double c = i * g;  // f·c_prev vanishes with c_prev = 0
  EXPECT_NEAR(h(0, 0), o * std::tanh(c), 1e-12);
  EXPECT_NEAR(out[0](0, 0), h(0, 0), 1e-12);
}

TEST(Lstm, PaddingNeverChangesLastHidden) {
  Rng rng(7);
  BiLstmStack<double> stack("s", 4, 5, 3, 0.2);
  stack.init(rng);
  auto x3 = random_seq(3, 1, 4, rng);
  Seq<double> x10 = x3;
  for (int t = 3; t < 10; ++t) x10.push_back(M::Zero(1, 4));
  M a = stack.forward(x3, {3}, nullptr);
  M b = stack.forward(x10, {3}, nullptr);
  EXPECT_TRUE((a.array() == b.array()).all());
  // garbage in padded steps is ignored as well
  init_uniform(x10[7], 5.0, rng);
  M c = stack.forward(x10, {3}, nullptr);
  EXPECT_TRUE((a.array() == c.array()).all());
}

TEST(Lstm, BackwardDirectionSeesWholeValidPrefix) {
  Rng rng(3);
  BiLstmLayer<double> layer("l", 2, 3);
  layer.init(rng);
  auto x = random_seq(4, 1, 2, rng);
  Seq<double> out;
  M last = layer.forward(x, {4}, out);
  // backward final state is the backward output at t = 0; forward final at t = 3
  EXPECT_TRUE((last.rightCols(3).array() == out[0].rightCols(3).array()).all());
  EXPECT_TRUE((last.leftCols(3).array() == out[3].leftCols(3).array()).all());
}

TEST(Lstm, ForgetBiasStartsAtOne) {
  Rng rng(3);
  LstmDirection<double> d("d", 2, 3, false);
  d.init(rng);
  EXPECT_EQ(d.b().value, (M(1, 12) << 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0).finished());
  EXPECT_LE(d.Wx().value.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(3.0));
}

TEST(Lstm, InputWidthIsChecked) {
  BiLstmStack<double> stack("s", 3, 2, 1, 0.0);
  Seq<double> x(2, M::Zero(1, 4));
  EXPECT_THROW(stack.forward(x, {2}, nullptr), ShapeMismatch);
}

TEST(Ffn, IdentityWeightsPassNonnegativeInput) {
  DenseLayer<double> d("d", 3, 3, true, 0.0);
  d.linear().weight().value = M::Identity(3, 3);
  M x = (M(2, 3) << 0, 1, 2, 3.5, 0.25, 7).finished();
  EXPECT_EQ(d.forward(x, nullptr), x);
}

TEST(Ffn, DropoutIsIdentityInEvaluation) {
  Rng rng(5);
  DenseLayer<double> d("d", 4, 6, true, 0.2);
  d.init(rng);
  M x = M::Ones(3, 4);
  EXPECT_EQ(d.forward(x, nullptr), d.forward(x, nullptr));
}

TEST(Ffn, InvertedDropoutPreservesMean) {
  Rng rng(12345);
  double total = 0, survivors = 0;
  const Eigen::Index chunk = 1'000'000;
  const int chunks = 10;
  for (int k = 0; k < chunks; ++k) {
    M y = apply_dropout<double>(M::Ones(chunk, 1), 0.999, &rng);
    total += y.sum();
    survivors += static_cast<double>((y.array() > 0).count());
  }
  const double n = static_cast<double>(chunk) * chunks;
  EXPECT_NEAR(total / n, 1.0, 0.05);
  EXPECT_NEAR(survivors / n, 0.001, 0.0001);
}

TEST(Loss, BceExamples) {
  EXPECT_NEAR(bce_loss<double>(M::Constant(2, 3, 0.5), (M(2, 3) << 1, 0, 0, 0, 1, 1).finished()),
              std::log(2.0), 1e-15);
  M s = (M(1, 2) << 0.9, 0.1).finished(), y = (M(1, 2) << 1, 0).finished();
  EXPECT_NEAR(bce_loss<double>(s, y), -(std::log(0.9) + std::log(0.9)) / 2, 1e-15);
  EXPECT_NEAR(bce_loss<double>(s, y), 0.10536051565782628, 1e-12);
  M perfect = (M(1, 2) << 1 - kBceEpsilon, kBceEpsilon).finished();
  double l = bce_loss<double>(perfect, y);
  EXPECT_GT(l, 0.0);
  EXPECT_LT(l, 1e-6);
  EXPECT_GE(bce_loss<double>(M::Constant(1, 2, 0.0), y), 0.0);
}

TEST(Loss, FusedLogitGradientIsPMinusYOverN) {
  M z = (M(2, 2) << 0.3, -1.0, 2.0, 0.0).finished(), y = (M(2, 2) << 1, 0, 0, 1).finished(), d;
  sigmoid_bce_loss(z, y, &d);
  M p = sigmoid<double>(z);
  EXPECT_TRUE(d.isApprox((p - y) / 4.0, 1e-14));
}

TEST(AdamW, ZeroGradientZeroDecayIsFixedPoint) {
  Param<double> p("p", 2, 2);
  p.value << 1, -2, 3, 4;
  M before = p.value;
  AdamW<double> opt({&p}, {.lr = 1e-3, .weight_decay = 0.0});
  for (int k = 0; k < 3; ++k) opt.step();
  EXPECT_EQ(p.value, before);
}

TEST(AdamW, ZeroGradientDecoupledDecay) {
  Param<double> p("p", 1, 3);
  p.value << 1, -2, 0.5;
  M before = p.value;
  AdamW<double> opt({&p}, {.lr = 2e-5, .weight_decay = 1e-4});
  opt.step();
  EXPECT_TRUE(p.value.isApprox(before * (1 - 2e-5 * 1e-4), 1e-15));
}

TEST(AdamW, ThreeStepsMatchHandUnrolledRecurrence) {
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 0.1, g = 0.3;
  Param<double> p("p", 1, 1);
  p.value(0, 0) = 2.0;
  AdamW<double> opt({&p}, {lr, b1, b2, eps, wd});
  double w = 2.0, m = 0, v = 0;
  for (int t = 1; t <= 3; ++t) {
    p.grad(0, 0) = g;
    opt.step();
    w -= lr * wd * w;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    w -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
    EXPECT_NEAR(p.value(0, 0), w, 1e-12) << "step " << t;
  }
}

TEST(AdamW, ClipGradNorm) {
  Param<double> a("a", 1, 2), b("b", 1, 1);
  a.grad << 3, 0;
  b.grad << 4;
  EXPECT_DOUBLE_EQ(clip_grad_norm<double>({&a, &b}, 1.0), 5.0);
  EXPECT_NEAR(std::sqrt(a.grad.squaredNorm() + b.grad.squaredNorm()), 1.0, 1e-12);
  EXPECT_NEAR(a.grad(0, 0), 0.6, 1e-12);
}

TEST(GradCheck, LinearSquaredLossIsExact) {
  Rng rng(2);
  Linear<double> lin("lin", 3, 2);
  lin.init(rng);
  M x(4, 3), y(4, 2);
  init_uniform(x, 1.0, rng);
  init_uniform(y, 1.0, rng);
  ParamList<double> ps;
  lin.params(ps);
  auto loss = [&] { return 0.5 * (lin.forward(x) - y).squaredNorm(); };
  auto backward = [&] {
    typename Linear<double>::Cache c;
    M out = lin.forward(x, &c);
    lin.backward(c, out - y);
  };
  EXPECT_LT(grad_check(ps, loss, backward).max_rel_error, 1e-9);
}

namespace {

/// BiLSTM stack + linear head + sigmoid BCE on a fixed batch; dropout masks
/// come from a fresh Rng per evaluation so loss() is a pure function.
struct TinyModel {
  BiLstmStack<double> stack;
  Linear<double> head;
  Seq<double> x;
  Lengths len;
  M y;
  double grad_scale = 1.0;

  TinyModel(std::size_t layers, double dropout, Lengths lengths)
      : stack("s", 4, 3, layers, dropout), head("h", 6, 2), len(std::move(lengths)) {
    Rng rng(99);
    stack.init(rng);
    head.init(rng);
    x = random_seq(3, static_cast<Eigen::Index>(len.size()), 4, rng);
    y = M::Zero(static_cast<Eigen::Index>(len.size()), 2);
    for (Eigen::Index r = 0; r < y.rows(); ++r) y(r, r % 2) = 1;
  }

  double loss() {
    Rng drop(5);
    return sigmoid_bce_loss(head.forward(stack.forward(x, len, &drop)), y);
  }

  void backward() {
    Rng drop(5);
    typename BiLstmStack<double>::Cache sc;
    typename Linear<double>::Cache hc;
    M logits = head.forward(stack.forward(x, len, &drop, &sc), &hc);
    M d;
    sigmoid_bce_loss(logits, y, &d);
    stack.backward(sc, head.backward(hc, d));
    ParamList<double> ps = params();
    for (auto* p : ps) p->grad *= grad_scale;
  }

  ParamList<double> params() {
    ParamList<double> ps;
    stack.params(ps);
    head.params(ps);
    return ps;
  }
};

}  // namespace

TEST(GradCheck, SingleLayerBiLstmSigmoidBce) {
  TinyModel m(1, 0.0, {3, 3});
  auto r = grad_check(m.params(), [&] { return m.loss(); }, [&] { m.backward(); });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_GT(r.checked, 100u);
}

TEST(GradCheck, StackedMaskedWithDropout) {
  TinyModel m(3, 0.3, {3, 1, 2});
  auto r = grad_check(m.params(), [&] { return m.loss(); }, [&] { m.backward(); });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(GradCheck, DetectsCorruptedGradient) {
  TinyModel m(1, 0.0, {3, 3});
  m.grad_scale = 1.01;
  auto r = grad_check(m.params(), [&] { return m.loss(); }, [&] { m.backward(); });
  EXPECT_GT(r.max_rel_error, 1e-3);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  Checkpoint ck;
  ck.arch_id = 2;
  ck.hyper = {{"hidden", 16}, {"layers", 4}};
  ck.meta = {{"seed", 42}, {"best_epoch", 7}};
  M w = (M(2, 3) << 1, 2, 3, 4, 5, 6.5).finished();
  ck.blobs.push_back(to_blob("w", w));
  std::ostringstream a;
  write_checkpoint(a, ck);
  std::istringstream in(a.str());
  Checkpoint back = read_checkpoint(in);
  EXPECT_EQ(back, ck);
  std::ostringstream b;
  write_checkpoint(b, back);
  EXPECT_EQ(a.str(), b.str());
  M w2(2, 3);
  from_blob(*back.find("w"), w2);
  EXPECT_EQ(w2, w);
  M wrong(3, 2);
  EXPECT_THROW(from_blob(*back.find("w"), wrong), ArchitectureMismatch);
}

TEST(Checkpoint, RejectsBadMagicAndTruncation) {
  Checkpoint ck;
  ck.blobs.push_back(to_blob<double>("w", M::Ones(2, 2)));
  std::ostringstream a;
  write_checkpoint(a, ck);
  std::string bytes = a.str();
  std::istringstream trunc(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_checkpoint(trunc), MalformedCheckpoint);
  bytes[0] = 'Q';
  std::istringstream bad(bytes);
  EXPECT_THROW(read_checkpoint(bad), MalformedCheckpoint);
  EXPECT_THROW(load_checkpoint("/nonexistent/x.ckpt"), MissingCheckpoint);
}
