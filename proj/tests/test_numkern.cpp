#include <gtest/gtest.h>

#include <cmath>

#include "c3/errors.hpp"
#include "c3/numkern.hpp"

using namespace c3;

namespace {

EncoderShape small_shape() { return {4, {5, 3, 6}, 2}; }

Matrix random_matrix(Index r, Index c, CounterRng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

EncoderParams random_params(const EncoderShape& s, CounterRng& rng) {
  EncoderParams p = EncoderParams::glorot(s, rng);
  for (auto& t : p.tensors())
    for (double& v : t.data) v += 0.1 * rng.normal();  // non-zero biases too
  return p;
}

// Straight-line forward pass written with scalar loops.
std::pair<std::vector<double>, std::vector<double>> loop_forward(const EncoderParams& p,
                                                                 const std::vector<double>& x) {
  auto dense = [](const DenseLayer& l, const std::vector<double>& in, bool act) {
    std::vector<double> out(static_cast<std::size_t>(l.weight.rows()));
    for (Index o = 0; o < l.weight.rows(); ++o) {
      double s = l.bias(o);
      for (Index i = 0; i < l.weight.cols(); ++i) s += l.weight(o, i) * in[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = act ? (s > 0 ? s : std::exp(s) - 1.0) : s;
    }
    return out;
  };
  auto h = dense(p.hidden[0], x, true);
  h = dense(p.hidden[1], h, true);
  h = dense(p.hidden[2], h, true);
  auto mean = dense(p.mean_head, h, false);
  auto lv = dense(p.logvar_head, h, false);
  for (double& v : lv) v = std::min(8.0, std::max(-8.0, v));
  return {mean, lv};
}

}  // namespace

TEST(EncodeForward, ZeroWeightsGiveMeanHeadBias) {
  EncoderParams p = EncoderParams::zeros(small_shape());
  p.mean_head.bias << 0.25, -1.5;
  CounterRng rng(1);
  const Matrix x = random_matrix(3, 4, rng);
  const auto out = encode_forward(p, x);
  for (Index i = 0; i < 3; ++i) {
    EXPECT_EQ(out.mean(i, 0), 0.25);
    EXPECT_EQ(out.mean(i, 1), -1.5);
  }
}

TEST(EncodeForward, ZeroInputWithZeroBiasesGivesZeroMean) {
  CounterRng rng(2);
  EncoderParams p = EncoderParams::glorot(small_shape(), rng);
  const auto out = encode_forward(p, Matrix::Zero(2, 4));
  EXPECT_EQ(out.mean.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EncodeForward, MatchesLoopImplementation) {
  CounterRng rng(7);
  const EncoderShape s{60, {64, 32, 128}, 64};
  const EncoderParams p = random_params(s, rng);
  const Matrix x = random_matrix(5, 60, rng);
  const auto out = encode_forward(p, x);
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(x.row(i).data(), x.row(i).data() + x.cols());
    const auto [mean, lv] = loop_forward(p, row);
    for (Index j = 0; j < 64; ++j) {
      EXPECT_LT(std::abs(out.mean(i, j) - mean[static_cast<std::size_t>(j)]), 1e-12);
      EXPECT_LT(std::abs(out.logvar(i, j) - lv[static_cast<std::size_t>(j)]), 1e-12);
    }
  }
}

TEST(EncodeForward, BitwiseDeterministic) {
  CounterRng rng(3);
  const EncoderParams p = random_params(small_shape(), rng);
  const Matrix x = random_matrix(4, 4, rng);
  const auto a = encode_forward(p, x);
  const auto b = encode_forward(p, x);
  EXPECT_TRUE((a.mean.array() == b.mean.array()).all());
  EXPECT_TRUE((a.logvar.array() == b.logvar.array()).all());
}

TEST(EncodeForward, LogvarIsClamped) {
  EncoderParams p = EncoderParams::zeros(small_shape());
  p.logvar_head.bias << 50.0, -50.0;
  const auto out = encode_forward(p, Matrix::Ones(2, 4));
  EXPECT_EQ(out.logvar(0, 0), kLogvarMax);
  EXPECT_EQ(out.logvar(1, 1), kLogvarMin);
}

TEST(EncodeForward, RejectsBadShapesAndValues) {
  const EncoderParams p = EncoderParams::zeros(small_shape());
  EXPECT_THROW(encode_forward(p, Matrix::Zero(2, 5)), DimensionError);
  Matrix x = Matrix::Zero(2, 4);
  x(0, 0) = std::nan("");
  EXPECT_THROW(encode_forward(p, x), NumericError);
}

TEST(EncodeBackward, ZeroUpstreamGivesZeroGradients) {
  CounterRng rng(4);
  const EncoderParams p = random_params(small_shape(), rng);
  const auto out = encode_forward(p, random_matrix(3, 4, rng));
  const auto g = encode_backward(p, out.cache, Matrix::Zero(3, 2), Matrix::Zero(3, 2));
  for (const auto& t : std::as_const(g).tensors())
    for (double v : t.data) EXPECT_EQ(v, 0.0);
}

TEST(EncodeBackward, StaleCacheIsRejected) {
  CounterRng rng(5);
  EncoderParams p = random_params(small_shape(), rng);
  const auto out = encode_forward(p, random_matrix(3, 4, rng));
  ++p.version;
  EXPECT_THROW(encode_backward(p, out.cache, Matrix::Zero(3, 2), Matrix::Zero(3, 2)), ContractError);
  const EncoderParams other = p;
  const auto fresh = encode_forward(p, random_matrix(3, 4, rng));
  EXPECT_THROW(encode_backward(other, fresh.cache, Matrix::Zero(3, 2), Matrix::Zero(3, 2)), ContractError);
}

// Loss = sum(A .* mean) + sum(B .* logvar) for fixed random A, B.
TEST(EncodeBackward, MatchesFiniteDifferencesOverSeeds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterRng rng(seed);
    EncoderParams p = random_params(small_shape(), rng);
    ASSERT_LE(p.num_params(), 200u);
    const Matrix x = random_matrix(3, 4, rng);
    const Matrix a = random_matrix(3, 2, rng);
    const Matrix b = random_matrix(3, 2, rng);
    auto loss = [&] {
      const auto o = encode_forward(p, x);
      return (a.array() * o.mean.array()).sum() + (b.array() * o.logvar.array()).sum();
    };
    const auto out = encode_forward(p, x);
    const EncoderGrads g = encode_backward(p, out.cache, a, b);
    auto params = p.tensors();
    const auto grads = g.tensors();
    for (std::size_t t = 0; t < params.size(); ++t) {
      const auto r = check_gradients(loss, params[t].data, grads[t].data);
      EXPECT_LT(r.max_rel_error, 1e-5) << "seed " << seed << " tensor " << params[t].name;
    }
  }
}

// With positive weights, biases and inputs every ELU runs in its identity
// branch, so the network is linear and the input-layer gradient is a
// closed-form product.
TEST(EncodeBackward, LinearRegimeMatchesClosedForm) {
  const EncoderShape s{3, {4, 2, 3}, 2};
  CounterRng rng(11);
  EncoderParams p = EncoderParams::zeros(s);
  for (auto& t : p.tensors())
    for (double& v : t.data) v = 0.1 + rng.uniform();
  Matrix x(2, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = 0.5 + rng.uniform();
  const Matrix gm = random_matrix(2, 2, rng);
  const auto out = encode_forward(p, x);
  const auto g = encode_backward(p, out.cache, gm, Matrix::Zero(2, 2));

  // d/dW0 = (W1^T W2^T Wm^T gm^T)^T-chain: delta0 = gm Wm W2 W1, grad W0 = delta0^T x.
  const Matrix delta0 = gm * p.mean_head.weight * p.hidden[2].weight * p.hidden[1].weight;
  const Matrix expect_w0 = delta0.transpose() * x;
  EXPECT_LT((g.hidden[0].weight - expect_w0).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix h2 = out.cache.act[2];
  EXPECT_LT((g.mean_head.weight - gm.transpose() * h2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Adam, ZeroGradientAndNoDecayLeavesParams) {
  std::vector<double> w{1.0, -2.0};
  std::vector<double> g{0.0, 0.0};
  AdamState st;
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  std::vector<NamedTensor> params{{"w", w}};
  std::vector<NamedConstTensor> grads{{"w", g}};
  for (int i = 0; i < 3; ++i) adam_step(st, params, grads, cfg);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(w[1], -2.0);
  EXPECT_EQ(st.step, 3u);
}

TEST(Adam, ConvergesOnQuadratic) {
  std::vector<double> w{0.0};
  std::vector<double> g{0.0};
  AdamState st;
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  std::vector<NamedTensor> params{{"w", w}};
  std::vector<NamedConstTensor> grads{{"w", g}};
  for (int i = 0; i < 500; ++i) {
    g[0] = 2.0 * (w[0] - 3.0);
    adam_step(st, params, grads, cfg);
  }
  EXPECT_LT(std::abs(w[0] - 3.0), 1e-3);
}

TEST(Adam, SingleStepMatchesHandFormula) {
  const double w0 = 0.7, grad = -0.3;
  std::vector<double> w{w0};
  std::vector<double> g{grad};
  AdamState st;
  const AdamConfig cfg;  // lr 0.1, beta1 0.8, beta2 0.999, eps 1e-8, wd 1e-4
  std::vector<NamedTensor> params{{"w", w}};
  std::vector<NamedConstTensor> grads{{"w", g}};
  adam_step(st, params, grads, cfg);
  const double m = (1 - 0.8) * grad, v = (1 - 0.999) * grad * grad;
  const double mhat = m / (1 - 0.8), vhat = v / (1 - 0.999);
  const double expected = w0 - 0.1 * (mhat / (std::sqrt(vhat) + 1e-8) + 1e-4 * w0);
  EXPECT_NEAR(w[0], expected, 1e-12);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  std::vector<double> w{1.0, 2.0};
  std::vector<double> g{0.0, std::numeric_limits<double>::infinity()};
  AdamState st;
  std::vector<NamedTensor> params{{"hidden1.bias", w}};
  std::vector<NamedConstTensor> grads{{"hidden1.bias", g}};
  try {
    adam_step(st, params, grads, AdamConfig{}, "theta");
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("theta.hidden1.bias[1]"), std::string::npos) << e.what();
  }
  EXPECT_EQ(w[0], 1.0);
  EXPECT_EQ(st.step, 0u);
}

TEST(Adam, EncoderOverloadBumpsVersion) {
  CounterRng rng(9);
  EncoderParams p = random_params(small_shape(), rng);
  const EncoderGrads g = EncoderParams::zeros(small_shape());
  AdamState st;
  const auto before = p.version;
  adam_step(st, p, g, AdamConfig{});
  EXPECT_EQ(p.version, before + 1);
}
