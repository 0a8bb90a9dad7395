#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "catwalk/autodiff.hpp"
#include "catwalk/layers.hpp"
#include "gradcheck.hpp"
#include "reference.hpp"

using namespace catwalk;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = scale * rng.normal();
  return m;
}

// Reduces any r x c value to a scalar with fixed random weights.
Var reduce(Tape& tape, Var x, std::uint64_t seed = 99) {
  const auto& v = tape.value(x);
  Rng rng(seed);
  Var w = tape.constant(random_matrix(v.cols, 1, rng));
  return tape.matmul(tape.mean_rows(x), w);
}

void expect_gradients(ParameterSet& ps, const std::function<Var(Tape&)>& build) {
  const auto r = test::gradient_check(ps, build);
  EXPECT_LE(r.worst, 1e-6) << r.worst_name;
}

}  // namespace

TEST(Autodiff, ElementwiseAndLinearOps) {
  Rng rng(1);
  ParameterSet ps;
  const auto a = ps.add("a", random_matrix(3, 4, rng));
  const auto b = ps.add("b", random_matrix(4, 2, rng));
  const auto c = ps.add("c", random_matrix(3, 2, rng));
  const auto row = ps.add("row", random_matrix(1, 2, rng));
  expect_gradients(ps, [&](Tape& t) {
    Var x = t.matmul(t.param(a), t.param(b));
    x = t.add(x, t.param(c));
    x = t.add_row(x, t.param(row));
    x = t.gelu(t.scale(x, 0.7));
    return reduce(t, x);
  });
}

TEST(Autodiff, NormalizationAndSoftmax) {
  Rng rng(2);
  ParameterSet ps;
  const auto x = ps.add("x", random_matrix(4, 5, rng));
  const auto g = ps.add("gain", random_matrix(1, 5, rng));
  const auto s = ps.add("shift", random_matrix(1, 5, rng));
  expect_gradients(ps, [&](Tape& t) {
    Var y = t.layer_norm(t.param(x), t.param(g), t.param(s));
    // Row means of a column softmax are constant, so mix rows unevenly first.
    Rng mix(7);
    return reduce(t, t.matmul(t.constant(random_matrix(2, 4, mix)), t.softmax_columns(y)));
  });
}

TEST(Autodiff, StructuralOps) {
  Rng rng(3);
  ParameterSet ps;
  const auto r0 = ps.add("r0", random_matrix(1, 3, rng));
  const auto r1 = ps.add("r1", random_matrix(1, 3, rng));
  const auto side = ps.add("side", random_matrix(4, 2, rng));
  expect_gradients(ps, [&](Tape& t) {
    const Var rows[] = {t.param(r0), t.param(r1), t.param(r0)};
    Var stacked = t.stack_rows(rows, 4);
    Var joined = t.concat_columns(stacked, t.param(side));
    const Var pair[] = {t.param(r0), t.param(r1)};
    Var avg = t.average(pair);
    return t.add(reduce(t, joined), reduce(t, avg, 5));
  });
}

TEST(Autodiff, DropoutWithFixedMask) {
  Rng rng(4);
  ParameterSet ps;
  const auto x = ps.add("x", random_matrix(3, 6, rng));
  expect_gradients(ps, [&](Tape& t) {
    Rng mask(7);
    return reduce(t, t.dropout(t.gelu(t.param(x)), 0.3, mask));
  });
}

TEST(Autodiff, TimeEncoding) {
  Rng rng(5);
  ParameterSet ps;
  const auto wl = ps.add("wl", random_matrix(1, 1, rng));
  const auto bl = ps.add("bl", random_matrix(1, 1, rng));
  const auto wp = ps.add("wp", random_matrix(1, 4, rng));
  const std::vector<double> times{0.0, 0.5, 2.25};
  expect_gradients(ps, [&](Tape& t) {
    return reduce(t, t.time_encode(times, 4, t.param(wl), t.param(bl), t.param(wp)));
  });
}

TEST(Autodiff, Losses) {
  Rng rng(6);
  ParameterSet ps;
  const auto z = ps.add("z", random_matrix(1, 1, rng, 3.0));
  const auto zs = ps.add("zs", random_matrix(1, 4, rng));
  for (double label : {0.0, 1.0}) {
    expect_gradients(ps, [&](Tape& t) { return t.bce_with_logits(t.param(z), label); });
  }
  expect_gradients(ps, [&](Tape& t) { return t.softmax_cross_entropy(t.param(zs), 2); });
}

TEST(Autodiff, LossValues) {
  ParameterSet ps;
  Tape t(ps);
  EXPECT_NEAR(t.value(t.bce_with_logits(t.constant(Matrix(1, 1, 0.0)), 1.0)).data[0],
              std::log(2.0), 1e-15);
  EXPECT_NEAR(t.value(t.bce_with_logits(t.constant(Matrix(1, 1, 800.0)), 0.0)).data[0], 800.0,
              1e-9);
  EXPECT_NEAR(t.value(t.softmax_cross_entropy(t.constant(Matrix(1, 3, 1.0)), 0)).data[0],
              std::log(3.0), 1e-15);
}

TEST(Autodiff, ZeroLossGivesZeroGradients) {
  Rng rng(7);
  ParameterSet ps;
  const auto x = ps.add("x", random_matrix(2, 3, rng));
  Gradients g(ps);
  Tape t(ps);
  t.backward(t.scale(reduce(t, t.gelu(t.param(x))), 0.0), g);
  for (double v : g[0].data) EXPECT_EQ(v, 0.0);
}

TEST(Autodiff, ShapeErrors) {
  ParameterSet ps;
  Tape t(ps);
  Var a = t.constant(Matrix(2, 3));
  Var b = t.constant(Matrix(2, 3));
  EXPECT_THROW(t.matmul(a, b), std::invalid_argument);
  EXPECT_THROW(t.add(a, t.constant(Matrix(3, 2))), std::invalid_argument);
  EXPECT_THROW(t.bce_with_logits(a, 1.0), std::invalid_argument);
  EXPECT_THROW(t.param(0), std::out_of_range);
}

TEST(Autodiff, GradientContainerOps) {
  ParameterSet ps;
  ps.add("a", Matrix(1, 2, 1.0));
  Gradients g(ps), h(ps);
  g[0].data = {1.0, 2.0};
  h[0].data = {3.0, -1.0};
  g.add(h, 2.0);
  EXPECT_EQ(g[0].data, (std::vector<double>{7.0, 0.0}));
  g.scale(0.5);
  EXPECT_DOUBLE_EQ(g.squared_norm(), 12.25);
  EXPECT_TRUE(g.all_finite());
  g[0].data[1] = NAN;
  EXPECT_FALSE(g.all_finite());
}

TEST(SetMixer, GoldenAgainstIndependentEvaluation) {
  ParameterSet ps;
  Rng rng(0);
  const auto layer = SetMixerLayer::create(ps, "m", 3, 4, 5, rng);
  for (std::size_t p = 0; p < ps.size(); ++p) {
    auto& v = ps[p].value.data;
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = 0.5 * std::sin(1.3 * static_cast<double>(k) + 0.7 * static_cast<double>(p) + 0.1);
    }
  }
  Tape t(ps);
  Var in = t.constant(Matrix(2, 3, {0.5, -1.0, 2.0, 1.5, 0.25, -0.75}));
  const auto& out = t.value(layer.forward(t, in, {}));
  const double golden[] = {0.47168152518650386, 0.9613611780113173, 0.5511981166896894,
                           -0.13529312136687172};
  ASSERT_EQ(out.cols, 4u);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out.data[j], golden[j], 1e-12);
}

TEST(SetMixer, MatchesLoopReferenceAndIsPermutationInvariant) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng.below(8);
    const std::size_t in = 1 + rng.below(6);
    const std::size_t width = 1 + rng.below(10);
    ParameterSet ps;
    const auto layer = SetMixerLayer::create(ps, "s", in, width, 7, rng);
    Matrix x = random_matrix(d, in, rng);
    Tape t(ps);
    const auto base = t.value(layer.forward(t, t.constant(x), {}));
    ASSERT_EQ(base.cols, width);
    const auto expect = ref::setmixer(ps, "s", ref::from(x));
    for (std::size_t j = 0; j < width; ++j) EXPECT_NEAR(base.data[j], expect[j], 1e-12);
    for (int rep = 0; rep < 10; ++rep) {
      Matrix y = x;
      for (std::size_t i = d; i > 1; --i) {
        const std::size_t k = rng.below(i);
        for (std::size_t c = 0; c < in; ++c) std::swap(y(i - 1, c), y(k, c));
      }
      const auto& out = t.value(layer.forward(t, t.constant(y), {}));
      for (std::size_t j = 0; j < width; ++j) EXPECT_NEAR(out.data[j], base.data[j], 1e-12);
    }
  }
}

TEST(SetMixer, SoftmaxColumnsSumToOne) {
  Rng rng(9);
  ParameterSet ps;
  Tape t(ps);
  const auto& s = t.value(t.softmax_columns(t.constant(random_matrix(5, 4, rng, 30.0))));
  for (std::size_t j = 0; j < 4; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) total += s(i, j);
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
}

TEST(TimeEncoder, ZeroLinearityAndRange) {
  ParameterSet ps;
  Rng rng(10);
  const auto enc = TimeEncoderLayer::create(ps, "time", 6, rng);
  Tape t(ps);
  const std::vector<double> times{0.0, 3.5, -12.0, 1e4};
  const auto& v = t.value(enc.forward(t, times, 4));
  const double bl = ps[enc.b_linear].value.data[0];
  const double wl = ps[enc.w_linear].value.data[0];
  EXPECT_EQ(v(0, 0), bl);
  for (std::size_t k = 1; k < 6; ++k) EXPECT_EQ(v(0, k), 1.0);
  EXPECT_NEAR(v(1, 0) - v(0, 0), wl * 3.5, 1e-12);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t k = 1; k < 6; ++k) {
      EXPECT_LE(std::abs(v(r, k)), 1.0);
    }
  }
}

TEST(WalkMixer, OrderSensitiveAndDegenerateInputs) {
  ParameterSet ps;
  Rng rng(0);
  const auto mixer = WalkMixerLayer::create(ps, "w", 3, 6, 8, 8, rng);
  Rng data(11);
  Matrix e = random_matrix(3, 6, data);
  Matrix swapped = e;
  for (std::size_t c = 0; c < 6; ++c) std::swap(swapped(0, c), swapped(2, c));
  Tape t(ps);
  const auto& a = t.value(mixer.forward(t, t.constant(e), {}));
  const auto& b = t.value(mixer.forward(t, t.constant(swapped), {}));
  double gap = 0.0;
  for (std::size_t j = 0; j < 6; ++j) gap = std::max(gap, std::abs(a.data[j] - b.data[j]));
  EXPECT_GT(gap, 1e-6);
  const auto expect = ref::walk_mixer(ps, "w", ref::from(e));
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(a.data[j], expect[j], 1e-12);

  const auto& z = t.value(mixer.forward(t, t.zeros(3, 6), {}));
  for (double v : z.data) EXPECT_TRUE(std::isfinite(v));

  ParameterSet single;
  const auto one = WalkMixerLayer::create(single, "w", 1, 4, 3, 3, rng);
  Tape t1(single);
  const auto& o = t1.value(one.forward(t1, t1.constant(random_matrix(1, 4, data)), {}));
  EXPECT_EQ(o.cols, 4u);
  for (double v : o.data) EXPECT_TRUE(std::isfinite(v));
}

TEST(Layers, GradientsThroughEveryLayer) {
  Rng rng(12);
  ParameterSet ps;
  const auto sm = SetMixerLayer::create(ps, "s", 3, 5, 4, rng);
  const auto wm = WalkMixerLayer::create(ps, "w", 2, 5, 3, 4, rng);
  const auto hd = HeadLayer::create(ps, "h", 5, 4, 1, rng);
  const Matrix x = random_matrix(4, 3, rng);
  expect_gradients(ps, [&](Tape& t) {
    Var pooled = sm.forward(t, t.constant(x), {});
    const Var rows[] = {pooled, t.scale(pooled, -0.5)};
    Var walk = wm.forward(t, t.stack_rows(rows, 2), {});
    return t.bce_with_logits(hd.forward(t, walk, {}), 1.0);
  });
}
