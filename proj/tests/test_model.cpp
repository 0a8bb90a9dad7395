#include <gtest/gtest.h>

#include <sstream>

#include "catwalk/model.hpp"
#include "catwalk/synthetic.hpp"
#include "gradcheck.hpp"
#include "reference.hpp"

using namespace catwalk;

namespace {

struct Fixture {
  TemporalHypergraph g = synthetic_stream(400, 21);
  SamplerConfig sc;
  ScoreTable scores;
  std::unique_ptr<SetWalkSampler> sampler;

  Fixture() {
    sc.walks_per_node = 3;
    sc.alpha = 0.02;
    scores = ScoreTable::compute(g, sc);
    sampler = std::make_unique<SetWalkSampler>(g, scores, sc);
  }

  ModelConfig config() const {
    ModelConfig c;
    c.k_max = g.max_edge_size();
    c.d_max = g.max_edge_size();
    c.walk_length = sc.walk_length;
    c.walks_per_node = sc.walks_per_node;
    c.hidden = 6;
    c.time_dim = 4;
    c.head_hidden = 5;
    c.time_scale = 7.0;
    return c;
  }

  std::vector<WalkSet> walks(EventId e) const {
    return sampler->sample_walksets(g.nodes(e), g.time(e), e);
  }
};

}  // namespace

TEST(Model, MatchesLoopReference) {
  Fixture f;
  for (int variant = 0; variant < 4; ++variant) {
    auto c = f.config();
    c.identity_pool = variant == 1 ? PoolKind::mean : PoolKind::setmixer;
    c.final_pool = variant == 2 ? PoolKind::mean : PoolKind::setmixer;
    c.time_encoding = variant != 3;
    c.init_seed = static_cast<std::uint64_t>(variant);
    CatWalkModel model(c);
    for (EventId e = 300; e < 400; e += 9) {
      const auto sets = f.walks(e);
      EXPECT_NEAR(model.score(sets, f.g.time(e)), ref::logit(model, sets, f.g.time(e)), 1e-10);
    }
  }
}

TEST(Model, SeedOrderDoesNotChangeLogit) {
  Fixture f;
  CatWalkModel model(f.config());
  for (EventId e = 320; e < 400; e += 11) {
    auto sets = f.walks(e);
    const double base = model.score(sets, f.g.time(e));
    std::reverse(sets.begin(), sets.end());
    EXPECT_NEAR(model.score(sets, f.g.time(e)), base, 1e-12);
    std::rotate(sets.begin(), sets.begin() + 1, sets.end());
    EXPECT_NEAR(model.score(sets, f.g.time(e)), base, 1e-12);
  }
}

TEST(Model, EmptyWalksetsGiveFiniteLogitAndNoEncoderGradient) {
  Fixture f;
  CatWalkModel model(f.config());
  const std::vector<WalkSet> empty{{0, {SetWalk{}, SetWalk{}}}, {1, {SetWalk{}, SetWalk{}}}};
  Tape t(model.params());
  Var logit = model.hyperedge_logit(t, empty, 5.0, {});
  EXPECT_TRUE(std::isfinite(t.value(logit).data[0]));
  EXPECT_NEAR(t.value(logit).data[0], ref::logit(model, empty, 5.0), 1e-10);
  Gradients g(model.params());
  t.backward(t.bce_with_logits(logit, 1.0), g);
  for (std::size_t p = 0; p < model.params().size(); ++p) {
    const auto& name = model.params()[p].name;
    const bool encoder = name.rfind("psi", 0) == 0 || name.rfind("time", 0) == 0 ||
                         name.rfind("walk_mixer", 0) == 0;
    if (!encoder) continue;
    for (double v : g[p].data) EXPECT_EQ(v, 0.0) << name;
  }
}

TEST(Model, EndToEndGradients) {
  Fixture f;
  auto c = f.config();
  c.hidden = 4;
  c.head_hidden = 3;
  c.time_dim = 3;
  CatWalkModel model(c);
  const std::vector<EventId> batch{310, 347, 391};
  std::vector<std::vector<WalkSet>> sets;
  for (EventId e : batch) sets.push_back(f.walks(e));
  const auto r = test::gradient_check(model.params(), [&](Tape& t) {
    Rng rng(3);
    ForwardContext ctx{0.2, &rng};
    Var total = t.bce_with_logits(model.hyperedge_logit(t, sets[0], f.g.time(batch[0]), ctx), 1.0);
    for (std::size_t i = 1; i < batch.size(); ++i) {
      Var l = t.bce_with_logits(model.hyperedge_logit(t, sets[i], f.g.time(batch[i]), ctx),
                                static_cast<double>(i % 2));
      total = t.add(total, l);
    }
    return total;
  });
  EXPECT_LE(r.worst, 1e-4) << r.worst_name;
}

TEST(Model, ConfigValidation) {
  ModelConfig c;
  EXPECT_THROW(CatWalkModel{c}, std::invalid_argument);
  c.k_max = c.d_max = 3;
  c.time_dim = 1;
  EXPECT_THROW(CatWalkModel{c}, std::invalid_argument);
  EXPECT_THROW(parse_pool_kind("sum"), std::invalid_argument);
}

TEST(Model, RejectsOversizedInputs) {
  Fixture f;
  auto c = f.config();
  c.d_max = 2;
  CatWalkModel model(c);
  bool threw = false;
  for (EventId e = 300; e < 400 && !threw; ++e) {
    try {
      model.score(f.walks(e), f.g.time(e));
    } catch (const std::invalid_argument&) {
      threw = true;
    }
  }
  EXPECT_TRUE(threw);
}

TEST(Checkpoint, RoundTrip) {
  Fixture f;
  auto c = f.config();
  c.init_seed = 42;
  CatWalkModel model(c);
  std::stringstream buf;
  write_checkpoint(model, "{\"note\":1}", buf);
  const auto loaded = read_checkpoint(buf);
  EXPECT_EQ(loaded.metadata, "{\"note\":1}");
  EXPECT_EQ(loaded.model->config(), model.config());
  EXPECT_EQ(dump_parameters(loaded.model->params()), dump_parameters(model.params()));
  const auto sets = f.walks(350);
  EXPECT_EQ(loaded.model->score(sets, f.g.time(350)), model.score(sets, f.g.time(350)));
}

TEST(Checkpoint, RejectsCorruptInput) {
  Fixture f;
  CatWalkModel model(f.config());
  std::stringstream buf;
  write_checkpoint(model, "", buf);
  const std::string bytes = buf.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 9));
  EXPECT_THROW(read_checkpoint(cut), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream magic(bad);
  EXPECT_THROW(read_checkpoint(magic), FormatError);
  EXPECT_THROW(load_checkpoint("/nonexistent/ckpt"), std::runtime_error);
}

TEST(Model, InitIsSeeded) {
  Fixture f;
  auto c = f.config();
  CatWalkModel a(c), b(c);
  EXPECT_EQ(dump_parameters(a.params()), dump_parameters(b.params()));
  c.init_seed = 1;
  CatWalkModel d(c);
  EXPECT_NE(dump_parameters(a.params()), dump_parameters(d.params()));
}
