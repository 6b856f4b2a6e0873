#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "efgraph/embedding.hpp"
#include "efgraph/error.hpp"
#include "test_graphs.hpp"

namespace {

using efg::EmbeddingMatrix;
using efg::ErrorKind;
using efg::Graph;
using efg::NodeId;
using efg::TrainConfig;
using efg::WalkConfig;

WalkConfig short_walks(std::uint64_t length = 20, std::uint64_t iterations = 1) {
  WalkConfig w;
  w.walk_length = length;
  w.iterations = iterations;
  w.seed = 3;
  return w;
}

TrainConfig small_config(std::uint64_t dim = 16, std::uint64_t epochs = 1) {
  TrainConfig c;
  c.dim = dim;
  c.epochs = epochs;
  c.window_size = 2;
  c.seed = 5;
  return c;
}

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const efg::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kParse;
}

/// Two disjoint cliques on nodes [0, size) and [size, 2 size).
Graph two_cliques(std::uint64_t size) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId base : {NodeId{0}, static_cast<NodeId>(size)}) {
    for (NodeId a = 0; a < size; ++a) {
      for (NodeId b = a + 1; b < size; ++b) edges.emplace_back(base + a, base + b);
    }
  }
  return efg::make_graph(2 * size, edges, false);
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

Graph typed_graph() {
  efg::GraphBuilder b(true);
  b.set_node_count(12);
  const auto likes = b.add_edge_type("likes");
  const auto knows = b.add_edge_type("knows");
  for (NodeId v = 0; v < 12; ++v) {
    b.add_edge(v, (v + 1) % 12, 1.0F, likes);
    b.add_edge(v, (v + 5) % 12, 1.0F, knows);
  }
  return std::move(b).build();
}

TEST(TrainConfig, RejectsDegenerateValues) {
  for (const auto& mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& c) { c.dim = 0; }, [](TrainConfig& c) { c.window_size = 0; },
           [](TrainConfig& c) { c.negatives = 0; }, [](TrainConfig& c) { c.epochs = 0; },
           [](TrainConfig& c) { c.learning_rate = 0.0; }}) {
    TrainConfig c;
    mutate(c);
    EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::kConfig);
  }
}

TEST(ScaleFreeNegatives, PathDegreesOneTwoOne) {
  const Graph g = efg::make_graph(3, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}}, false);
  efg::Rng rng(1);
  std::vector<double> counts(3, 0.0);
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) counts[efg::scale_free_negative_sample(g, rng)] += 1.0;
  EXPECT_NEAR(counts[0] / draws, 0.25, 0.005);
  EXPECT_NEAR(counts[1] / draws, 0.5, 0.005);
  EXPECT_NEAR(counts[2] / draws, 0.25, 0.005);
}

TEST(ScaleFreeNegatives, SingleEdgeAlwaysGivesTheSource) {
  const Graph g = efg::make_graph(4, std::vector<std::pair<NodeId, NodeId>>{{2, 3}}, true);
  efg::Rng rng(2);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(efg::scale_free_negative_sample(g, rng), 2U);
}

TEST(ScaleFreeNegatives, EmptyGraphIsAnError) {
  const Graph g = efg::make_graph(3, std::vector<std::pair<NodeId, NodeId>>{}, false);
  efg::Rng rng(2);
  EXPECT_EQ(kind_of([&] { (void)efg::scale_free_negative_sample(g, rng); }), ErrorKind::kConfig);
}

TEST(ScaleFreeNegativesProperty, FrequenciesMatchDegreeShare) {
  efg::Rng rng(3);
  const auto f = efg::testing::random_fixture(40, 150, false, false, rng);
  const Graph g = f.graph();
  std::vector<double> counts(g.node_count(), 0.0);
  const int draws = 1'000'000;
  for (int i = 0; i < draws; ++i) counts[efg::scale_free_negative_sample(g, rng)] += 1.0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const double expected = static_cast<double>(g.degree(v)) / static_cast<double>(g.edge_count());
    EXPECT_NEAR(counts[v] / draws, expected, 0.005) << "node " << v;
  }
}

TEST(SkipGram, ShapeAndFiniteness) {
  const Graph g = efg::testing::karate().graph();
  const auto r = efg::train_skipgram(g, short_walks(), small_config(24));
  EXPECT_EQ(r.embedding.rows(), 34U);
  EXPECT_EQ(r.embedding.dim(), 24U);
  EXPECT_TRUE(r.embedding.all_finite());
  EXPECT_TRUE(r.context.all_finite());
  EXPECT_EQ(r.epoch_loss.size(), 1U);
}

TEST(SkipGram, DeterministicInSingleThreadMode) {
  const Graph g = efg::testing::karate().graph();
  const auto a = efg::train_skipgram(g, short_walks(), small_config(16, 2));
  const auto b = efg::train_skipgram(g, short_walks(), small_config(16, 2));
  EXPECT_EQ(a.embedding, b.embedding);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  auto other = small_config(16, 2);
  other.seed = 6;
  EXPECT_NE(efg::train_skipgram(g, short_walks(), other).embedding, a.embedding);
}

TEST(SkipGram, LossDecreasesOverFiftyEpochsOnKarate) {
  const Graph g = efg::testing::karate().graph();
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto cfg = small_config(16, 50);
    cfg.seed = seed;
    const auto r = efg::train_skipgram(g, short_walks(), cfg);
    ASSERT_EQ(r.epoch_loss.size(), 50U);
    EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front()) << "seed " << seed;
  }
}

TEST(Cbow, ShapeDeterminismAndLossTrend) {
  const Graph g = efg::testing::karate().graph();
  const auto a = efg::train_cbow(g, short_walks(), small_config(16, 50));
  const auto b = efg::train_cbow(g, short_walks(), small_config(16, 50));
  EXPECT_EQ(a.embedding.rows(), 34U);
  EXPECT_EQ(a.embedding.dim(), 16U);
  EXPECT_EQ(a.embedding, b.embedding);
  EXPECT_LT(a.epoch_loss.back(), a.epoch_loss.front());
}

TEST(WalkModels, UpdateRatioEqualsContextSize) {
  const Graph g = efg::testing::karate().graph();
  auto cfg = small_config(8);
  cfg.window_size = 3;
  for (const bool cbow : {false, true}) {
    std::uint64_t full_windows = 0;
    efg::TrainHooks hooks;
    hooks.on_window = [&](const efg::WindowEvent& e) {
      ASSERT_EQ(e.updates, cbow ? 1U : e.contexts.size());
      if (e.contexts.size() == 2 * cfg.window_size) ++full_windows;
    };
    const auto r = cbow ? efg::train_cbow(g, short_walks(), cfg, hooks) : efg::train_skipgram(g, short_walks(), cfg, hooks);
    EXPECT_GT(full_windows, 0U);
    if (cbow) EXPECT_EQ(r.updates, r.windows);
  }
  std::uint64_t skipgram_updates = 0;
  std::uint64_t cbow_updates = 0;
  efg::TrainHooks only_full;
  std::uint64_t* target = &skipgram_updates;
  only_full.on_window = [&](const efg::WindowEvent& e) {
    if (e.contexts.size() == 2 * cfg.window_size) *target += e.updates;
  };
  (void)efg::train_skipgram(g, short_walks(), cfg, only_full);
  target = &cbow_updates;
  (void)efg::train_cbow(g, short_walks(), cfg, only_full);
  EXPECT_EQ(skipgram_updates, 2 * cfg.window_size * cbow_updates);
}

/// Rows whose contents differ between two snapshots.
std::set<NodeId> changed_rows(const EmbeddingMatrix& before, const EmbeddingMatrix& after) {
  std::set<NodeId> out;
  for (NodeId v = 0; v < before.rows(); ++v) {
    const auto a = before.row(v);
    const auto b = after.row(v);
    if (!std::equal(a.begin(), a.end(), b.begin())) out.insert(v);
  }
  return out;
}

TEST(WalkModelsProperty, UpdatesTouchOnlyWindowRows) {
  efg::Rng rng(4);
  const Graph g = efg::testing::connected_fixture(40, 60, rng).graph();
  for (const bool cbow : {false, true}) {
    EmbeddingMatrix last_in;
    EmbeddingMatrix last_out;
    std::uint64_t checked = 0;
    efg::TrainHooks hooks;
    hooks.on_window = [&](const efg::WindowEvent& e) {
      if (last_in.rows() != 0) {
        std::set<NodeId> allowed(e.contexts.begin(), e.contexts.end());
        allowed.insert(e.negatives.begin(), e.negatives.end());
        allowed.insert(e.center);
        for (const NodeId v : changed_rows(last_in, *e.input)) ASSERT_TRUE(allowed.count(v)) << "input row " << v;
        for (const NodeId v : changed_rows(last_out, *e.output)) ASSERT_TRUE(allowed.count(v)) << "output row " << v;
        ++checked;
      }
      last_in = *e.input;
      last_out = *e.output;
    };
    if (cbow) {
      (void)efg::train_cbow(g, short_walks(10), small_config(8), hooks);
    } else {
      (void)efg::train_skipgram(g, short_walks(10), small_config(8), hooks);
    }
    EXPECT_GT(checked, 100U);
  }
}

TEST(WalkModels, DivergenceNamesTheEpoch) {
  const Graph g = efg::testing::karate().graph();
  auto cfg = small_config(8);
  cfg.learning_rate = 1e38;
  try {
    (void)efg::train_skipgram(g, short_walks(), cfg);
    FAIL() << "expected divergence";
  } catch (const efg::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}

TEST(WalkModels, ParallelLossWithinTenPercent) {
  const Graph g = efg::testing::karate().graph();
  auto cfg = small_config(16, 10);
  const double serial = efg::train_skipgram(g, short_walks(40, 4), cfg).epoch_loss.back();
  cfg.threads = 4;
  const auto parallel = efg::train_skipgram(g, short_walks(40, 4), cfg);
  EXPECT_TRUE(parallel.embedding.all_finite());
  EXPECT_NEAR(parallel.epoch_loss.back(), serial, 0.1 * serial);
}

TEST(Line, ShapesForBothOrders) {
  const Graph g = efg::testing::karate().graph();
  const auto first = efg::train_line(g, efg::LineOrder::kFirst, small_config(12));
  const auto second = efg::train_line(g, efg::LineOrder::kSecond, small_config(12));
  EXPECT_EQ(first.embedding.rows(), 34U);
  EXPECT_EQ(first.embedding.dim(), 12U);
  EXPECT_EQ(first.context.rows(), 0U);
  EXPECT_EQ(second.embedding.rows(), 34U);
  EXPECT_EQ(second.context.rows(), 34U);
}

TEST(Line, DeterministicInSingleThreadMode) {
  const Graph g = efg::testing::karate().graph();
  for (const auto order : {efg::LineOrder::kFirst, efg::LineOrder::kSecond}) {
    EXPECT_EQ(efg::train_line(g, order, small_config(12, 3)).embedding,
              efg::train_line(g, order, small_config(12, 3)).embedding);
  }
}

TEST(Line, SeparatesTwoCliques) {
  const std::uint64_t size = 10;
  const Graph g = two_cliques(size);
  for (const auto order : {efg::LineOrder::kFirst, efg::LineOrder::kSecond}) {
    const auto r = efg::train_line(g, order, small_config(16, 200));
    double within = 0.0;
    double across = 0.0;
    std::uint64_t nw = 0;
    std::uint64_t na = 0;
    for (NodeId a = 0; a < 2 * size; ++a) {
      for (NodeId b = a + 1; b < 2 * size; ++b) {
        const double c = cosine(r.embedding.row(a), r.embedding.row(b));
        if ((a < size) == (b < size)) {
          within += c;
          ++nw;
        } else {
          across += c;
          ++na;
        }
      }
    }
    EXPECT_GT(within / nw, across / na) << "order " << static_cast<int>(order);
  }
}

TEST(Line, NeedsEdges) {
  const Graph g = efg::make_graph(3, std::vector<std::pair<NodeId, NodeId>>{}, false);
  EXPECT_EQ(kind_of([&] { (void)efg::train_line(g, efg::LineOrder::kFirst, small_config()); }), ErrorKind::kConfig);
}

TEST(TransE, AllZeroVectorsGiveTheMargin) {
  const std::vector<double> zero(8, 0.0);
  EXPECT_EQ(efg::transe_loss(zero, zero, zero, zero, zero, 1.0), 1.0);
  EXPECT_EQ(efg::transe_loss(zero, zero, zero, zero, zero, 2.5), 2.5);
}

TEST(TransE, SatisfiedMarginGivesZeroLossAndGradient) {
  const std::vector<double> h = {1.0, 2.0};
  const std::vector<double> r = {0.5, -1.0};
  const std::vector<double> t = {1.5, 1.0};
  const std::vector<double> hc = {4.0, 4.0};
  const std::vector<double> tc = {0.0, 0.0};
  efg::TransEGradient grad;
  EXPECT_EQ(efg::transe_loss_gradient(h, r, t, hc, tc, 1.0, grad), 0.0);
  for (const auto* g : {&grad.h, &grad.r, &grad.t, &grad.h_corrupt, &grad.t_corrupt}) {
    ASSERT_EQ(g->size(), 2U);
    for (const double x : *g) EXPECT_EQ(x, 0.0);
  }
}

TEST(TransE, ShapeMismatchIsAnError) {
  const std::vector<double> a(3, 0.0);
  const std::vector<double> b(4, 0.0);
  EXPECT_EQ(kind_of([&] { (void)efg::transe_loss(a, a, b, a, a, 1.0); }), ErrorKind::kShape);
}

TEST(TransEProperty, GradientMatchesCentralDifferences) {
  efg::Rng rng(9);
  const double eps = 1e-5;
  int active = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> args(5, std::vector<double>(8));
    for (auto& v : args) {
      for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
    }
    const double margin = 4.0;
    efg::TransEGradient grad;
    const double loss = efg::transe_loss_gradient(args[0], args[1], args[2], args[3], args[4], margin, grad);
    if (loss <= 0.0) continue;
    ++active;
    const std::vector<double>* analytic[] = {&grad.h, &grad.r, &grad.t, &grad.h_corrupt, &grad.t_corrupt};
    for (int k = 0; k < 5; ++k) {
      for (std::size_t i = 0; i < 8; ++i) {
        auto plus = args;
        auto minus = args;
        plus[k][i] += eps;
        minus[k][i] -= eps;
        const double fp = efg::transe_loss(plus[0], plus[1], plus[2], plus[3], plus[4], margin);
        const double fm = efg::transe_loss(minus[0], minus[1], minus[2], minus[3], minus[4], margin);
        const double numeric = (fp - fm) / (2.0 * eps);
        const double a = (*analytic[k])[i];
        const double scale = std::max({std::abs(a), std::abs(numeric), 1e-8});
        ASSERT_LT(std::abs(a - numeric) / scale, 1e-4) << "trial " << trial << " arg " << k << " dim " << i;
      }
    }
  }
  EXPECT_GT(active, 50);
}

TEST(TransE, TrainsEntityAndRelationMatrices) {
  const Graph g = typed_graph();
  const auto a = efg::train_transe(g, small_config(8, 20));
  EXPECT_EQ(a.embedding.rows(), 12U);
  EXPECT_EQ(a.context.rows(), 2U);
  EXPECT_EQ(a.context.dim(), 8U);
  EXPECT_TRUE(a.embedding.all_finite());
  EXPECT_LT(a.epoch_loss.back(), a.epoch_loss.front());
  EXPECT_EQ(efg::train_transe(g, small_config(8, 20)).embedding, a.embedding);
}

TEST(TransE, RequiresEdgeTypes) {
  const Graph g = efg::testing::karate().graph();
  EXPECT_EQ(kind_of([&] { (void)efg::train_transe(g, small_config()); }), ErrorKind::kConfig);
}

TEST(EmbeddingMethod, NamesRoundTrip) {
  for (const auto m : {efg::EmbeddingMethod::kSkipGram, efg::EmbeddingMethod::kCbow, efg::EmbeddingMethod::kLineFirst,
                       efg::EmbeddingMethod::kLineSecond, efg::EmbeddingMethod::kTransE}) {
    EXPECT_EQ(efg::parse_embedding_method(efg::to_string(m)), m);
  }
  EXPECT_EQ(kind_of([] { (void)efg::parse_embedding_method("glove"); }), ErrorKind::kConfig);
}

TEST(EmbeddingIo, TextRoundTripWithNames) {
  EmbeddingMatrix m(3, 2);
  const float values[] = {1.5F, -2.0F, 0.0F, 3.25F, 1e-3F, -7.0F};
  std::copy(std::begin(values), std::end(values), m.data());
  const std::vector<std::string> names = {"a", "b", "c"};
  std::stringstream buffer;
  efg::write_embedding_text(buffer, m, names);
  EXPECT_EQ(buffer.str().substr(0, 4), "3 2\n");
  std::vector<std::string> back_names;
  const auto back = efg::read_embedding_text(buffer, &back_names);
  EXPECT_EQ(back, m);
  EXPECT_EQ(back_names, names);
}

TEST(EmbeddingIo, BinaryRoundTrip) {
  const Graph g = efg::testing::karate().graph();
  const auto m = efg::train_skipgram(g, short_walks(), small_config(8)).embedding;
  std::stringstream buffer;
  efg::write_embedding_binary(buffer, m, efg::node_names(g));
  std::vector<std::string> names;
  EXPECT_EQ(efg::read_embedding_binary(buffer, &names), m);
  EXPECT_EQ(names.size(), 34U);
  std::stringstream text;
  efg::write_embedding_text(text, m);
  EXPECT_EQ(efg::read_embedding_text(text), m);
}

}  // namespace
