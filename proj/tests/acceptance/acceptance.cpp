#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "allocation_counter.hpp"
#include "efgraph/elias_fano.hpp"
#include "efgraph/embedding.hpp"
#include "efgraph/evaluation.hpp"
#include "efgraph/graph.hpp"
#include "efgraph/loader.hpp"
#include "efgraph/pipeline.hpp"
#include "efgraph/walks.hpp"
#include "test_graphs.hpp"

namespace {

using efg::EliasFano;
using efg::Graph;
using efg::NodeId;
using efg::Rng;
using efg::WalkConfig;
using efg::Walker;
using efg::WalkerKind;
using efg::testing::Fixture;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, fmt, args...);
  return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Smallest c with n * 2^c >= u.
std::uint64_t ceil_log2_ratio_oracle(std::uint64_t n, std::uint64_t u) {
  std::uint64_t c = 0;
  while ((static_cast<__uint128_t>(n) << c) < u) ++c;
  return c;
}

std::vector<std::uint64_t> sorted_values(std::uint64_t n, std::uint64_t u, Rng& rng) {
  std::vector<std::uint64_t> values(n);
  for (auto& v : values) v = rng.below(u + 1);
  std::sort(values.begin(), values.end());
  return values;
}

Outcome ef_bit_budget() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst_index = 0.0;
  for (int s = 0; s < 200; ++s) {
    const std::uint64_t n = s % 2 == 0 ? 1 + rng.below(100000)
                                       : static_cast<std::uint64_t>(std::exp(rng.uniform() * std::log(1e5)));
    const std::uint64_t u = n + rng.below(1000000000 - n + 1);
    const auto values = sorted_values(n, u, rng);
    const auto ef = EliasFano::build(values, u, 1024);
    const auto bits = ef.bit_size();
    const std::uint64_t budget = 2 * n + n * ceil_log2_ratio_oracle(n, u);
    if (bits.payload() > budget) {
      return {false, format("n=%llu u=%llu payload %llu > %llu", static_cast<unsigned long long>(n),
                            static_cast<unsigned long long>(u), static_cast<unsigned long long>(bits.payload()),
                            static_cast<unsigned long long>(budget))};
    }
    if (bits.index * 32 > bits.high) {
      return {false, format("n=%llu index %llu bits over 3.125%% of %llu", static_cast<unsigned long long>(n),
                            static_cast<unsigned long long>(bits.index), static_cast<unsigned long long>(bits.high))};
    }
    if (bits.high > 0) worst_index = std::max(worst_index, static_cast<double>(bits.index) / bits.high);
  }
  const double elapsed = seconds_since(start);
  return {elapsed < 60.0, format("200 sequences, worst index overhead %.3f%%, %.1fs", 100.0 * worst_index, elapsed)};
}

Outcome rank_select_oracles() {
  Rng rng(202);
  std::uint64_t queries = 0;
  std::uint64_t mismatches = 0;
  const std::uint64_t quanta[] = {2, 8, 64, 1024};
  for (int s = 0; s < 40; ++s) {
    const std::uint64_t n = s % 5 == 0 ? 10000 + rng.below(10000) : 1 + rng.below(3000);
    const std::uint64_t u = s % 3 == 0 ? n / 2 + rng.below(n) : n + rng.below(1ULL << (10 + s % 30));
    const auto values = sorted_values(n, u, rng);
    const auto ef = EliasFano::build(values, u, quanta[s % 4]);
    for (int k = 0; k < 2500; ++k, ++queries) {
      if (k % 2 == 0) {
        const std::uint64_t m = k % 4 == 0 ? values[rng.below(n)] + rng.below(2) : rng.below(u + 2);
        std::uint64_t expected = 0;
        for (const std::uint64_t v : values) expected += v < m ? 1 : 0;
        if (ef.rank(m) != expected) ++mismatches;
      } else {
        const std::uint64_t i = rng.below(n);
        if (ef.select(i) != values[i]) ++mismatches;
      }
    }
  }
  return {mismatches == 0, format("%llu queries, %llu mismatches", static_cast<unsigned long long>(queries),
                                  static_cast<unsigned long long>(mismatches))};
}

/// The fifty small graphs shared by the walk criteria.
const std::vector<Fixture>& small_graphs() {
  static const std::vector<Fixture> graphs = [] {
    Rng rng(303);
    std::vector<Fixture> out;
    for (int i = 0; i < 50; ++i) {
      const std::uint64_t n = 3 + rng.below(28);
      const std::uint64_t m = n + rng.below(3 * n);
      out.push_back(efg::testing::random_fixture(n, m, i % 4 == 3, i % 2 == 1, rng, i % 5 == 0));
    }
    return out;
  }();
  return graphs;
}

constexpr double kParameterGrid[] = {0.25, 1.0, 4.0};

Outcome second_order_correctness() {
  double worst_analytic = 0.0;
  double worst_empirical = 0.0;
  std::uint64_t distributions = 0;
  Rng rng(404);
  std::vector<double> probs;
  int graph_index = 0;
  for (const Fixture& f : small_graphs()) {
    const Graph g = f.graph();
    for (const double p : kParameterGrid) {
      for (const double q : kParameterGrid) {
        WalkConfig cfg;
        cfg.return_p = p;
        cfg.in_out_q = q;
        const Walker walker(g, cfg);
        for (NodeId t = 0; t < f.node_count; ++t) {
          for (const NodeId v : f.adjacency[t]) {
            if (f.adjacency[v].empty()) continue;
            walker.transition_probabilities(t, v, probs);
            const auto oracle = efg::testing::node2vec_oracle(f, t, v, p, q);
            for (std::size_t i = 0; i < oracle.size(); ++i) {
              worst_analytic = std::max(worst_analytic, std::abs(probs[i] - oracle[i]));
            }
            ++distributions;
          }
        }
      }
    }

    std::vector<std::pair<NodeId, NodeId>> steps;
    for (NodeId t = 0; t < f.node_count; ++t) {
      for (const NodeId v : f.adjacency[t]) {
        if (!f.adjacency[v].empty()) steps.emplace_back(t, v);
      }
    }
    if (steps.empty()) continue;
    const auto [t, v] = steps[rng.below(steps.size())];
    WalkConfig cfg;
    cfg.return_p = kParameterGrid[graph_index % 3];
    cfg.in_out_q = kParameterGrid[(graph_index / 3) % 3];
    ++graph_index;
    const Walker walker(g, cfg);
    const auto oracle = efg::testing::node2vec_oracle(f, t, v, cfg.return_p, cfg.in_out_q);
    std::map<NodeId, double> counts;
    efg::WalkScratch scratch;
    constexpr std::uint64_t kDraws = 1000000;
    for (std::uint64_t i = 0; i < kDraws; ++i) counts[walker.step(t, v, rng, scratch)] += 1.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      const double freq = counts[f.adjacency[v][i]] / static_cast<double>(kDraws);
      worst_empirical = std::max(worst_empirical, std::abs(freq - oracle[i]));
    }
  }
  return {worst_analytic <= 1e-12 && worst_empirical <= 0.01,
          format("%llu distributions, analytic max diff %.2e, empirical L-inf %.4f",
                 static_cast<unsigned long long>(distributions), worst_analytic, worst_empirical)};
}

Outcome dispatch_equivalence() {
  std::set<WalkerKind> kinds;
  std::uint64_t compared = 0;
  std::uint64_t mismatches = 0;
  std::vector<double> general;
  std::vector<double> special;
  for (const Fixture& f : small_graphs()) {
    const Graph g = f.graph();
    for (const double p : kParameterGrid) {
      for (const double q : kParameterGrid) {
        WalkConfig cfg;
        cfg.return_p = p;
        cfg.in_out_q = q;
        const auto kind = efg::select_walker_kind(g.weighted(), p, q);
        kinds.insert(kind);
        const Walker walker(g, cfg, kind);
        for (NodeId t = 0; t < f.node_count; ++t) {
          for (const NodeId v : f.adjacency[t]) {
            if (f.adjacency[v].empty()) continue;
            efg::general_transition_probabilities(g, t, v, p, q, general);
            walker.transition_probabilities(t, v, special);
            ++compared;
            if (special != general) ++mismatches;
          }
        }
      }
    }
  }
  return {kinds.size() == 8 && mismatches == 0,
          format("%zu walker kinds, %llu distributions, %llu mismatches", kinds.size(),
                 static_cast<unsigned long long>(compared), static_cast<unsigned long long>(mismatches))};
}

std::uint64_t walk_digest(const Graph& g, const WalkConfig& cfg) {
  efg::WalkStream stream(g, cfg);
  efg::WalkBatch batch;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  while (stream.next(batch)) {
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      for (const NodeId v : batch.row(r)) h = (h ^ v) * 0x100000001b3ULL;
      h = (h ^ 0xffffffffULL) * 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t max_degree(const Graph& g) {
  std::uint64_t best = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) best = std::max(best, g.degree(v));
  return best;
}

double mean_metric(const std::vector<efg::MetricSummary>& rows, std::string_view name) {
  for (const auto& row : rows) {
    if (row.name == name) return row.mean;
  }
  return std::nan("");
}

Outcome approximation_fidelity() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Graph> graphs;
  for (const Fixture& f : small_graphs()) graphs.push_back(f.graph());
  graphs.push_back(efg::testing::karate().graph());
  Rng rng(505);
  graphs.push_back(efg::testing::barabasi_albert(2000, 3, rng).graph());
  std::uint64_t identical = 0;
  for (const Graph& g : graphs) {
    WalkConfig cfg;
    cfg.return_p = 4.0;
    cfg.in_out_q = 0.25;
    cfg.walk_length = 20;
    cfg.iterations = 2;
    cfg.seed = 5;
    const std::uint64_t exact = walk_digest(g, cfg);
    cfg.degree_threshold = std::max<std::uint64_t>(2, max_degree(g));
    if (walk_digest(g, cfg) == exact) ++identical;
  }

  const Graph ba = efg::testing::barabasi_albert(10000, 4, rng).graph();
  std::vector<std::uint64_t> degrees(ba.node_count());
  for (NodeId v = 0; v < ba.node_count(); ++v) degrees[v] = ba.degree(v);
  std::nth_element(degrees.begin(), degrees.begin() + degrees.size() / 2, degrees.end());
  const std::uint64_t median = std::max<std::uint64_t>(2, degrees[degrees.size() / 2]);

  efg::PipelineConfig cfg;
  cfg.embed.method = efg::EmbeddingMethod::kSkipGram;
  cfg.embed.train.dim = 32;
  cfg.embed.train.window_size = 3;
  cfg.embed.train.epochs = 1;
  cfg.embed.walks.walk_length = 20;
  cfg.embed.walks.iterations = 1;
  cfg.embed.walks.return_p = 1.0;
  cfg.embed.walks.in_out_q = 0.5;
  cfg.classifier.epochs = 20;
  cfg.classifier.optimizer.learning_rate = 0.03;
  cfg.holdouts.repeats = 10;
  cfg.baseline = false;
  const auto exact = efg::run_edge_prediction_pipeline(ba, cfg);
  cfg.embed.walks.degree_threshold = median;
  const auto approx = efg::run_edge_prediction_pipeline(ba, cfg);
  const double a = mean_metric(exact.summary, "auroc");
  const double b = mean_metric(approx.summary, "auroc");
  const bool pass = identical == graphs.size() && std::abs(a - b) < 0.02;
  return {pass, format("%llu/%zu graphs identical at d_T = max degree; d_T = %llu: exact %.4f vs approx %.4f, %.1fs",
                       static_cast<unsigned long long>(identical), graphs.size(),
                       static_cast<unsigned long long>(median), a, b, seconds_since(start))};
}

/// Seconds per step for `walks` walks from leaves of the star.
double seconds_per_step(const Graph& g, const WalkConfig& cfg, std::uint64_t walks) {
  const Walker walker(g, cfg);
  efg::WalkScratch scratch;
  std::vector<NodeId> out(cfg.walk_length);
  Rng rng(606);
  std::uint64_t steps = walker.walk(1, rng, scratch, out.data());
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < walks; ++i) {
    const auto leaf = static_cast<NodeId>(1 + rng.below(g.node_count() - 1));
    steps += walker.walk(leaf, rng, scratch, out.data()) - 1;
  }
  return seconds_since(start) / static_cast<double>(steps);
}

Outcome approximation_speed() {
  const Graph g = efg::testing::star(100000).graph();
  WalkConfig cfg;
  cfg.return_p = 2.0;
  cfg.in_out_q = 0.5;
  cfg.walk_length = 50;
  const double exact = seconds_per_step(g, cfg, 40);
  cfg.degree_threshold = 100;
  const double approx = seconds_per_step(g, cfg, 4000);
  const double speedup = exact / approx;
  return {speedup >= 10.0,
          format("exact %.3g s/step, approximated %.3g s/step, speedup %.1fx", exact, approx, speedup)};
}

Outcome alias_memory() {
  const Graph g = efg::testing::star(40000).graph();
  std::uint64_t sum = 0;
  for (std::uint64_t e = 0; e < g.edge_count(); ++e) sum += g.degree(g.destination(e));
  WalkConfig cfg;
  cfg.return_p = 2.0;
  cfg.in_out_q = 0.5;
  cfg.walk_length = 100;
  const std::uint64_t before = efg::alloc::current_bytes();
  efg::alloc::reset_peak();
  std::uint64_t steps = 0;
  {
    const Walker walker(g, cfg);
    efg::WalkScratch scratch;
    std::vector<NodeId> out(cfg.walk_length);
    Rng rng(707);
    for (int i = 0; i < 100; ++i) {
      steps += walker.walk(static_cast<NodeId>(rng.below(g.node_count())), rng, scratch, out.data());
    }
  }
  const std::uint64_t aux = efg::alloc::peak_bytes() - before;
  const std::uint64_t entries = aux / 4;
  return {sum > 1000000000ULL && entries < 10000000ULL,
          format("sum deg(dst) %llu, %llu steps, auxiliary peak %llu bytes (%llu entries)",
                 static_cast<unsigned long long>(sum), static_cast<unsigned long long>(steps),
                 static_cast<unsigned long long>(aux), static_cast<unsigned long long>(entries))};
}

double best_walk_seconds(const Graph& g, const WalkConfig& cfg, std::uint64_t& digest) {
  double best = 1e300;
  for (int i = 0; i < 2; ++i) {
    const auto start = std::chrono::steady_clock::now();
    digest = walk_digest(g, cfg);
    best = std::min(best, seconds_since(start));
  }
  return best;
}

Outcome cache_tradeoff() {
  Rng rng(808);
  const Graph plain = efg::testing::random_fixture(100000, 500000, false, false, rng).graph();
  Graph cached = plain;
  cached.enable_cache(efg::CacheKind::kDestinations).enable_cache(efg::CacheKind::kOutDegrees);
  WalkConfig cfg;
  cfg.return_p = 2.0;
  cfg.in_out_q = 0.5;
  cfg.walk_length = 40;
  cfg.threads = 1;
  std::uint64_t plain_digest = 0;
  std::uint64_t cached_digest = 0;
  const double slow = best_walk_seconds(plain, cfg, plain_digest);
  const double fast = best_walk_seconds(cached, cfg, cached_digest);
  const double speedup = slow / fast;
  return {plain.edge_count() == 1000000 && speedup >= 1.5 && plain_digest == cached_digest,
          format("%llu edges, uncached %.2fs, cached %.2fs, speedup %.2fx, walks %s",
                 static_cast<unsigned long long>(plain.edge_count()), slow, fast, speedup,
                 plain_digest == cached_digest ? "identical" : "differ")};
}

Outcome transe_gradient() {
  Rng rng(909);
  const double eps = 1e-5;
  double worst = 0.0;
  int triples = 0;
  while (triples < 100) {
    std::vector<std::vector<double>> args(5, std::vector<double>(16));
    for (auto& v : args) {
      for (double& x : v) x = rng.uniform() * 2.0 - 1.0;
    }
    const double margin = 4.0;
    efg::TransEGradient grad;
    if (efg::transe_loss_gradient(args[0], args[1], args[2], args[3], args[4], margin, grad) <= 0.0) continue;
    ++triples;
    const std::vector<double>* analytic[] = {&grad.h, &grad.r, &grad.t, &grad.h_corrupt, &grad.t_corrupt};
    for (int k = 0; k < 5; ++k) {
      for (std::size_t i = 0; i < args[k].size(); ++i) {
        auto plus = args;
        auto minus = args;
        plus[k][i] += eps;
        minus[k][i] -= eps;
        const double numeric = (efg::transe_loss(plus[0], plus[1], plus[2], plus[3], plus[4], margin) -
                                efg::transe_loss(minus[0], minus[1], minus[2], minus[3], minus[4], margin)) /
                               (2.0 * eps);
        const double a = (*analytic[k])[i];
        worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8}));
      }
    }
  }
  bool zeros_exact = true;
  for (const std::size_t dim : {1U, 8U, 64U}) {
    for (const double margin : {0.5, 1.0, 3.75}) {
      const std::vector<double> z(dim, 0.0);
      zeros_exact = zeros_exact && efg::transe_loss(z, z, z, z, z, margin) == margin;
    }
  }
  return {worst < 1e-4 && zeros_exact,
          format("100 triples, max relative error %.2e, all-zero loss %s", worst,
                 zeros_exact ? "equals the margin" : "differs from the margin")};
}

Outcome pipeline_soundness() {
  std::uint64_t component_errors = 0;
  std::uint64_t leaks = 0;
  std::uint64_t false_negatives = 0;
  std::uint64_t strata_errors = 0;
  std::uint64_t flagged = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(efg::derive_seed(1010, seed));
    const std::uint64_t n = 20 + rng.below(100);
    const std::uint64_t m = n / 2 + rng.below(3 * n);
    efg::GraphBuilder builder(false);
    builder.set_node_count(n);
    const std::uint32_t types[] = {builder.add_edge_type("a"), builder.add_edge_type("b"),
                                   builder.add_edge_type("c")};
    std::set<std::pair<NodeId, NodeId>> seen;
    std::map<std::uint32_t, std::uint64_t> per_type;
    std::uint64_t attempts = 0;
    while (seen.size() < m && attempts++ < 100 * m) {
      auto a = static_cast<NodeId>(rng.below(n));
      auto b = static_cast<NodeId>(rng.below(n));
      if (a == b) continue;
      if (b < a) std::swap(a, b);
      if (!seen.insert({a, b}).second) continue;
      const std::uint32_t t = types[rng.below(rng.coin() ? 3 : 2)];
      ++per_type[t];
      builder.add_edge(a, b, 1.0F, t);
    }
    const Graph g = std::move(builder).build();

    efg::HoldoutSpec spec;
    spec.seed = seed;
    spec.train_fraction = 0.5 + 0.4 * rng.uniform();
    const auto split = efg::split_edges(g, spec, seed % 10);
    flagged += split.forest_exceeds_budget ? 1 : 0;
    const auto full_components = efg::testing::bfs_components(efg::testing::adjacency_of(g));
    const auto train_components = efg::testing::bfs_components(efg::testing::adjacency_of(split.train));
    if (full_components != train_components) ++component_errors;

    std::set<std::pair<NodeId, NodeId>> train_set(split.train_edges.begin(), split.train_edges.end());
    std::set<std::pair<NodeId, NodeId>> all;
    for (const auto& e : split.train_edges) all.insert(e);
    for (const auto& [a, b] : split.test_edges) {
      if (train_set.contains({a, b}) || train_set.contains({b, a}) || split.train.has_edge(a, b)) ++leaks;
      all.insert({std::min(a, b), std::max(a, b)});
    }
    if (all != seen || split.train.edge_count() != 2 * split.train_edges.size()) ++leaks;

    std::vector<std::uint64_t> exclude;
    for (const auto policy : {efg::NegativePolicy::kUniform, efg::NegativePolicy::kScaleFree}) {
      const std::uint64_t want = std::min<std::uint64_t>(split.test_edges.size(), efg::non_edge_count(g) / 2);
      Rng negative_rng(seed + 1000);
      try {
        const auto negatives = efg::sample_negative_edges(g, want, policy, negative_rng);
        std::set<std::uint64_t> keys;
        for (const auto& [a, b] : negatives) {
          if (a == b || g.has_edge(a, b) || g.has_edge(b, a)) ++false_negatives;
          if (!keys.insert(efg::pair_key(a, b, false)).second) ++false_negatives;
        }
        if (negatives.size() != want) ++false_negatives;
      } catch (const std::exception&) {
        if (policy == efg::NegativePolicy::kUniform) ++false_negatives;
      }
    }

    efg::HoldoutSpec stratified = spec;
    stratified.schema = efg::HoldoutSchema::kMonteCarlo;
    stratified.stratify = true;
    const auto strata = efg::split_edges(g, stratified, 0);
    std::map<std::uint32_t, std::uint64_t> test_per_type;
    for (const auto& [a, b] : strata.test_edges) {
      if (const auto e = g.find_edge(a, b)) ++test_per_type[g.edge_type(*e)];
    }
    for (const auto& [t, count] : per_type) {
      const double expected = (1.0 - stratified.train_fraction) * static_cast<double>(count);
      if (std::abs(static_cast<double>(test_per_type[t]) - expected) > 1.0) ++strata_errors;
    }
  }
  const bool pass = component_errors == 0 && leaks == 0 && false_negatives == 0 && strata_errors == 0;
  return {pass, format("100 seeds (%llu flagged): component errors %llu, leaks %llu, false negatives %llu, "
                       "strata off by more than one %llu",
                       static_cast<unsigned long long>(flagged), static_cast<unsigned long long>(component_errors),
                       static_cast<unsigned long long>(leaks), static_cast<unsigned long long>(false_negatives),
                       static_cast<unsigned long long>(strata_errors))};
}

Outcome karate_benchmark() {
  const auto start = std::chrono::steady_clock::now();
  const Graph g = efg::load_edge_list(std::filesystem::path(EFG_TEST_DATA_DIR) / "karate.tsv");
  efg::PipelineConfig cfg;
  cfg.embed.method = efg::EmbeddingMethod::kSkipGram;
  cfg.embed.train.dim = 32;
  cfg.embed.train.window_size = 3;
  cfg.embed.train.epochs = 3;
  cfg.embed.train.learning_rate = 0.005;
  cfg.embed.train.negatives = 5;
  cfg.embed.walks.iterations = 10;
  cfg.embed.walks.walk_length = 100;
  cfg.embed.walks.return_p = 1.0;
  cfg.embed.walks.in_out_q = 0.5;
  cfg.edge_operator = efg::EdgeOperator::kHadamard;
  cfg.classifier.epochs = 300;
  cfg.classifier.optimizer.learning_rate = 0.03;
  cfg.holdouts.schema = efg::HoldoutSchema::kConnectedMonteCarlo;
  cfg.holdouts.repeats = 10;
  cfg.holdouts.seed = 42;
  cfg.baseline = true;
  const auto report = efg::run_edge_prediction_pipeline(g, cfg);
  const double model = mean_metric(report.summary, "auroc");
  const double baseline = mean_metric(report.baseline_summary, "auroc");
  const double elapsed = seconds_since(start);
  return {report.holdouts.size() == 10 && model > 0.70 && model > baseline && elapsed < 120.0,
          format("mean AUROC %.4f, degree-product baseline %.4f, %.1fs", model, baseline, elapsed)};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

constexpr Criterion kCriteria[] = {
    {"ef_bit_budget", ef_bit_budget},
    {"rank_select_oracles", rank_select_oracles},
    {"second_order_walk_correctness", second_order_correctness},
    {"dispatch_equivalence", dispatch_equivalence},
    {"approximation_fidelity", approximation_fidelity},
    {"approximation_speed", approximation_speed},
    {"alias_free_memory", alias_memory},
    {"cache_tradeoff", cache_tradeoff},
    {"transe_gradient_check", transe_gradient},
    {"pipeline_soundness", pipeline_soundness},
    {"karate_benchmark", karate_benchmark},
};

}  // namespace

int main(int argc, char** argv) {
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (argc > 1 && std::string_view(argv[1]) != c.name) continue;
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.name, outcome.detail.c_str());
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
