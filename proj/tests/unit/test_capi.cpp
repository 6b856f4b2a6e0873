#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "efgraph/efgraph.h"

namespace {

const std::string kData = EFG_TEST_DATA_DIR;

efg_graph* load(const std::string& name) {
  efg_load_options options;
  efg_load_options_default(&options);
  efg_graph* g = nullptr;
  EXPECT_EQ(efg_graph_load((kData + "/" + name).c_str(), &options, &g), EFG_OK) << efg_last_error();
  return g;
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  efg_string_free(s);
  return out;
}

TEST(CApi, LoadTriangleAndQuery) {
  efg_graph* g = load("triangle.tsv");
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(efg_graph_node_count(g), 3U);
  EXPECT_EQ(efg_graph_edge_count(g), 6U);
  EXPECT_EQ(efg_graph_directed(g), 0);
  uint64_t degree = 0;
  ASSERT_EQ(efg_graph_degree(g, 1, &degree), EFG_OK);
  EXPECT_EQ(degree, 2U);
  uint32_t neighbors[4] = {};
  uint64_t count = 0;
  ASSERT_EQ(efg_graph_neighbors(g, 0, neighbors, 4, &count), EFG_OK);
  EXPECT_EQ(count, 2U);
  EXPECT_EQ(neighbors[0], 1U);
  EXPECT_EQ(neighbors[1], 2U);
  int has = 0;
  ASSERT_EQ(efg_graph_has_edge(g, 2, 0, &has), EFG_OK);
  EXPECT_EQ(has, 1);
  char* name = nullptr;
  ASSERT_EQ(efg_graph_node_name(g, 2, &name), EFG_OK);
  EXPECT_EQ(take(name), "c");
  char* report = nullptr;
  ASSERT_EQ(efg_graph_report(g, EFG_REPORT_KEY_VALUES, &report), EFG_OK);
  EXPECT_NE(take(report).find("node_count=3"), std::string::npos);
  efg_graph_free(g);
}

TEST(CApi, ErrorsCarryStatusAndMessage) {
  efg_load_options options;
  efg_load_options_default(&options);
  efg_graph* g = nullptr;
  EXPECT_EQ(efg_graph_load("/nonexistent/edges.tsv", &options, &g), EFG_ERR_IO);
  EXPECT_EQ(g, nullptr);
  EXPECT_NE(std::string(efg_last_error()), "");
  EXPECT_EQ(std::string(efg_status_name(EFG_ERR_IO)), "i/o error");
  EXPECT_EQ(efg_graph_load(nullptr, &options, &g), EFG_ERR_NULL_ARGUMENT);

  g = load("triangle.tsv");
  uint64_t degree = 0;
  EXPECT_EQ(efg_graph_degree(g, 9, &degree), EFG_ERR_RANGE);
  EXPECT_EQ(efg_graph_degree(g, 0, nullptr), EFG_ERR_NULL_ARGUMENT);
  EXPECT_EQ(efg_graph_degree(nullptr, 0, &degree), EFG_ERR_NULL_ARGUMENT);
  efg_graph_free(g);
  efg_graph_free(nullptr);
}

TEST(CApi, GraphFromEdgesAndBinaryRoundTrip) {
  const uint32_t src[] = {0, 1, 2};
  const uint32_t dst[] = {1, 2, 3};
  efg_graph* g = nullptr;
  ASSERT_EQ(efg_graph_from_edges(4, src, dst, nullptr, 3, 1, &g), EFG_OK);
  EXPECT_EQ(efg_graph_edge_count(g), 3U);
  const auto path = std::filesystem::temp_directory_path() / "efgraph_capi.efg";
  ASSERT_EQ(efg_graph_write(g, path.c_str()), EFG_OK);
  efg_graph* back = nullptr;
  ASSERT_EQ(efg_graph_read(path.c_str(), &back), EFG_OK);
  EXPECT_EQ(efg_graph_edge_count(back), 3U);
  EXPECT_EQ(efg_graph_directed(back), 1);
  EXPECT_EQ(efg_graph_enable_cache(back, EFG_CACHE_DESTINATIONS | EFG_CACHE_OUT_DEGREES), EFG_OK);
  efg_graph_free(g);
  efg_graph_free(back);
  std::filesystem::remove(path);
  const uint32_t dup_src[] = {0, 0};
  const uint32_t dup_dst[] = {1, 1};
  EXPECT_EQ(efg_graph_from_edges(2, dup_src, dup_dst, nullptr, 2, 1, &g), EFG_ERR_DUPLICATE);
}

struct WalkCount {
  uint64_t rows = 0;
  uint64_t steps = 0;
};

int count_walks(void* user, const uint32_t*, const uint64_t* offsets, uint64_t rows, uint64_t) {
  auto* c = static_cast<WalkCount*>(user);
  c->rows += rows;
  c->steps += offsets[rows] - offsets[0];
  return 0;
}

TEST(CApi, WalksAndDigests) {
  efg_graph* g = load("karate.tsv");
  efg_walk_config cfg;
  efg_walk_config_default(&cfg);
  cfg.length = 10;
  cfg.iterations = 2;
  WalkCount counted;
  ASSERT_EQ(efg_walks_generate(g, &cfg, count_walks, &counted), EFG_OK);
  EXPECT_EQ(counted.rows, 68U);
  EXPECT_EQ(counted.steps, 680U);
  uint64_t digest_a = 0;
  uint64_t digest_b = 0;
  uint64_t walks = 0;
  uint64_t steps = 0;
  ASSERT_EQ(efg_walks_digest(g, &cfg, &digest_a, &walks, &steps), EFG_OK);
  ASSERT_EQ(efg_walks_digest(g, &cfg, &digest_b, &walks, &steps), EFG_OK);
  EXPECT_EQ(digest_a, digest_b);
  EXPECT_EQ(walks, 68U);
  cfg.seed += 1;
  ASSERT_EQ(efg_walks_digest(g, &cfg, &digest_b, &walks, &steps), EFG_OK);
  EXPECT_NE(digest_a, digest_b);

  cfg.return_p = 2.0;
  cfg.in_out_q = 0.5;
  double probs[64] = {};
  uint64_t count = 0;
  ASSERT_EQ(efg_walk_transition_probabilities(g, &cfg, 0, 1, probs, 64, &count), EFG_OK);
  double total = 0.0;
  for (uint64_t i = 0; i < count; ++i) total += probs[i];
  EXPECT_NEAR(total, 1.0, 1e-12);
  cfg.return_p = 0.0;
  EXPECT_EQ(efg_walks_digest(g, &cfg, &digest_b, &walks, &steps), EFG_ERR_CONFIG);
  efg_graph_free(g);
}

TEST(CApi, TrainEmbedding) {
  efg_graph* g = load("karate.tsv");
  efg_walk_config walks;
  efg_walk_config_default(&walks);
  walks.length = 10;
  efg_train_config cfg;
  efg_train_config_default(&cfg);
  cfg.dim = 8;
  cfg.epochs = 2;
  efg_embedding* e = nullptr;
  ASSERT_EQ(efg_embedding_train(g, &walks, &cfg, &e), EFG_OK) << efg_last_error();
  EXPECT_EQ(efg_embedding_rows(e), 34U);
  EXPECT_EQ(efg_embedding_dim(e), 8U);
  ASSERT_NE(efg_embedding_data(e), nullptr);
  double losses[4] = {};
  uint64_t count = 0;
  ASSERT_EQ(efg_embedding_losses(e, losses, 4, &count), EFG_OK);
  EXPECT_EQ(count, 2U);
  const auto path = std::filesystem::temp_directory_path() / "efgraph_capi_embedding.txt";
  ASSERT_EQ(efg_embedding_write(e, g, path.c_str(), 0), EFG_OK);
  EXPECT_GT(std::filesystem::file_size(path), 0U);
  std::filesystem::remove(path);
  efg_embedding_free(e);

  cfg.method = EFG_METHOD_TRANSE;
  EXPECT_EQ(efg_embedding_train(g, &walks, &cfg, &e), EFG_ERR_CONFIG);
  cfg.method = 99;
  EXPECT_EQ(efg_embedding_train(g, &walks, &cfg, &e), EFG_ERR_CONFIG);
  efg_graph_free(g);
}

TEST(CApi, SplitEdges) {
  efg_graph* g = load("karate.tsv");
  efg_holdout_config cfg;
  efg_holdout_config_default(&cfg);
  efg_graph* train = nullptr;
  uint32_t* pairs = nullptr;
  uint64_t count = 0;
  int flagged = 1;
  ASSERT_EQ(efg_split_edges(g, &cfg, 0, &train, &pairs, &count, &flagged), EFG_OK);
  EXPECT_EQ(flagged, 0);
  EXPECT_GT(count, 0U);
  EXPECT_EQ(efg_graph_edge_count(train) / 2 + count, 78U);
  for (uint64_t i = 0; i < count; ++i) {
    int has = 1;
    ASSERT_EQ(efg_graph_has_edge(train, pairs[2 * i], pairs[2 * i + 1], &has), EFG_OK);
    EXPECT_EQ(has, 0);
  }
  efg_buffer_free(pairs);
  efg_graph_free(train);
  efg_graph_free(g);
}

TEST(CApi, EvaluateSmokeAndStageErrors) {
  efg_graph* g = load("karate.tsv");
  efg_pipeline_config cfg;
  efg_pipeline_config_default(&cfg);
  cfg.smoke = 1;
  efg_report* r = nullptr;
  ASSERT_EQ(efg_evaluate(g, &cfg, &r), EFG_OK) << efg_last_error();
  EXPECT_EQ(efg_report_holdouts(r), 2U);
  double auroc = 0.0;
  ASSERT_EQ(efg_report_mean(r, "auroc", &auroc), EFG_OK);
  EXPECT_GE(auroc, 0.0);
  EXPECT_LE(auroc, 1.0);
  double baseline = 0.0;
  EXPECT_EQ(efg_report_baseline_mean(r, "auroc", &baseline), EFG_OK);
  EXPECT_EQ(efg_report_mean(r, "nonsense", &auroc), EFG_ERR_CONFIG);
  char* tsv = nullptr;
  ASSERT_EQ(efg_report_tsv(r, &tsv), EFG_OK);
  EXPECT_EQ(take(tsv).rfind("holdout\tauroc", 0), 0U);
  efg_report_free(r);

  cfg.task = EFG_TASK_NODE_LABEL;
  EXPECT_EQ(efg_evaluate(g, &cfg, &r), EFG_ERR_CONFIG);
  EXPECT_EQ(std::string(efg_last_error_stage()), "config");
  cfg.task = EFG_TASK_EDGE_PREDICTION;
  cfg.train.method = EFG_METHOD_TRANSE;
  EXPECT_EQ(efg_evaluate(g, &cfg, &r), EFG_ERR_CONFIG);
  EXPECT_EQ(std::string(efg_last_error_stage()), "embed");
  efg_graph_free(g);
}

TEST(CApi, NameLookups) {
  int v = -1;
  EXPECT_EQ(efg_method_from_name("cbow", &v), EFG_OK);
  EXPECT_EQ(v, EFG_METHOD_CBOW);
  EXPECT_EQ(efg_schema_from_name("kfold", &v), EFG_OK);
  EXPECT_EQ(v, EFG_SCHEMA_KFOLD);
  EXPECT_EQ(efg_negative_policy_from_name("scale_free", &v), EFG_OK);
  EXPECT_EQ(v, EFG_NEGATIVES_SCALE_FREE);
  EXPECT_EQ(efg_operator_from_name("hadamard", &v), EFG_OK);
  EXPECT_EQ(v, EFG_OP_HADAMARD);
  EXPECT_EQ(efg_operator_from_name("max", &v), EFG_ERR_CONFIG);
  EXPECT_EQ(efg_method_from_name(nullptr, &v), EFG_ERR_NULL_ARGUMENT);
}

}  // namespace
