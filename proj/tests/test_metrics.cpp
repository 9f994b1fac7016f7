#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "ctrlhier/ingest.hpp"
#include "ctrlhier/metrics.hpp"
#include "ctrlhier/synthgen.hpp"
#include "support.hpp"

using namespace ctrlhier;
using testing::row;

namespace {

struct Table1Row {
  const char* firm;
  std::size_t nodes, countries, sic;
  std::uint32_t depth;
};

// 2011 columns of the descriptive statistics table.
const Table1Row kTable1[] = {
    {"S1", 1007, 34, 72, 3},   {"S2", 887, 40, 133, 3},   {"S3", 2568, 55, 210, 5},
    {"S4", 1897, 37, 72, 4},   {"S5", 1034, 42, 122, 3},  {"S6", 3221, 87, 210, 5},
    {"S7", 5850, 58, 198, 4},  {"S8", 6483, 68, 157, 4},  {"S9", 5502, 48, 194, 5},
    {"S10", 1815, 35, 222, 7}, {"S11", 43, 14, 16, 4},    {"S12", 53, 18, 13, 2},
    {"S13", 935, 32, 46, 5},   {"S14", 9815, 76, 281, 5}, {"S15", 9084, 89, 240, 6},
    {"S16", 1778, 32, 100, 5}, {"S17", 2334, 49, 250, 4}, {"S18", 11487, 47, 279, 6},
    {"S19", 16443, 58, 172, 6}, {"B1", 2678, 19, 72, 4},  {"B2", 1998, 20, 110, 4},
    {"B3", 127, 37, 26, 5},    {"B4", 475, 32, 147, 3},   {"B5", 205, 28, 34, 3},
    {"I1", 793, 40, 48, 5},    {"I2", 118, 25, 27, 5},    {"I3", 1564, 74, 154, 3},
    {"I4", 1752, 54, 98, 4},   {"I5", 379, 10, 47, 4},
};

// A tree with the requested counts: a path of `depth` edges from the root,
// every other node a child of the root, labels cycled.
ControlTree tree_with_stats(const Table1Row& r) {
  std::vector<EntityRow> rows;
  for (std::size_t i = 0; i < r.nodes; ++i) {
    std::string parent;
    if (i > 0) parent = i <= r.depth ? "N" + testing::pad(i - 1) : "N" + testing::pad(0);
    rows.push_back(row("N" + testing::pad(i), parent, "C" + std::to_string(i % r.countries),
                       std::to_string(1000 + i % r.sic)));
  }
  return build_tree(r.firm, rows);
}

double brute_gini(const std::vector<double>& x) {
  double num = 0.0, sum = 0.0;
  for (double a : x) {
    sum += a;
    for (double b : x) num += std::abs(a - b);
  }
  const double n = static_cast<double>(x.size());
  return num / (2.0 * n * n * (sum / n));
}

ControlTree iid_tree(std::mt19937_64& gen, std::size_t n, const std::vector<std::string>& labels) {
  auto t = gen_tree({topology::Uniform{n}, gen()});
  return assign_labels(t, LabelKind::country,
                       {labelling::Iid{uniform_distribution(LabelKind::country, labels)}, gen()});
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("describe") {
  const auto single = build_tree("S", std::vector<EntityRow>{row("X", "", "JP", "6021")});
  CHECK(describe(single) == DescriptiveStats{"S", 1, 1, 1, 0});

  const auto s11 = load_snapshot_file(testing::fixture("s11.csv"));
  CHECK(describe(s11.firms()[0].tree) == DescriptiveStats{"S11", 43, 14, 16, 4});

  for (const auto& r : kTable1) {
    const auto d = describe(tree_with_stats(r));
    CHECK(d.n_nodes == r.nodes);
    CHECK(d.n_countries == r.countries);
    CHECK(d.n_sic == r.sic);
    CHECK(d.depth == r.depth);
  }
}

TEST_CASE("group means reproduce the published means") {
  std::vector<Firm> firms;
  for (const auto& r : kTable1) {
    const FirmGroup g = r.firm[0] == 'S' ? FirmGroup::sifi : r.firm[0] == 'B' ? FirmGroup::bank : FirmGroup::insurer;
    firms.push_back({tree_with_stats(r), g, std::nullopt});
  }
  const Snapshot snap("2011-05-26", std::move(firms));
  const auto sifi = group_means(snap, FirmGroup::sifi);
  CHECK(sifi.firms == 19);
  CHECK(std::abs(sifi.n_nodes - 4328) <= 0.5);
  CHECK(std::abs(sifi.n_countries - 48) <= 0.5);
  CHECK(std::abs(sifi.n_sic - 157) <= 0.5);
  CHECK(std::abs(sifi.depth - 4.5) <= 0.05);
  const auto bank = group_means(snap, FirmGroup::bank);
  CHECK(std::abs(bank.n_nodes - 1097) <= 0.5);
  CHECK(std::abs(bank.n_countries - 27) <= 0.5);
  CHECK(std::abs(bank.n_sic - 78) <= 0.5);
  CHECK(std::abs(bank.depth - 3.8) <= 0.05);
  const auto ins = group_means(snap, FirmGroup::insurer);
  CHECK(std::abs(ins.n_nodes - 921) <= 0.5);
  CHECK(std::abs(ins.n_countries - 41) <= 0.5);
  CHECK(std::abs(ins.n_sic - 75) <= 0.5);
  CHECK(std::abs(ins.depth - 4.2) <= 0.05);
  CHECK(group_summary(snap).size() == 3);
}

TEST_CASE("group means small cases") {
  std::vector<Firm> firms{{testing::chain(100, "A"), FirmGroup::bank, std::nullopt},
                          {testing::chain(300, "B"), FirmGroup::bank, std::nullopt}};
  const Snapshot snap("2011-05-26", firms);
  CHECK(group_means(snap, FirmGroup::bank).n_nodes == 200.0);
  CHECK_THROWS_AS(group_means(snap, FirmGroup::sifi), MetricsError);
  CHECK(group_summary(snap).size() == 1);

  const Snapshot one("2011-05-26", {{testing::figure1(), FirmGroup::insurer, std::nullopt}});
  const auto m = group_means(one, FirmGroup::insurer);
  CHECK(m.n_nodes == 5.0);
  CHECK(m.depth == 2.0);
}

TEST_CASE("perfect tree statistic") {
  SUBCASE("uniform labels") {
    const auto r = perfect_tree_statistic(testing::figure1({"JP", "JP", "JP", "JP", "JP"}), LabelKind::country);
    CHECK(r.matched == 4);
    CHECK(r.t_total == doctest::Approx(0.8));
    CHECK(r.t_nonroot == 1.0);
  }
  SUBCASE("hand count") {
    const auto r = perfect_tree_statistic(testing::figure1({"JP", "GB", "JP", "JP", "US"}), LabelKind::country);
    CHECK(r.matched == 2);
    CHECK(r.t_total == doctest::Approx(0.4));
    CHECK(r.t_nonroot == doctest::Approx(0.5));
  }
  SUBCASE("single node") {
    const auto r = perfect_tree_statistic(testing::chain(1), LabelKind::country);
    CHECK(r.matched == 0);
    CHECK(r.t_total == 0.0);
    CHECK(r.t_nonroot == 0.0);
    CHECK(r.degenerate);
  }
  SUBCASE("fixture") {
    const auto snap = load_snapshot_file(testing::fixture("s11.csv"));
    const auto& t = snap.firms()[0].tree;
    const auto c = perfect_tree_statistic(t, LabelKind::country);
    CHECK(c.matched == 12);
    CHECK(std::abs(c.t_total - 12.0 / 43.0) < 1e-12);
    const auto s = perfect_tree_statistic(t, LabelKind::sic);
    CHECK(s.matched == 20);
    CHECK(std::abs(s.t_total - 0.465) < 5e-4);
  }
  SUBCASE("sic granularity") {
    std::vector<EntityRow> rows{row("A", "", "US", "6021"), row("B", "A", "US", "6022"),
                                row("C", "A", "US", "6211"), row("D", "C", "US", "NONE")};
    const auto t = build_tree("F", rows);
    CHECK(perfect_tree_statistic(t, LabelKind::sic).matched == 0);
    CHECK(perfect_tree_statistic(t, LabelKind::sic2).matched == 1);
    CHECK(perfect_tree_statistic(t, LabelKind::sic1).matched == 2);
  }
}

TEST_CASE("perfect tree identities on random trees") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = iid_tree(gen, 2 + gen() % 200, {"A", "B", "C"});
    const auto r = perfect_tree_statistic(t, LabelKind::country);
    const double n = static_cast<double>(t.size());
    CHECK(r.t_total == doctest::Approx(r.t_nonroot * (n - 1) / n).epsilon(1e-14));
    CHECK(r.t_total < 1.0);
    CHECK(r.matched <= t.size() - 1);
    std::size_t oracle = 0;
    for (NodeIndex i = 0; i < t.size(); ++i)
      if (i != t.root() && t.labels(i).country == t.labels(t.parent(i)).country) ++oracle;
    CHECK(r.matched == oracle);
  }
}

TEST_CASE("transition table") {
  SUBCASE("three edges") {
    std::vector<EntityRow> rows{row("R", "", "JP"), row("A", "R", "JP"), row("B", "R", "GB"), row("C", "R", "JP")};
    const std::vector<ControlTree> trees{build_tree("F", rows)};
    const auto table = transition_table(trees, LabelKind::country);
    REQUIRE(table.records.size() == 1);
    CHECK(table.records[0].label == "JP");
    CHECK(table.records[0].p_in == doctest::Approx(2.0 / 3.0));
    CHECK(table.records[0].children == 3);
    CHECK(table.find("GB") == nullptr);
  }
  SUBCASE("uniform labels") {
    const std::vector<ControlTree> trees{testing::figure1()};
    const auto table = transition_table(trees, LabelKind::country);
    REQUIRE(table.records.size() == 1);
    CHECK(table.records[0].p_in == 1.0);
  }
  SUBCASE("ranks break ties by label") {
    std::vector<EntityRow> rows{row("R", "", "ZZ"), row("A", "R", "ZZ"), row("B", "R", "BB"),
                                row("C", "B", "BB"), row("D", "A", "AA"), row("E", "D", "AA")};
    const std::vector<ControlTree> trees{build_tree("F", rows)};
    const auto table = transition_table(trees, LabelKind::country);
    REQUIRE(table.records.size() == 3);
    CHECK(table.records[0].label == "AA");
    CHECK(table.records[1].label == "BB");
    CHECK(table.records[2].label == "ZZ");
    CHECK(table.records[2].p_in == doctest::Approx(1.0 / 3.0));
    CHECK(table.records[2].rank == 3);
  }
  SUBCASE("pooling order does not matter") {
    std::mt19937_64 gen(5);
    std::vector<ControlTree> trees;
    for (int i = 0; i < 8; ++i) trees.push_back(iid_tree(gen, 50, {"A", "B", "C", "D"}));
    TransitionCounts left(LabelKind::country), right(LabelKind::country);
    for (int i = 0; i < 4; ++i) left.add(trees[i]);
    for (int i = 7; i >= 4; --i) right.add(trees[i]);
    right.merge(left);
    CHECK(right.table().records == transition_table(trees, LabelKind::country).records);
  }
}

TEST_CASE("gini") {
  const std::vector<double> pair{1, 0};
  CHECK(gini(pair) == doctest::Approx(0.5));
  const std::vector<double> star{2, 0, 0};
  CHECK(gini(star) == doctest::Approx(2.0 / 3.0));
  const std::vector<double> flat{3, 3, 3};
  CHECK(gini(flat) == 0.0);
  CHECK(gini_of_degrees(testing::chain(2)) == doctest::Approx(0.5));
  CHECK(gini_of_degrees(testing::chain(10000)) == doctest::Approx(1e-4).epsilon(1e-6));
  const std::vector<double> zeros{0, 0};
  CHECK_THROWS_AS(gini(zeros), MetricsError);
  CHECK_THROWS_AS(gini_of_degrees(testing::chain(1)), MetricsError);

  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = gen_tree({topology::Preferential{2 + gen() % 199, 1.0}, gen()});
    std::vector<double> deg;
    for (auto d : out_degrees(t)) deg.push_back(static_cast<double>(d));
    CHECK(std::abs(gini_of_degrees(t) - brute_gini(deg)) < 1e-12);
  }
}

TEST_CASE("spearman") {
  const std::vector<double> x{1, 2, 3}, up{10, 20, 30}, down{30, 20, 10};
  CHECK(spearman_rank_corr(x, up) == doctest::Approx(1.0));
  CHECK(spearman_rank_corr(x, down) == doctest::Approx(-1.0));
  const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  CHECK(spearman_rank_corr(a, b) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(midranks(std::vector<double>{5, 1, 5, 3}) == std::vector<double>{3.5, 1, 3.5, 2});

  const std::vector<double> constant{2, 2, 2}, shorter{1, 2};
  CHECK_THROWS_AS(spearman_rank_corr(constant, x), MetricsError);
  CHECK_THROWS_AS(spearman_rank_corr(shorter, x), MetricsError);
  CHECK_THROWS_AS(spearman_rank_corr(shorter, shorter), MetricsError);

  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> u(3 + gen() % 30), v(u.size());
    for (auto& e : u) e = static_cast<double>(gen() % 1000);
    for (auto& e : v) e = static_cast<double>(gen() % 1000);
    if (std::adjacent_find(u.begin(), u.end(), std::not_equal_to<>()) == u.end()) continue;
    CHECK(spearman_rank_corr(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    auto sorted_v = v;
    std::sort(sorted_v.begin(), sorted_v.end());
    if (std::adjacent_find(sorted_v.begin(), sorted_v.end()) != sorted_v.end()) continue;
    if (std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end()) continue;
    auto w = v;
    for (auto& e : w) e = -e;
    CHECK(spearman_rank_corr(u, w) == doctest::Approx(-spearman_rank_corr(u, v)).epsilon(1e-12));
  }
}

TEST_CASE("hierarchy fractions") {
  SUBCASE("figure 1") {
    const Snapshot snap("2011-05-26", {{testing::figure1(), FirmGroup::sifi, std::nullopt}});
    const auto h = hierarchy_fraction_table(snap);
    REQUIRE(h.rows.size() == 1);
    CHECK(h.rows[0].fractions.size() == 10);
    CHECK(h.rows[0].fractions[0] == 0.5);
    CHECK(h.rows[0].fractions[1] == 0.5);
    CHECK(h.pooled == h.rows[0].fractions);
    CHECK(h.bucket_labels().back() == ">10");
    CHECK(h.bucket_labels().front() == "1");
  }
  SUBCASE("deep chain overflows") {
    const Snapshot snap("2011-05-26", {{testing::chain(13), FirmGroup::sifi, std::nullopt}});
    const auto h = hierarchy_fraction_table(snap);
    for (int k = 0; k < 9; ++k) CHECK(h.rows[0].fractions[k] == doctest::Approx(1.0 / 12));
    CHECK(h.rows[0].fractions[9] == doctest::Approx(3.0 / 12));
  }
  SUBCASE("rows sum to one and pooled weights by nodes") {
    std::mt19937_64 gen(31);
    std::vector<Firm> firms;
    for (int i = 0; i < 6; ++i)
      firms.push_back({gen_tree({topology::Uniform{2 + gen() % 400}, gen()}, "F" + std::to_string(i)),
                       FirmGroup::sifi, std::nullopt});
    const Snapshot snap("2011-05-26", firms);
    const auto h = hierarchy_fraction_table(snap, 4);
    std::vector<double> pooled(5, 0.0);
    double total = 0.0;
    for (std::size_t f = 0; f < firms.size(); ++f) {
      const auto& r = h.rows[f];
      CHECK(std::abs(std::accumulate(r.fractions.begin(), r.fractions.end(), 0.0) - 1.0) < 1e-12);
      const double m = static_cast<double>(firms[f].tree.size() - 1);
      for (int k = 0; k < 5; ++k) pooled[k] += r.fractions[k] * m;
      total += m;
    }
    for (int k = 0; k < 5; ++k) CHECK(h.pooled[k] == doctest::Approx(pooled[k] / total).epsilon(1e-12));
  }
}

TEST_CASE("corpus label distribution") {
  const Snapshot one("2011-05-26", {{build_tree("S", std::vector<EntityRow>{row("X", "", "JP", "6021")}),
                                     FirmGroup::sifi, std::nullopt}});
  CHECK(corpus_label_distribution(one, LabelKind::country, 25) ==
        std::vector<std::pair<std::string, std::size_t>>{{"JP", 1}});

  std::vector<EntityRow> a{row("A", "", "JP"), row("B", "A", "US"), row("C", "A", "JP")};
  std::vector<EntityRow> b{row("A", "", "US"), row("B", "A", "JP")};
  const Snapshot two("2011-05-26", {{build_tree("F1", a), FirmGroup::sifi, std::nullopt},
                                    {build_tree("F2", b), FirmGroup::bank, std::nullopt}});
  CHECK(corpus_label_distribution(two, LabelKind::country, 25) ==
        std::vector<std::pair<std::string, std::size_t>>{{"JP", 3}, {"US", 2}});

  std::mt19937_64 gen(41);
  std::vector<std::string> labels;
  std::vector<double> weights;
  for (int i = 0; i < 30; ++i) {
    labels.push_back("L" + std::to_string(i));
    weights.push_back(1.0 / (i + 1));
  }
  std::vector<Firm> firms;
  for (int i = 0; i < 5; ++i) {
    auto t = gen_tree({topology::Uniform{300}, gen()}, "Z" + std::to_string(i));
    t = assign_labels(t, LabelKind::country,
                      {labelling::Iid{make_distribution(LabelKind::country, labels, weights)}, gen()});
    firms.push_back({std::move(t), FirmGroup::sifi, std::nullopt});
  }
  const Snapshot zipf("2011-05-26", firms);
  std::map<std::string, std::size_t> counts;
  for (const auto& f : zipf.firms())
    for (NodeIndex i = 0; i < f.tree.size(); ++i) ++counts[f.tree.labels(i).country];
  std::vector<std::pair<std::string, std::size_t>> oracle(counts.begin(), counts.end());
  std::stable_sort(oracle.begin(), oracle.end(), [](auto& x, auto& y) { return x.second > y.second; });
  oracle.resize(std::min<std::size_t>(oracle.size(), 10));
  CHECK(corpus_label_distribution(zipf, LabelKind::country, 10) == oracle);
}

TEST_SUITE_END();
