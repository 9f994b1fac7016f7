#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "ctrlhier/synthgen.hpp"
#include "ctrlhier/tree.hpp"
#include "support.hpp"

using namespace ctrlhier;
using testing::row;

namespace {

TreeError::Code build_error(const std::vector<EntityRow>& rows) {
  try {
    build_tree("X", rows);
  } catch (const TreeError& e) {
    return e.code();
  }
  FAIL("build_tree accepted invalid rows");
  return TreeError::Code::empty_input;
}

}  // namespace

TEST_SUITE_BEGIN("tree");

TEST_CASE("figure 1 tree") {
  const auto t = testing::figure1();
  CHECK(t.size() == 5);
  CHECK(tree_depth(t) == 2);
  CHECK(t.id(t.root()) == "A");
  CHECK(t.out_degree(t.at("C")) == 2);
  CHECK(t.level(t.at("E")) == 2);

  const auto d = out_degree_distribution(t);
  CHECK(d.n == 5);
  CHECK(d.fraction(0) == doctest::Approx(0.6));
  CHECK(d.fraction(2) == doctest::Approx(0.4));
  CHECK(d.fraction(1) == 0.0);
  CHECK(d.counts.at(0) == 3);
  CHECK(d.counts.at(2) == 2);
}

TEST_CASE("single node") {
  const std::vector<EntityRow> rows{row("X", "", "JP", "6021")};
  const auto t = build_tree("S", rows);
  CHECK(t.size() == 1);
  CHECK(tree_depth(t) == 0);
  CHECK(out_degree_distribution(t).fraction(0) == 1.0);
  CHECK(depth_histogram(t).counts == std::vector<std::size_t>{1});
}

TEST_CASE("build errors") {
  CHECK(build_error({}) == TreeError::Code::empty_input);
  CHECK(build_error({row("A", ""), row("B", "A"), row("A", "B")}) == TreeError::Code::cycle_detected);
  CHECK(build_error({row("A", ""), row("B", "A"), row("B", "A")}) == TreeError::Code::duplicate_entity);
  CHECK(build_error({row("A", ""), row("B", "")}) == TreeError::Code::multiple_roots);
  CHECK(build_error({row("A", "B"), row("B", "A")}) == TreeError::Code::cycle_detected);
  CHECK(build_error({row("A", ""), row("B", "Z")}) == TreeError::Code::unknown_parent);
  CHECK(build_error({row("A", ""), row("B", "A", "  ")}) == TreeError::Code::invalid_label);
  CHECK(build_error({row("A", ""), row("B", "A", "US", "60211")}) == TreeError::Code::invalid_sic);
  CHECK(build_error({row("A", ""), row("B", "A", "US", "6a")}) == TreeError::Code::invalid_sic);
  CHECK(build_error({row("A", "A")}) == TreeError::Code::cycle_detected);
}

TEST_CASE("cycle witness names the loop") {
  try {
    build_tree("X", std::vector<EntityRow>{row("R", ""), row("A", "B"), row("B", "C"), row("C", "A")});
    FAIL("expected a cycle");
  } catch (const TreeError& e) {
    CHECK(e.code() == TreeError::Code::cycle_detected);
    auto ids = e.entities();
    CHECK(ids.front() == ids.back());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    CHECK(ids == std::vector<std::string>{"A", "B", "C"});
  }
}

TEST_CASE("labels are trimmed") {
  const auto t = build_tree("X", std::vector<EntityRow>{row("A", "", " JP ", " 6021")});
  CHECK(t.labels(0).country == "JP");
  CHECK(t.labels(0).sic == "6021");
}

TEST_CASE("depth of regular trees") {
  const auto t = gen_tree({topology::Regular{2, 3}, 0});
  CHECK(tree_depth(t) == 3);
  const auto h = depth_histogram(gen_tree({topology::Regular{2, 2}, 0}));
  CHECK(h.counts == std::vector<std::size_t>{1, 2, 4});
}

TEST_CASE("chain degree distribution and subtree size") {
  const auto t = testing::chain(1000);
  const auto d = out_degree_distribution(t);
  CHECK(d.counts.at(1) == 999);
  CHECK(d.counts.at(0) == 1);
  CHECK(d.fraction(1) == doctest::Approx(0.999));
  CHECK(subtree_size(t, "N" + testing::pad(400)) == 600);
  CHECK(tree_depth(t) == 999);
}

TEST_CASE("level sizes of a deep firm") {
  // Level sizes quoted for one of the large firms.
  const std::vector<std::size_t> levels{299, 1186, 188, 24, 80};
  const auto t = testing::layered(levels);
  const auto h = depth_histogram(t);
  CHECK(h.counts == std::vector<std::size_t>{1, 299, 1186, 188, 24, 80});
  CHECK(h.depth() == 5);
  CHECK(t.size() == 1778);
}

TEST_CASE("severing") {
  const auto t = testing::figure1();
  SUBCASE("sever C") {
    const auto s = sever_subtree(t, "C");
    CHECK(s.size() == 2);
    CHECK(tree_depth(s) == 1);
    CHECK(s.find("B"));
    CHECK_FALSE(s.find("D"));
  }
  SUBCASE("sever B") {
    const auto s = sever_subtree(t, "B");
    CHECK(s.size() == 4);
    CHECK(tree_depth(s) == 2);
  }
  SUBCASE("sever root") {
    try {
      sever_subtree(t, "A");
      FAIL("root severed");
    } catch (const TreeError& e) {
      CHECK(e.code() == TreeError::Code::cannot_sever_root);
    }
  }
  SUBCASE("unknown") {
    try {
      sever_subtree(t, "Q");
      FAIL("unknown entity accepted");
    } catch (const TreeError& e) {
      CHECK(e.code() == TreeError::Code::unknown_entity);
    }
  }
  CHECK(subtree_size(t, "C") == 3);
  CHECK(subtree_size(t, "A") == 5);
  CHECK(t.size() == 5);
}

TEST_CASE("sic prefixes") {
  CHECK(sic_prefix("6021", 1) == "6");
  CHECK(sic_prefix("6021", 2) == "60");
  CHECK(sic_prefix("NONE", 2) == "NONE");
  CHECK(sic_prefix("6", 2) == "6");
  CHECK_THROWS_AS(sic_prefix("60x1", 1), TreeError);
  CHECK_THROWS_AS(sic_prefix("6021", 3), TreeError);
}

TEST_CASE("invariants on random trees") {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + gen() % 300;
    const auto t = gen_tree({topology::Uniform{n}, gen()});
    const auto d = out_degree_distribution(t);
    std::size_t edges = 0;
    double total = 0.0;
    for (auto [deg, count] : d.counts) edges += deg * count;
    for (auto [deg, f] : d.fractions) total += f;
    CHECK(edges == n - 1);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const auto h = depth_histogram(t);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == n);
    CHECK(h.counts.front() == 1);
    CHECK(h.counts.back() >= 1);
    CHECK(h.depth() == tree_depth(t));

    CHECK(build_tree(t.firm_id(), t.rows()) == t);

    if (n > 1) {
      const auto v = static_cast<NodeIndex>(gen() % n);
      if (v != t.root()) {
        const auto s = sever_subtree(t, t.id(v));
        CHECK(s.size() == n - subtree_size(t, t.id(v)));
      }
    }
  }
}

TEST_CASE("relabel leaves other labels alone") {
  const auto t = testing::figure1();
  const auto r = relabel(t, "D", LabelKind::country, "GB");
  CHECK(r.labels(r.at("D")).country == "GB");
  CHECK(r.labels(r.at("D")).sic == "6021");
  CHECK(t.labels(t.at("D")).country == "US");
  CHECK_THROWS_AS(relabel(t, "D", LabelKind::sic, "60211"), TreeError);
  CHECK_THROWS_AS(relabel(t, "Q", LabelKind::country, "GB"), TreeError);
}

TEST_SUITE_END();
