#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctrlhier/snapshot.hpp"
#include "ctrlhier/tree.hpp"

namespace ctrlhier {

class MetricsError : public Error {
 public:
  enum class Code { degenerate_input, length_mismatch, empty_group };
  MetricsError(Code code, std::string message) : Error(std::move(message)), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

struct DescriptiveStats {
  std::string firm_id;
  std::size_t n_nodes = 0;
  std::size_t n_countries = 0;
  std::size_t n_sic = 0;  // distinct full SIC codes, "NONE" included
  std::uint32_t depth = 0;

  friend bool operator==(const DescriptiveStats&, const DescriptiveStats&) = default;
};

DescriptiveStats describe(const ControlTree& tree);

// Share of nodes whose label equals their parent's. t_total divides by all
// nodes, t_nonroot by non-root nodes; level-1 nodes count when they share
// the root's label.
struct PerfectTreeResult {
  LabelKind label_kind = LabelKind::country;
  std::size_t matched = 0;
  std::size_t n_nodes = 0;
  double t_total = 0.0;
  double t_nonroot = 0.0;
  bool degenerate = false;  // single-node tree: t_nonroot reported as 0

  friend bool operator==(const PerfectTreeResult&, const PerfectTreeResult&) = default;
};

PerfectTreeResult perfect_tree_statistic(const ControlTree& tree, LabelKind kind);
std::size_t count_parent_matches(const ControlTree& tree, LabelKind kind);

struct TransitionRecord {
  std::string label;
  std::size_t children = 0;             // children of nodes carrying `label`
  std::size_t same_label_children = 0;  // of those, children also carrying `label`
  double p_in = 0.0;                    // P(A|A)
  std::size_t rank = 0;                 // 1 = highest p_in

  friend bool operator==(const TransitionRecord&, const TransitionRecord&) = default;
};

struct TransitionTable {
  LabelKind label_kind = LabelKind::country;
  std::vector<TransitionRecord> records;  // ordered by rank

  const TransitionRecord* find(std::string_view label) const;
};

// Per-label parent/child edge counts. Partial counts from separate trees can
// be merged in any order with identical results.
class TransitionCounts {
 public:
  explicit TransitionCounts(LabelKind kind) : kind_(kind) {}

  void add(const ControlTree& tree);
  void merge(const TransitionCounts& other);
  TransitionTable table() const;

 private:
  LabelKind kind_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts_;
};

TransitionTable transition_table(std::span<const ControlTree> trees, LabelKind kind);
TransitionTable transition_table(const Snapshot& snapshot, LabelKind kind);

// Mean-absolute-difference Gini coefficient sum|xi - xj| / (2 n^2 mean).
double gini(std::span<const double> values);
// Gini of the out-degrees of every node, leaves included.
double gini_of_degrees(const ControlTree& tree);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> midranks(std::span<const double> values);
// Pearson correlation of the midrank transforms of x and y.
double spearman_rank_corr(std::span<const double> x, std::span<const double> y);

struct HierarchyFractionRow {
  std::string firm_id;
  std::vector<double> fractions;  // levels 1..bucket_cap, then the overflow bucket
};

struct HierarchyFractionTable {
  std::size_t bucket_cap = 9;
  std::vector<HierarchyFractionRow> rows;
  std::vector<double> pooled;  // over the non-root nodes of every firm

  // "1".."cap" followed by ">cap+1" (">10" for the default cap).
  std::vector<std::string> bucket_labels() const;
};

HierarchyFractionTable hierarchy_fraction_table(const Snapshot& snapshot, std::size_t bucket_cap = 9);

std::vector<std::pair<std::string, std::size_t>> corpus_label_distribution(
    const Snapshot& snapshot, LabelKind kind, std::size_t top_k);

struct GroupMeans {
  FirmGroup group = FirmGroup::sifi;
  std::size_t firms = 0;
  double n_nodes = 0.0;
  double n_countries = 0.0;
  double n_sic = 0.0;
  double depth = 0.0;
};

// Throws MetricsError(empty_group) when the snapshot has no firm in `group`.
GroupMeans group_means(const Snapshot& snapshot, FirmGroup group);
// Means for every group that has at least one firm, in SIFI, BANK, INSURER order.
std::vector<GroupMeans> group_summary(const Snapshot& snapshot);

}  // namespace ctrlhier
