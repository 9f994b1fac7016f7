#include "ctrlhier/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ctrlhier {

DescriptiveStats describe(const ControlTree& tree) {
  std::set<std::string_view> countries;
  std::set<std::string_view> sics;
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    countries.insert(tree.labels(i).country);
    sics.insert(tree.labels(i).sic);
  }
  return {tree.firm_id(), tree.size(), countries.size(), sics.size(), tree.depth()};
}

namespace {

std::vector<std::string> node_labels(const ControlTree& tree, LabelKind kind) {
  std::vector<std::string> out;
  out.reserve(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) out.push_back(tree.label(i, kind));
  return out;
}

}  // namespace

std::size_t count_parent_matches(const ControlTree& tree, LabelKind kind) {
  const auto labels = node_labels(tree, kind);
  std::size_t matched = 0;
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const NodeIndex p = tree.parent(i);
    if (p != kNoNode && labels[i] == labels[p]) ++matched;
  }
  return matched;
}

PerfectTreeResult perfect_tree_statistic(const ControlTree& tree, LabelKind kind) {
  PerfectTreeResult r;
  r.label_kind = kind;
  r.n_nodes = tree.size();
  r.matched = count_parent_matches(tree, kind);
  r.t_total = static_cast<double>(r.matched) / static_cast<double>(r.n_nodes);
  if (r.n_nodes < 2) {
    r.degenerate = true;
    r.t_nonroot = 0.0;
  } else {
    r.t_nonroot = static_cast<double>(r.matched) / static_cast<double>(r.n_nodes - 1);
  }
  return r;
}

const TransitionRecord* TransitionTable::find(std::string_view label) const {
  auto it = std::find_if(records.begin(), records.end(),
                         [&](const TransitionRecord& r) { return r.label == label; });
  return it == records.end() ? nullptr : &*it;
}

void TransitionCounts::add(const ControlTree& tree) {
  const auto labels = node_labels(tree, kind_);
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const NodeIndex p = tree.parent(i);
    if (p == kNoNode) continue;
    auto& [children, same] = counts_[labels[p]];
    ++children;
    if (labels[i] == labels[p]) ++same;
  }
}

void TransitionCounts::merge(const TransitionCounts& other) {
  for (const auto& [label, c] : other.counts_) {
    auto& mine = counts_[label];
    mine.first += c.first;
    mine.second += c.second;
  }
}

TransitionTable TransitionCounts::table() const {
  TransitionTable t;
  t.label_kind = kind_;
  for (const auto& [label, c] : counts_) {
    if (c.first == 0) continue;
    t.records.push_back({label, c.first, c.second,
                         static_cast<double>(c.second) / static_cast<double>(c.first), 0});
  }
  std::stable_sort(t.records.begin(), t.records.end(),
                   [](const TransitionRecord& a, const TransitionRecord& b) {
                     if (a.p_in != b.p_in) return a.p_in > b.p_in;
                     return a.label < b.label;
                   });
  for (std::size_t i = 0; i < t.records.size(); ++i) t.records[i].rank = i + 1;
  return t;
}

TransitionTable transition_table(std::span<const ControlTree> trees, LabelKind kind) {
  TransitionCounts counts(kind);
  for (const auto& t : trees) counts.add(t);
  return counts.table();
}

TransitionTable transition_table(const Snapshot& snapshot, LabelKind kind) {
  TransitionCounts counts(kind);
  for (const auto& f : snapshot.firms()) counts.add(f.tree);
  return counts.table();
}

double gini(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw MetricsError(MetricsError::Code::degenerate_input, "Gini needs at least 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // sum_ij |xi - xj| = 2 * sum_i (2i - n - 1) x_(i), i 1-based.
  long double weighted = 0.0L;
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += (2.0L * static_cast<long double>(i + 1) - static_cast<long double>(n) - 1.0L) *
                sorted[i];
    total += sorted[i];
  }
  if (!(total > 0.0L))
    throw MetricsError(MetricsError::Code::degenerate_input, "Gini undefined for zero mean");
  return static_cast<double>(weighted / (static_cast<long double>(n) * total));
}

double gini_of_degrees(const ControlTree& tree) {
  std::vector<double> degrees;
  degrees.reserve(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) degrees.push_back(static_cast<double>(tree.out_degree(i)));
  return gini(degrees);
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rank_corr(std::span<const double> x, std::span<const double> y) {
  using C = MetricsError::Code;
  if (x.size() != y.size())
    throw MetricsError(C::length_mismatch, "rank correlation needs sequences of equal length");
  if (x.size() < 3)
    throw MetricsError(C::degenerate_input, "rank correlation needs at least 3 observations");
  const auto rx = midranks(x);
  const auto ry = midranks(y);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;  // midranks always average to (n+1)/2
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw MetricsError(C::degenerate_input, "rank correlation undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::string> HierarchyFractionTable::bucket_labels() const {
  std::vector<std::string> out;
  for (std::size_t l = 1; l <= bucket_cap; ++l) out.push_back(std::to_string(l));
  out.push_back(">" + std::to_string(bucket_cap + 1));
  return out;
}

HierarchyFractionTable hierarchy_fraction_table(const Snapshot& snapshot, std::size_t bucket_cap) {
  if (bucket_cap < 1)
    throw MetricsError(MetricsError::Code::degenerate_input, "bucket cap must be at least 1");
  HierarchyFractionTable table;
  table.bucket_cap = bucket_cap;
  std::vector<std::size_t> pooled(bucket_cap + 1, 0);
  std::size_t pooled_total = 0;
  for (const auto& firm : snapshot.firms()) {
    std::vector<std::size_t> counts(bucket_cap + 1, 0);
    const auto hist = depth_histogram(firm.tree);
    for (std::size_t level = 1; level < hist.counts.size(); ++level)
      counts[std::min(level, bucket_cap + 1) - 1] += hist.counts[level];
    const std::size_t nonroot = firm.tree.size() - 1;
    HierarchyFractionRow row{firm.id(), std::vector<double>(bucket_cap + 1, 0.0)};
    for (std::size_t b = 0; b <= bucket_cap; ++b) {
      if (nonroot) row.fractions[b] = static_cast<double>(counts[b]) / static_cast<double>(nonroot);
      pooled[b] += counts[b];
    }
    pooled_total += nonroot;
    table.rows.push_back(std::move(row));
  }
  table.pooled.assign(bucket_cap + 1, 0.0);
  if (pooled_total) {
    for (std::size_t b = 0; b <= bucket_cap; ++b)
      table.pooled[b] = static_cast<double>(pooled[b]) / static_cast<double>(pooled_total);
  }
  return table;
}

std::vector<std::pair<std::string, std::size_t>> corpus_label_distribution(
    const Snapshot& snapshot, LabelKind kind, std::size_t top_k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& firm : snapshot.firms())
    for (NodeIndex i = 0; i < firm.tree.size(); ++i) ++counts[firm.tree.label(i, kind)];
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

GroupMeans group_means(const Snapshot& snapshot, FirmGroup group) {
  GroupMeans m;
  m.group = group;
  for (const auto& firm : snapshot.firms()) {
    if (firm.group != group) continue;
    const auto d = describe(firm.tree);
    ++m.firms;
    m.n_nodes += static_cast<double>(d.n_nodes);
    m.n_countries += static_cast<double>(d.n_countries);
    m.n_sic += static_cast<double>(d.n_sic);
    m.depth += d.depth;
  }
  if (m.firms == 0)
    throw MetricsError(MetricsError::Code::empty_group,
                       "no firms in group " + std::string(to_string(group)));
  const double k = static_cast<double>(m.firms);
  m.n_nodes /= k;
  m.n_countries /= k;
  m.n_sic /= k;
  m.depth /= k;
  return m;
}

std::vector<GroupMeans> group_summary(const Snapshot& snapshot) {
  std::vector<GroupMeans> out;
  for (FirmGroup g : {FirmGroup::sifi, FirmGroup::bank, FirmGroup::insurer})
    if (snapshot.count(g) > 0) out.push_back(group_means(snapshot, g));
  return out;
}

}  // namespace ctrlhier
