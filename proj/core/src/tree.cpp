#include "ctrlhier/tree.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "text_util.hpp"

namespace ctrlhier {

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::country: return "country";
    case LabelKind::sic: return "sic";
    case LabelKind::sic1: return "sic1";
    case LabelKind::sic2: return "sic2";
  }
  return "?";
}

std::optional<LabelKind> parse_label_kind(std::string_view text) {
  const std::string t = detail::lower(detail::trim(text));
  if (t == "country") return LabelKind::country;
  if (t == "sic") return LabelKind::sic;
  if (t == "sic1") return LabelKind::sic1;
  if (t == "sic2") return LabelKind::sic2;
  return std::nullopt;
}

bool is_valid_sic(std::string_view sic) {
  if (sic == kNoSic) return true;
  if (sic.empty() || sic.size() > 4) return false;
  return std::all_of(sic.begin(), sic.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string sic_prefix(std::string_view sic, int digits) {
  if (!is_valid_sic(sic))
    throw TreeError(TreeError::Code::invalid_sic, "invalid SIC code '" + std::string(sic) + "'");
  if (digits != 1 && digits != 2)
    throw TreeError(TreeError::Code::invalid_sic,
                    "SIC prefix length must be 1 or 2, got " + std::to_string(digits));
  if (sic == kNoSic) return std::string(kNoSic);
  return std::string(sic.substr(0, static_cast<std::size_t>(digits)));
}

TreeError::TreeError(Code code, std::string message, std::vector<std::string> entities)
    : Error(std::move(message)), code_(code), entities_(std::move(entities)) {}

std::string_view to_string(TreeError::Code code) {
  using C = TreeError::Code;
  switch (code) {
    case C::empty_input: return "EmptyInput";
    case C::duplicate_entity: return "DuplicateEntity";
    case C::multiple_roots: return "MultipleRoots";
    case C::missing_root: return "MissingRoot";
    case C::unknown_parent: return "UnknownParent";
    case C::cycle_detected: return "CycleDetected";
    case C::unknown_entity: return "UnknownEntity";
    case C::cannot_sever_root: return "CannotSeverRoot";
    case C::invalid_label: return "InvalidLabel";
    case C::invalid_sic: return "InvalidSic";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// Finds a directed cycle in the child -> parent relation. Duplicate rows for
// one entity contribute every parent they name.
std::optional<std::vector<std::string>> find_cycle(std::span<const EntityRow> rows) {
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<std::string_view> names;
  for (const auto& r : rows) {
    if (index.emplace(r.id, names.size()).second) names.push_back(r.id);
  }
  std::vector<std::vector<std::size_t>> out(names.size());
  for (const auto& r : rows) {
    if (!r.parent) continue;
    auto it = index.find(*r.parent);
    if (it != index.end()) out[index.at(r.id)].push_back(it->second);
  }

  enum : std::uint8_t { white, gray, black };
  std::vector<std::uint8_t> color(names.size(), white);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // node, next edge
  for (std::size_t start = 0; start < names.size(); ++start) {
    if (color[start] != white) continue;
    stack.push_back({start, 0});
    color[start] = gray;
    while (!stack.empty()) {
      auto& [node, edge] = stack.back();
      if (edge == out[node].size()) {
        color[node] = black;
        stack.pop_back();
        continue;
      }
      const std::size_t next = out[node][edge++];
      if (color[next] == gray) {
        std::vector<std::string> path;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [next](const auto& f) { return f.first == next; });
        for (; it != stack.end(); ++it) path.emplace_back(names[it->first]);
        path.emplace_back(names[next]);
        return path;
      }
      if (color[next] == white) {
        color[next] = gray;
        stack.push_back({next, 0});
      }
    }
  }
  return std::nullopt;
}

}  // namespace

ControlTree ControlTree::build(std::string firm_id, std::span<const EntityRow> rows) {
  using C = TreeError::Code;
  if (rows.empty())
    throw TreeError(C::empty_input, "firm '" + firm_id + "' has no entities");

  std::vector<EntityRow> clean;
  clean.reserve(rows.size());
  for (const auto& r : rows) {
    EntityRow c;
    c.id = r.id;
    c.parent = r.parent;
    c.country = std::string(detail::trim(r.country));
    c.sic = std::string(detail::trim(r.sic));
    if (c.id.empty()) throw TreeError(C::invalid_label, "empty entity id");
    if (c.parent && c.parent->empty()) c.parent.reset();
    if (c.country.empty())
      throw TreeError(C::invalid_label, "entity '" + c.id + "' has an empty country", {c.id});
    if (!is_valid_sic(c.sic))
      throw TreeError(C::invalid_sic,
                      "entity '" + c.id + "' has invalid SIC code '" + c.sic + "'", {c.id});
    clean.push_back(std::move(c));
  }

  std::unordered_set<std::string_view> known;
  for (const auto& r : clean) known.insert(r.id);
  for (const auto& r : clean) {
    if (r.parent && !known.contains(*r.parent))
      throw TreeError(C::unknown_parent,
                      "entity '" + r.id + "' names unknown parent '" + *r.parent + "'",
                      {r.id, *r.parent});
  }

  if (auto cycle = find_cycle(clean)) {
    std::string message = "control cycle: " + join(*cycle, " -> ");
    throw TreeError(C::cycle_detected, std::move(message), std::move(*cycle));
  }

  std::sort(clean.begin(), clean.end(),
            [](const EntityRow& a, const EntityRow& b) { return a.id < b.id; });
  std::vector<std::string> dups;
  for (std::size_t i = 1; i < clean.size(); ++i) {
    if (clean[i].id == clean[i - 1].id && (dups.empty() || dups.back() != clean[i].id))
      dups.push_back(clean[i].id);
  }
  if (!dups.empty())
    throw TreeError(C::duplicate_entity, "duplicate entity id(s): " + join(dups, ", "), dups);

  std::vector<std::string> roots;
  for (const auto& r : clean)
    if (!r.parent) roots.push_back(r.id);
  if (roots.empty()) throw TreeError(C::missing_root, "firm '" + firm_id + "' has no root");
  if (roots.size() > 1)
    throw TreeError(C::multiple_roots, "multiple roots: " + join(roots, ", "), roots);

  ControlTree t;
  t.firm_id_ = std::move(firm_id);
  const std::size_t n = clean.size();
  t.ids_.reserve(n);
  t.labels_.reserve(n);
  for (auto& r : clean) {
    t.ids_.push_back(r.id);
    t.labels_.push_back({std::move(r.country), std::move(r.sic)});
  }
  t.parents_.assign(n, kNoNode);
  std::vector<std::uint32_t> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!clean[i].parent) {
      t.root_ = static_cast<NodeIndex>(i);
      continue;
    }
    const NodeIndex p = *t.find(*clean[i].parent);
    t.parents_[i] = p;
    ++degree[p];
  }
  t.child_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) t.child_offsets_[i + 1] = t.child_offsets_[i] + degree[i];
  t.child_list_.resize(n - 1);
  std::vector<std::uint32_t> fill(t.child_offsets_.begin(), t.child_offsets_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (t.parents_[i] != kNoNode) t.child_list_[fill[t.parents_[i]]++] = static_cast<NodeIndex>(i);
  }

  t.levels_.assign(n, 0);
  t.level_order_.reserve(n);
  t.level_order_.push_back(t.root_);
  for (std::size_t head = 0; head < t.level_order_.size(); ++head) {
    const NodeIndex v = t.level_order_[head];
    for (NodeIndex c : t.children(v)) {
      t.levels_[c] = t.levels_[v] + 1;
      t.level_order_.push_back(c);
    }
  }
  t.depth_ = t.levels_[t.level_order_.back()];
  return t;
}

std::span<const NodeIndex> ControlTree::children(NodeIndex node) const {
  return std::span<const NodeIndex>(child_list_).subspan(
      child_offsets_[node], child_offsets_[node + 1] - child_offsets_[node]);
}

std::string ControlTree::label(NodeIndex node, LabelKind kind) const {
  const auto& l = labels_[node];
  switch (kind) {
    case LabelKind::country: return l.country;
    case LabelKind::sic: return l.sic;
    case LabelKind::sic1: return sic_prefix(l.sic, 1);
    case LabelKind::sic2: return sic_prefix(l.sic, 2);
  }
  return {};
}

std::optional<NodeIndex> ControlTree::find(std::string_view entity_id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), entity_id);
  if (it == ids_.end() || *it != entity_id) return std::nullopt;
  return static_cast<NodeIndex>(it - ids_.begin());
}

NodeIndex ControlTree::at(std::string_view entity_id) const {
  if (auto i = find(entity_id)) return *i;
  throw TreeError(TreeError::Code::unknown_entity,
                  "unknown entity '" + std::string(entity_id) + "' in firm '" + firm_id_ + "'",
                  {std::string(entity_id)});
}

std::vector<EntityRow> ControlTree::rows() const {
  std::vector<EntityRow> out;
  out.reserve(size());
  for (NodeIndex i = 0; i < size(); ++i) {
    EntityRow r{ids_[i], std::nullopt, labels_[i].country, labels_[i].sic};
    if (parents_[i] != kNoNode) r.parent = ids_[parents_[i]];
    out.push_back(std::move(r));
  }
  return out;
}

ControlTree ControlTree::with_firm_id(std::string firm_id) const {
  ControlTree t = *this;
  t.firm_id_ = std::move(firm_id);
  return t;
}

namespace {

std::string checked_label(LabelKind kind, std::string value) {
  if (kind == LabelKind::country) {
    std::string v(detail::trim(value));
    if (v.empty()) throw TreeError(TreeError::Code::invalid_label, "empty country label");
    return v;
  }
  if (!is_valid_sic(value))
    throw TreeError(TreeError::Code::invalid_sic, "invalid SIC code '" + value + "'");
  if ((kind == LabelKind::sic1 && value != kNoSic && value.size() != 1) ||
      (kind == LabelKind::sic2 && value != kNoSic && value.size() > 2))
    throw TreeError(TreeError::Code::invalid_sic,
                    "SIC code '" + value + "' is too long for label kind " +
                        std::string(to_string(kind)));
  return value;
}

}  // namespace

ControlTree ControlTree::with_label(NodeIndex node, LabelKind kind, std::string value) const {
  ControlTree t = *this;
  auto& l = t.labels_.at(node);
  (kind == LabelKind::country ? l.country : l.sic) = checked_label(kind, std::move(value));
  return t;
}

ControlTree ControlTree::with_labels(LabelKind kind, std::span<const std::string> values) const {
  if (values.size() != size())
    throw TreeError(TreeError::Code::invalid_label, "label vector size does not match tree size");
  ControlTree t = *this;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (label(static_cast<NodeIndex>(i), kind) == values[i]) continue;
    auto& l = t.labels_[i];
    (kind == LabelKind::country ? l.country : l.sic) = checked_label(kind, values[i]);
  }
  return t;
}

bool operator==(const ControlTree& a, const ControlTree& b) {
  return a.firm_id_ == b.firm_id_ && a.ids_ == b.ids_ && a.parents_ == b.parents_ &&
         a.labels_ == b.labels_;
}

double DegreeDistribution::fraction(std::size_t degree) const {
  auto it = fractions.find(degree);
  return it == fractions.end() ? 0.0 : it->second;
}

std::uint32_t tree_depth(const ControlTree& tree) { return tree.depth(); }

std::vector<std::size_t> out_degrees(const ControlTree& tree) {
  std::vector<std::size_t> d(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) d[i] = tree.out_degree(i);
  return d;
}

DegreeDistribution out_degree_distribution(const ControlTree& tree) {
  DegreeDistribution dist;
  dist.n = tree.size();
  for (NodeIndex i = 0; i < tree.size(); ++i) ++dist.counts[tree.out_degree(i)];
  for (const auto& [degree, count] : dist.counts)
    dist.fractions[degree] = static_cast<double>(count) / static_cast<double>(dist.n);
  return dist;
}

DepthHistogram depth_histogram(const ControlTree& tree) {
  DepthHistogram h;
  h.counts.assign(tree.depth() + 1, 0);
  for (NodeIndex i = 0; i < tree.size(); ++i) ++h.counts[tree.level(i)];
  return h;
}

namespace {

std::vector<bool> subtree_mask(const ControlTree& tree, NodeIndex top) {
  std::vector<bool> in(tree.size(), false);
  std::vector<NodeIndex> stack{top};
  while (!stack.empty()) {
    const NodeIndex v = stack.back();
    stack.pop_back();
    in[v] = true;
    for (NodeIndex c : tree.children(v)) stack.push_back(c);
  }
  return in;
}

}  // namespace

std::size_t subtree_size(const ControlTree& tree, std::string_view entity) {
  const auto mask = subtree_mask(tree, tree.at(entity));
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

ControlTree sever_subtree(const ControlTree& tree, std::string_view entity) {
  const NodeIndex node = tree.at(entity);
  if (node == tree.root())
    throw TreeError(TreeError::Code::cannot_sever_root,
                    "cannot sever the ultimate parent '" + std::string(entity) + "'",
                    {std::string(entity)});
  const auto mask = subtree_mask(tree, node);
  auto all = tree.rows();
  std::vector<EntityRow> kept;
  kept.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i)
    if (!mask[i]) kept.push_back(std::move(all[i]));
  return ControlTree::build(tree.firm_id(), kept);
}

ControlTree relabel(const ControlTree& tree, std::string_view entity, LabelKind kind,
                    std::string value) {
  return tree.with_label(tree.at(entity), kind, std::move(value));
}

}  // namespace ctrlhier
