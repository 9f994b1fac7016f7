#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlhier/error.hpp"

namespace ctrlhier {

// Which node attribute a statistic looks at. sic1/sic2 are the 1- and
// 2-digit truncations of the full SIC code.
enum class LabelKind { country, sic, sic1, sic2 };

std::string_view to_string(LabelKind kind);
// Accepts "country", "sic", "sic1", "sic2" (case-insensitive).
std::optional<LabelKind> parse_label_kind(std::string_view text);

inline constexpr std::string_view kNoSic = "NONE";

bool is_valid_sic(std::string_view sic);

// Leading `digits` characters of a SIC code; "NONE" maps to itself.
std::string sic_prefix(std::string_view sic, int digits);

struct EntityLabelSet {
  std::string country;
  std::string sic;

  friend bool operator==(const EntityLabelSet&, const EntityLabelSet&) = default;
};

// One input record: an entity, its controlling parent (absent for the
// ultimate parent) and its labels.
struct EntityRow {
  std::string id;
  std::optional<std::string> parent;
  std::string country;
  std::string sic;

  friend bool operator==(const EntityRow&, const EntityRow&) = default;
};

class TreeError : public Error {
 public:
  enum class Code {
    empty_input,
    duplicate_entity,
    multiple_roots,
    missing_root,
    unknown_parent,
    cycle_detected,
    unknown_entity,
    cannot_sever_root,
    invalid_label,
    invalid_sic,
  };

  TreeError(Code code, std::string message, std::vector<std::string> entities = {});

  Code code() const noexcept { return code_; }
  // Offending entity ids; for cycle_detected this is the witness path with
  // the first entity repeated at the end.
  const std::vector<std::string>& entities() const noexcept { return entities_; }

 private:
  Code code_;
  std::vector<std::string> entities_;
};

std::string_view to_string(TreeError::Code code);

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();

// A firm's control hierarchy: a labeled rooted tree with every edge pointing
// away from the ultimate parent. Immutable once built. Node indices follow
// lexicographic order of entity ids, which is the iteration order used by
// every computation downstream.
class ControlTree {
 public:
  // Validates `rows` and throws TreeError with the matching code when any
  // structural invariant is violated.
  static ControlTree build(std::string firm_id, std::span<const EntityRow> rows);

  const std::string& firm_id() const noexcept { return firm_id_; }
  std::size_t size() const noexcept { return ids_.size(); }
  NodeIndex root() const noexcept { return root_; }

  const std::string& id(NodeIndex node) const { return ids_[node]; }
  NodeIndex parent(NodeIndex node) const { return parents_[node]; }
  std::span<const NodeIndex> children(NodeIndex node) const;
  std::size_t out_degree(NodeIndex node) const {
    return child_offsets_[node + 1] - child_offsets_[node];
  }
  std::uint32_t level(NodeIndex node) const { return levels_[node]; }
  std::uint32_t depth() const noexcept { return depth_; }
  const EntityLabelSet& labels(NodeIndex node) const { return labels_[node]; }
  std::string label(NodeIndex node, LabelKind kind) const;

  std::optional<NodeIndex> find(std::string_view entity_id) const;
  // Like find() but throws TreeError(unknown_entity).
  NodeIndex at(std::string_view entity_id) const;

  // Nodes in level order; within a level, by index.
  std::span<const NodeIndex> level_order() const { return level_order_; }

  // Row listing sorted by entity id; build() on it reproduces this tree.
  std::vector<EntityRow> rows() const;

  ControlTree with_firm_id(std::string firm_id) const;
  // Replaces the label of `kind` at one node. sic1/sic2 write the truncated
  // code into the full SIC field.
  ControlTree with_label(NodeIndex node, LabelKind kind, std::string value) const;
  // Replaces the label of `kind` at every node; `values` is indexed by node.
  // Nodes whose label already equals the new value are left as they are.
  ControlTree with_labels(LabelKind kind, std::span<const std::string> values) const;

  friend bool operator==(const ControlTree& a, const ControlTree& b);

 private:
  ControlTree() = default;

  std::string firm_id_;
  NodeIndex root_ = 0;
  std::uint32_t depth_ = 0;
  std::vector<std::string> ids_;
  std::vector<NodeIndex> parents_;
  std::vector<EntityLabelSet> labels_;
  std::vector<std::uint32_t> levels_;
  std::vector<std::uint32_t> child_offsets_;
  std::vector<NodeIndex> child_list_;
  std::vector<NodeIndex> level_order_;
};

inline ControlTree build_tree(std::string firm_id, std::span<const EntityRow> rows) {
  return ControlTree::build(std::move(firm_id), rows);
}

struct DegreeDistribution {
  std::map<std::size_t, std::size_t> counts;
  std::map<std::size_t, double> fractions;
  std::size_t n = 0;

  double fraction(std::size_t degree) const;
};

struct DepthHistogram {
  std::vector<std::size_t> counts;  // counts[0] is the root level

  std::uint32_t depth() const { return static_cast<std::uint32_t>(counts.size() - 1); }
};

// Maximum edge count from the root to any node.
std::uint32_t tree_depth(const ControlTree& tree);
DegreeDistribution out_degree_distribution(const ControlTree& tree);
std::vector<std::size_t> out_degrees(const ControlTree& tree);
DepthHistogram depth_histogram(const ControlTree& tree);

// New tree without `entity` and its descendants.
ControlTree sever_subtree(const ControlTree& tree, std::string_view entity);
std::size_t subtree_size(const ControlTree& tree, std::string_view entity);
ControlTree relabel(const ControlTree& tree, std::string_view entity, LabelKind kind,
                    std::string value);

}  // namespace ctrlhier
