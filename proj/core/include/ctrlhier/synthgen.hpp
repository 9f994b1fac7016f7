#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "ctrlhier/error.hpp"
#include "ctrlhier/nullmodel.hpp"
#include "ctrlhier/tree.hpp"

namespace ctrlhier {

class SynthError : public Error {
 public:
  SynthError(std::string message) : Error(std::move(message)) {}
};

namespace topology {

// Complete k-ary tree of the given depth.
struct Regular {
  std::uint32_t k = 2;
  std::uint32_t depth = 2;
};

// Nodes arrive one at a time and attach to an existing node with
// probability proportional to out-degree + smoothing.
struct Preferential {
  std::size_t n = 1000;
  double smoothing = 1.0;
};

// Each new node attaches to a uniformly chosen existing node.
struct Uniform {
  std::size_t n = 1000;
};

}  // namespace topology

struct TopologyModel {
  std::variant<topology::Regular, topology::Preferential, topology::Uniform> kind;
  std::uint64_t seed = 0;
};

namespace labelling {

// Root gets root_label, every other node copies its parent.
struct PerfectCopy {
  std::string root_label;
};

// Every node drawn independently from dist.
struct Iid {
  LabelDistribution dist;
};

// Non-root nodes keep the parent's label with probability stay, otherwise
// draw from base. The root draws from base.
struct Markov {
  double stay = 0.5;
  LabelDistribution base;
};

}  // namespace labelling

struct LabelModel {
  std::variant<labelling::PerfectCopy, labelling::Iid, labelling::Markov> kind;
  std::uint64_t seed = 0;
};

// Unlabeled scaffold: every node has country "X" and SIC "NONE". Entity ids
// are zero-padded ordinals in arrival order, root first.
ControlTree gen_tree(const TopologyModel& model, std::string firm_id = "SYN");

ControlTree assign_labels(const ControlTree& tree, LabelKind kind, const LabelModel& model);

// Uniform distribution over the given labels.
LabelDistribution uniform_distribution(LabelKind kind, std::span<const std::string> labels);
// Weights normalized to sum to one; labels must be distinct.
LabelDistribution make_distribution(LabelKind kind, std::span<const std::string> labels,
                                    std::span<const double> weights);

}  // namespace ctrlhier
