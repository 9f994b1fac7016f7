#include "ctrlhier/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ctrlhier/random.hpp"

namespace ctrlhier {

namespace {

std::vector<EntityRow> scaffold(const std::vector<std::size_t>& parent_of) {
  // parent_of[0] is ignored (root).
  const std::size_t width = std::to_string(parent_of.size()).size();
  auto name = [width](std::size_t i) {
    std::string digits = std::to_string(i);
    return "N" + std::string(width - digits.size(), '0') + digits;
  };
  std::vector<EntityRow> rows;
  rows.reserve(parent_of.size());
  for (std::size_t i = 0; i < parent_of.size(); ++i) {
    EntityRow r{name(i), std::nullopt, "X", std::string(kNoSic)};
    if (i > 0) r.parent = name(parent_of[i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::size_t> regular_parents(const topology::Regular& m) {
  if (m.k < 1) throw SynthError("regular topology needs k >= 1");
  double count = 0.0;
  for (std::uint32_t l = 0; l <= m.depth; ++l) count += std::pow(static_cast<double>(m.k), l);
  if (count > 5e7) throw SynthError("regular topology too large");
  std::vector<std::size_t> parent{0};
  std::size_t level_begin = 0, level_end = 1;
  for (std::uint32_t l = 0; l < m.depth; ++l) {
    for (std::size_t p = level_begin; p < level_end; ++p)
      for (std::uint32_t c = 0; c < m.k; ++c) parent.push_back(p);
    level_begin = level_end;
    level_end = parent.size();
  }
  return parent;
}

std::vector<std::size_t> preferential_parents(const topology::Preferential& m, std::uint64_t seed) {
  if (m.n < 1) throw SynthError("preferential topology needs n >= 1");
  if (!(m.smoothing >= 0.0) || !std::isfinite(m.smoothing))
    throw SynthError("preferential smoothing must be >= 0");
  Rng rng(seed);
  std::vector<std::size_t> parent{0};
  parent.reserve(m.n);
  // Each edge contributes its parent once, so a uniform pick from `edges`
  // is a pick proportional to out-degree.
  std::vector<std::size_t> edges;
  edges.reserve(m.n);
  for (std::size_t v = 1; v < m.n; ++v) {
    const double existing = static_cast<double>(v);
    const double total = static_cast<double>(edges.size()) + m.smoothing * existing;
    std::size_t p;
    if (edges.empty() || rng.uniform() * total < m.smoothing * existing)
      p = static_cast<std::size_t>(rng.below(v));
    else
      p = edges[rng.below(edges.size())];
    parent.push_back(p);
    edges.push_back(p);
  }
  return parent;
}

std::vector<std::size_t> uniform_parents(const topology::Uniform& m, std::uint64_t seed) {
  if (m.n < 1) throw SynthError("uniform topology needs n >= 1");
  Rng rng(seed);
  std::vector<std::size_t> parent{0};
  parent.reserve(m.n);
  for (std::size_t v = 1; v < m.n; ++v) parent.push_back(static_cast<std::size_t>(rng.below(v)));
  return parent;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_distribution(const LabelDistribution& d, LabelKind kind) {
  if (d.weights.empty()) throw SynthError("label distribution is empty");
  double total = 0.0;
  for (const auto& [label, w] : d.weights) {
    if (!(w > 0.0)) throw SynthError("label weights must be positive");
    total += w;
    if (kind != LabelKind::country && !is_valid_sic(label))
      throw SynthError("label '" + label + "' is not a valid SIC code");
  }
  if (std::abs(total - 1.0) > 1e-9) throw SynthError("label weights must sum to 1");
}

std::vector<double> weights_of(const LabelDistribution& d) {
  std::vector<double> w;
  for (const auto& [label, weight] : d.weights) w.push_back(weight);
  return w;
}

}  // namespace

ControlTree gen_tree(const TopologyModel& model, std::string firm_id) {
  const auto parents = std::visit(
      overloaded{[](const topology::Regular& m) { return regular_parents(m); },
                 [&](const topology::Preferential& m) { return preferential_parents(m, model.seed); },
                 [&](const topology::Uniform& m) { return uniform_parents(m, model.seed); }},
      model.kind);
  return ControlTree::build(std::move(firm_id), scaffold(parents));
}

ControlTree assign_labels(const ControlTree& tree, LabelKind kind, const LabelModel& model) {
  std::vector<std::string> values(tree.size());
  Rng rng(model.seed);
  std::visit(
      overloaded{
          [&](const labelling::PerfectCopy& m) {
            if (kind != LabelKind::country && !is_valid_sic(m.root_label))
              throw SynthError("root label '" + m.root_label + "' is not a valid SIC code");
            if (kind == LabelKind::country && m.root_label.empty())
              throw SynthError("root label must not be empty");
            for (auto& v : values) v = m.root_label;
          },
          [&](const labelling::Iid& m) {
            check_distribution(m.dist, kind);
            const CategoricalSampler sampler(weights_of(m.dist));
            for (NodeIndex i : tree.level_order()) values[i] = m.dist.weights[sampler(rng)].first;
          },
          [&](const labelling::Markov& m) {
            if (!(m.stay >= 0.0 && m.stay <= 1.0)) throw SynthError("stay must lie in [0, 1]");
            check_distribution(m.base, kind);
            const CategoricalSampler sampler(weights_of(m.base));
            for (NodeIndex i : tree.level_order()) {
              const NodeIndex p = tree.parent(i);
              if (p != kNoNode && rng.uniform() < m.stay)
                values[i] = values[p];
              else
                values[i] = m.base.weights[sampler(rng)].first;
            }
          }},
      model.kind);
  return tree.with_labels(kind, values);
}

LabelDistribution make_distribution(LabelKind kind, std::span<const std::string> labels,
                                    std::span<const double> weights) {
  if (labels.size() != weights.size() || labels.empty())
    throw SynthError("labels and weights must be non-empty and of equal length");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw SynthError("labels must be distinct");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw SynthError("weights must be positive");
    total += w;
  }
  LabelDistribution d;
  d.label_kind = kind;
  for (std::size_t i = 0; i < labels.size(); ++i) d.weights.emplace_back(labels[i], weights[i] / total);
  std::sort(d.weights.begin(), d.weights.end());
  return d;
}

LabelDistribution uniform_distribution(LabelKind kind, std::span<const std::string> labels) {
  std::vector<double> w(labels.size(), 1.0);
  return make_distribution(kind, labels, w);
}

}  // namespace ctrlhier
