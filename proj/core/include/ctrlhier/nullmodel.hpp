#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctrlhier/error.hpp"
#include "ctrlhier/tree.hpp"

namespace ctrlhier {

class NullModelError : public Error {
 public:
  enum class Code { all_tied, bad_parameter };
  NullModelError(Code code, std::string message) : Error(std::move(message)), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

// Label frequencies, sorted by label; every weight is positive and the
// weights sum to one.
struct LabelDistribution {
  LabelKind label_kind = LabelKind::country;
  std::vector<std::pair<std::string, double>> weights;

  double weight(std::string_view label) const;
  // sum of squared weights: the chance two independent draws coincide
  double collision_probability() const;
};

// Frequencies over all nodes of the tree, root included.
LabelDistribution empirical_label_distribution(const ControlTree& tree, LabelKind kind);

struct ResampleOptions {
  // Keep level-1 labels at their observed values (only levels >= 2 drawn).
  bool fix_level_one = false;
  // Permute the observed labels of the resampled nodes instead of drawing
  // them independently from the distribution.
  bool permutation = false;
};

// Same topology; every non-root node's label of `dist.label_kind` redrawn
// (the root keeps its label). Other label kinds are untouched.
ControlTree resample_labels(const ControlTree& tree, const LabelDistribution& dist,
                            std::uint64_t seed, const ResampleOptions& options = {});

struct BootstrapOptions {
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;  // 0 = hardware concurrency
  ResampleOptions resample;
};

struct NullDistribution {
  LabelKind label_kind = LabelKind::country;
  std::size_t replications = 0;
  std::vector<double> values;  // simulated t_total, indexed by replication
  double mean = 0.0;
  double stdev = 0.0;  // divisor R - 1
  double actual = 0.0;
  double quantile = 0.0;  // midrank position of `actual` among `values`
  std::uint64_t seed = 0;

  friend bool operator==(const NullDistribution&, const NullDistribution&) = default;
};

// Replication i draws with seed substream_seed(seed, i), so results do not
// depend on the worker count.
NullDistribution bootstrap_perfect_tree(const ControlTree& tree, LabelKind kind,
                                        const BootstrapOptions& options = {});

// (#{values < actual} + 0.5 #{values == actual}) / R
double midrank_quantile(std::span<const double> values, double actual);

struct SignificanceResult {
  double z_vs_one = 0.0;
  double z_vs_zero = 0.0;
  bool reject_one = false;
  bool reject_zero = false;
  double alpha = 0.05;
  double critical_value = 0.0;
};

// Two-sided z-tests of actual = 1 and actual = 0 scaled by the null stdev.
// Throws NullModelError(all_tied) when stdev is zero.
SignificanceResult significance_tests(const NullDistribution& nd, double alpha = 0.05);

}  // namespace ctrlhier
