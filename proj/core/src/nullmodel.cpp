#include "ctrlhier/nullmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "ctrlhier/parallel.hpp"
#include "ctrlhier/random.hpp"

namespace ctrlhier {

double LabelDistribution::weight(std::string_view label) const {
  auto it = std::lower_bound(weights.begin(), weights.end(), label,
                             [](const auto& w, std::string_view l) { return w.first < l; });
  return it != weights.end() && it->first == label ? it->second : 0.0;
}

double LabelDistribution::collision_probability() const {
  double s = 0.0;
  for (const auto& [label, w] : weights) s += w * w;
  return s;
}

LabelDistribution empirical_label_distribution(const ControlTree& tree, LabelKind kind) {
  std::map<std::string, std::size_t> counts;
  for (NodeIndex i = 0; i < tree.size(); ++i) ++counts[tree.label(i, kind)];
  LabelDistribution d;
  d.label_kind = kind;
  const double n = static_cast<double>(tree.size());
  for (const auto& [label, c] : counts) d.weights.emplace_back(label, static_cast<double>(c) / n);
  return d;
}

namespace {

// Integer-coded view of one tree under one label kind. Codes 0..k-1 are the
// distribution's labels; tree labels missing from it get codes from k on.
struct CodedTree {
  std::vector<std::uint32_t> parent;     // kNoNode for the root
  std::vector<std::uint32_t> actual;     // observed label codes
  std::vector<NodeIndex> resampled;      // nodes whose label is redrawn, by index
  std::vector<std::string> code_labels;  // code -> label
  std::vector<double> weights;           // distribution weight per code < k
};

CodedTree encode(const ControlTree& tree, const LabelDistribution& dist,
                 const ResampleOptions& options) {
  if (dist.weights.empty())
    throw NullModelError(NullModelError::Code::bad_parameter, "empty label distribution");
  CodedTree c;
  std::map<std::string, std::uint32_t, std::less<>> code;
  for (const auto& [label, w] : dist.weights) {
    if (!(w > 0.0))
      throw NullModelError(NullModelError::Code::bad_parameter,
                           "label distribution weights must be positive");
    code.emplace(label, static_cast<std::uint32_t>(c.code_labels.size()));
    c.code_labels.push_back(label);
    c.weights.push_back(w);
  }
  c.parent.resize(tree.size());
  c.actual.resize(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    c.parent[i] = tree.parent(i);
    auto label = tree.label(i, dist.label_kind);
    auto [it, inserted] = code.try_emplace(label, static_cast<std::uint32_t>(c.code_labels.size()));
    if (inserted) c.code_labels.push_back(std::move(label));
    c.actual[i] = it->second;
    if (i == tree.root()) continue;
    if (options.fix_level_one && tree.level(i) == 1) continue;
    c.resampled.push_back(i);
  }
  return c;
}

class Resampler {
 public:
  Resampler(const CodedTree& coded, const ResampleOptions& options)
      : coded_(coded), options_(options), sampler_(coded.weights) {}

  // Fills `codes` (sized to the tree) with one replication's labels.
  void draw(std::uint64_t seed, std::vector<std::uint32_t>& codes) const {
    codes = coded_.actual;
    Rng rng(seed);
    if (options_.permutation) {
      std::vector<std::uint32_t> pool;
      pool.reserve(coded_.resampled.size());
      for (NodeIndex i : coded_.resampled) pool.push_back(coded_.actual[i]);
      rng.shuffle(std::span(pool));
      for (std::size_t k = 0; k < pool.size(); ++k) codes[coded_.resampled[k]] = pool[k];
    } else {
      for (NodeIndex i : coded_.resampled) codes[i] = static_cast<std::uint32_t>(sampler_(rng));
    }
  }

  std::size_t matches(const std::vector<std::uint32_t>& codes) const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const auto p = coded_.parent[i];
      if (p != kNoNode && codes[i] == codes[p]) ++m;
    }
    return m;
  }

 private:
  const CodedTree& coded_;
  ResampleOptions options_;
  CategoricalSampler sampler_;
};

}  // namespace

ControlTree resample_labels(const ControlTree& tree, const LabelDistribution& dist,
                            std::uint64_t seed, const ResampleOptions& options) {
  const CodedTree coded = encode(tree, dist, options);
  std::vector<std::uint32_t> codes;
  Resampler(coded, options).draw(seed, codes);
  std::vector<std::string> values;
  values.reserve(codes.size());
  for (auto c : codes) values.push_back(coded.code_labels[c]);
  return tree.with_labels(dist.label_kind, values);
}

double midrank_quantile(std::span<const double> values, double actual) {
  if (values.empty()) return 0.0;
  std::size_t below = 0, tied = 0;
  for (double v : values) {
    if (v < actual)
      ++below;
    else if (v == actual)
      ++tied;
  }
  return (static_cast<double>(below) + 0.5 * static_cast<double>(tied)) /
         static_cast<double>(values.size());
}

NullDistribution bootstrap_perfect_tree(const ControlTree& tree, LabelKind kind,
                                        const BootstrapOptions& options) {
  if (options.replications < 1)
    throw NullModelError(NullModelError::Code::bad_parameter, "need at least one replication");
  const auto dist = empirical_label_distribution(tree, kind);
  const CodedTree coded = encode(tree, dist, options.resample);
  const Resampler resampler(coded, options.resample);
  const double n = static_cast<double>(tree.size());

  NullDistribution nd;
  nd.label_kind = kind;
  nd.replications = options.replications;
  nd.seed = options.seed;
  nd.actual = static_cast<double>(resampler.matches(coded.actual)) / n;
  nd.values.assign(options.replications, 0.0);

  std::vector<std::uint64_t> matched(options.replications);
  parallel_for(options.replications, options.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> codes;
    for (std::size_t r = begin; r < end; ++r) {
      resampler.draw(substream_seed(options.seed, r), codes);
      matched[r] = resampler.matches(codes);
      nd.values[r] = static_cast<double>(matched[r]) / n;
    }
  });

  // Moments from the integer match counts, so a fully tied sample has
  // exactly zero spread.
  unsigned __int128 total = 0, total_sq = 0;
  for (auto m : matched) {
    total += m;
    total_sq += static_cast<unsigned __int128>(m) * m;
  }
  const double reps = static_cast<double>(nd.replications);
  nd.mean = static_cast<double>(total) / (reps * n);
  if (nd.replications > 1) {
    const unsigned __int128 spread = total_sq * nd.replications - total * total;
    nd.stdev = std::sqrt(static_cast<double>(spread) / (reps * (reps - 1.0))) / n;
  }
  nd.quantile = midrank_quantile(nd.values, nd.actual);
  return nd;
}

SignificanceResult significance_tests(const NullDistribution& nd, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw NullModelError(NullModelError::Code::bad_parameter, "alpha must lie in (0, 1)");
  if (!(nd.stdev > 0.0))
    throw NullModelError(NullModelError::Code::all_tied,
                         "null distribution has zero spread; z-tests undefined");
  SignificanceResult r;
  r.alpha = alpha;
  r.critical_value = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - alpha / 2.0);
  r.z_vs_one = (nd.actual - 1.0) / nd.stdev;
  r.z_vs_zero = nd.actual / nd.stdev;
  r.reject_one = std::abs(r.z_vs_one) > r.critical_value;
  r.reject_zero = std::abs(r.z_vs_zero) > r.critical_value;
  return r;
}

}  // namespace ctrlhier
