#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctrlhier/metrics.hpp"
#include "ctrlhier/nullmodel.hpp"
#include "ctrlhier/powerlaw.hpp"
#include "ctrlhier/snapshot.hpp"

namespace ctrlhier {

enum class ReportFormat { csv, json, table };
std::optional<ReportFormat> parse_report_format(std::string_view text);

struct ReportOptions {
  std::vector<LabelKind> labels{LabelKind::country};
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t bucket_cap = 9;
  unsigned workers = 1;
  ResampleOptions resample;
};

struct FirmPowerLaw {
  std::string firm_id;
  std::optional<PowerLawFit> fit;
  std::string skip_reason;
};

struct FirmGini {
  std::string firm_id;
  std::optional<double> gini;
  std::string skip_reason;
};

struct FirmPerfectTree {
  std::string firm_id;
  PerfectTreeResult statistic;
  NullDistribution null;
  std::optional<SignificanceResult> significance;
  std::string skip_reason;  // why significance is missing
};

struct LabelSection {
  LabelKind label_kind = LabelKind::country;
  TransitionTable transitions;
  std::vector<FirmPerfectTree> perfect_trees;
};

struct Correlation {
  std::string measure;  // correlated against firm size
  std::size_t n = 0;
  std::optional<double> rho;
  std::string skip_reason;
};

// Everything the `metrics` command reports for one snapshot. Every firm
// appears in every per-firm section, with a skip reason where a statistic
// is undefined.
struct ReportBundle {
  std::string as_of;
  std::vector<DescriptiveStats> descriptive;
  std::vector<GroupMeans> group_means;
  std::vector<FirmPowerLaw> powerlaw;
  std::vector<FirmGini> gini;
  std::vector<LabelSection> labels;
  HierarchyFractionTable hierarchy;
  std::optional<std::vector<Correlation>> correlations;
  std::string correlations_notice;
};

FirmPowerLaw fit_firm_power_law(const ControlTree& tree, unsigned workers = 1);
ReportBundle build_report(const Snapshot& snapshot, const ReportOptions& options);

void render_report(const ReportBundle& bundle, std::ostream& out, ReportFormat format);
void render_descriptive(const Snapshot& snapshot, std::ostream& out, ReportFormat format);
void render_powerlaw(const Snapshot& snapshot, std::ostream& out, ReportFormat format,
                     unsigned workers = 1);

// Per-figure CSV series: label distributions and hierarchy fractions.
void write_plot_data(const Snapshot& snapshot, const std::filesystem::path& dir,
                     std::size_t bucket_cap = 9);

struct LabelDelta {
  LabelKind label_kind = LabelKind::country;
  double t_earlier = 0.0;
  double t_later = 0.0;
  double t_delta = 0.0;
  double quantile_earlier = 0.0;
  double quantile_later = 0.0;
  double quantile_delta = 0.0;
};

struct FirmDiff {
  std::string firm_id;
  long long d_nodes = 0;
  long long d_countries = 0;
  long long d_sic = 0;
  long long d_depth = 0;
  std::optional<double> exponent_change;
  std::vector<LabelDelta> labels;
};

struct LabelChangeSummary {
  LabelKind label_kind = LabelKind::country;
  std::size_t moved_toward_one = 0;
  std::size_t quantile_declined = 0;
};

struct SnapshotDiff {
  std::string earlier_as_of;
  std::string later_as_of;
  std::vector<FirmDiff> firms;  // common firms, by firm_id
  std::vector<std::string> only_earlier;
  std::vector<std::string> only_later;
  std::vector<LabelChangeSummary> summary;
};

class CompareError : public Error {
 public:
  using Error::Error;
};

// Firms are matched by firm_id; throws CompareError when none are shared.
SnapshotDiff compare_snapshots(const Snapshot& earlier, const Snapshot& later,
                               const ReportOptions& options);
void render_diff(const SnapshotDiff& diff, std::ostream& out, ReportFormat format);

struct RestructureEvent {
  enum class Kind { sever, relabel };
  Kind kind = Kind::sever;
  std::string entity;
  LabelKind label_kind = LabelKind::country;  // relabel only
  std::string value;                          // relabel only

  std::string describe() const;
};

class RestructureError : public Error {
 public:
  RestructureError(std::size_t event_index, std::string message)
      : Error(std::move(message)), event_index_(event_index) {}
  // 0-based position in the script; for parse errors, the 1-based line.
  std::size_t event_index() const noexcept { return event_index_; }

 private:
  std::size_t event_index_;
};

// One event per line: "SEVER <entity>" or "RELABEL <entity> <kind> <label>".
// Blank lines and lines starting with '#' are skipped.
std::vector<RestructureEvent> parse_script(std::istream& in);

struct TrajectoryPoint {
  std::string event;  // "start" for the unmodified tree
  DescriptiveStats stats;
  std::vector<PerfectTreeResult> perfect_trees;  // one per label kind
};

std::vector<TrajectoryPoint> simulate_restructure(const ControlTree& tree,
                                                  std::span<const RestructureEvent> script,
                                                  std::span<const LabelKind> kinds);
void render_trajectory(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out,
                       ReportFormat format);

}  // namespace ctrlhier
