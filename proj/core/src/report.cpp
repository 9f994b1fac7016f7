#include "ctrlhier/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace ctrlhier {

using ojson = nlohmann::ordered_json;

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  const auto t = detail::lower(detail::trim(text));
  if (t == "csv") return ReportFormat::csv;
  if (t == "json") return ReportFormat::json;
  if (t == "table") return ReportFormat::table;
  return std::nullopt;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string percent(double q) { return fixed(100.0 * q, 2) + "%"; }

// Column-aligned plain-text table.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      width.resize(std::max(width.size(), r.size()), 0);
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const auto& r = rows_[k];
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out << "  ";
        if (i == 0)
          out << std::left << std::setw(static_cast<int>(width[i])) << r[i];
        else
          out << std::right << std::setw(static_cast<int>(width[i])) << r[i];
      }
      out << '\n';
      if (k == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w + 2;
        out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
      }
    }
    out << std::left;
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

// Long-format CSV: section,firm_id,label_kind,field,value.
class CsvSink {
 public:
  explicit CsvSink(std::ostream& out) : out_(out) { out_ << "section,firm_id,label_kind,field,value\n"; }

  void put(std::string_view section, std::string_view firm, std::string_view kind,
           std::string_view field, const std::string& value) {
    out_ << quote(section) << ',' << quote(firm) << ',' << quote(kind) << ',' << quote(field) << ','
         << quote(value) << '\n';
  }
  void num(std::string_view section, std::string_view firm, std::string_view kind,
           std::string_view field, double v) {
    put(section, firm, kind, field, detail::format_double(v));
  }
  void count(std::string_view section, std::string_view firm, std::string_view kind,
             std::string_view field, long long v) {
    put(section, firm, kind, field, std::to_string(v));
  }

 private:
  static std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  std::ostream& out_;
};

ojson to_json(const DescriptiveStats& d) {
  return {{"firm_id", d.firm_id},
          {"n_nodes", d.n_nodes},
          {"n_countries", d.n_countries},
          {"n_sic", d.n_sic},
          {"depth", d.depth}};
}

ojson to_json(const GroupMeans& g) {
  return {{"group", std::string(to_string(g.group))},
          {"firms", g.firms},
          {"n_nodes", g.n_nodes},
          {"n_countries", g.n_countries},
          {"n_sic", g.n_sic},
          {"depth", g.depth}};
}

ojson to_json(const FirmPowerLaw& p) {
  ojson j{{"firm_id", p.firm_id}};
  if (p.fit) {
    j["exponent"] = p.fit->exponent;
    j["se"] = p.fit->se;
    j["xmin"] = p.fit->xmin;
    j["n_tail"] = p.fit->n_tail;
    j["ks"] = p.fit->ks;
  } else {
    j["skip_reason"] = p.skip_reason;
  }
  return j;
}

ojson to_json(const FirmPerfectTree& f) {
  ojson j{{"firm_id", f.firm_id},
          {"matched", f.statistic.matched},
          {"n_nodes", f.statistic.n_nodes},
          {"t_total", f.statistic.t_total},
          {"t_nonroot", f.statistic.t_nonroot},
          {"degenerate", f.statistic.degenerate},
          {"bootstrap",
           {{"replications", f.null.replications},
            {"seed", f.null.seed},
            {"mean", f.null.mean},
            {"stdev", f.null.stdev},
            {"actual", f.null.actual},
            {"quantile", f.null.quantile}}}};
  if (f.significance) {
    const auto& s = *f.significance;
    j["significance"] = {{"alpha", s.alpha},          {"critical_value", s.critical_value},
                         {"z_vs_one", s.z_vs_one},    {"z_vs_zero", s.z_vs_zero},
                         {"reject_one", s.reject_one}, {"reject_zero", s.reject_zero}};
  } else {
    j["significance"] = nullptr;
    j["skip_reason"] = f.skip_reason;
  }
  return j;
}

ojson to_json(const TransitionTable& t) {
  ojson rows = ojson::array();
  for (const auto& r : t.records) {
    rows.push_back({{"label", r.label},
                    {"children", r.children},
                    {"same_label_children", r.same_label_children},
                    {"p_in", r.p_in},
                    {"rank", r.rank}});
  }
  return rows;
}

ojson to_json(const HierarchyFractionTable& h) {
  ojson j{{"bucket_cap", h.bucket_cap}, {"buckets", h.bucket_labels()}};
  ojson firms = ojson::array();
  for (const auto& r : h.rows) firms.push_back({{"firm_id", r.firm_id}, {"fractions", r.fractions}});
  j["firms"] = std::move(firms);
  j["avg"] = h.pooled;
  return j;
}

}  // namespace

FirmPowerLaw fit_firm_power_law(const ControlTree& tree, unsigned workers) {
  FirmPowerLaw p{tree.firm_id(), std::nullopt, {}};
  std::vector<std::uint64_t> degrees;
  degrees.reserve(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) degrees.push_back(tree.out_degree(i));
  try {
    p.fit = fit_power_law(degrees, workers);
  } catch (const PowerLawError& e) {
    p.skip_reason = std::string(e.code() == PowerLawError::Code::insufficient_data
                                    ? "InsufficientData: "
                                    : "DegenerateSample: ") +
                    e.what();
  }
  return p;
}

ReportBundle build_report(const Snapshot& snapshot, const ReportOptions& options) {
  ReportBundle b;
  b.as_of = snapshot.as_of();
  for (const auto& firm : snapshot.firms()) {
    b.descriptive.push_back(describe(firm.tree));
    b.powerlaw.push_back(fit_firm_power_law(firm.tree, options.workers));
    FirmGini g{firm.id(), std::nullopt, {}};
    try {
      g.gini = gini_of_degrees(firm.tree);
    } catch (const MetricsError& e) {
      g.skip_reason = std::string("DegenerateInput: ") + e.what();
    }
    b.gini.push_back(std::move(g));
  }
  b.group_means = group_summary(snapshot);

  BootstrapOptions boot;
  boot.replications = options.replications;
  boot.seed = options.seed;
  boot.workers = options.workers;
  boot.resample = options.resample;
  for (LabelKind kind : options.labels) {
    LabelSection section;
    section.label_kind = kind;
    section.transitions = transition_table(snapshot, kind);
    for (const auto& firm : snapshot.firms()) {
      FirmPerfectTree f{firm.id(), perfect_tree_statistic(firm.tree, kind),
                        bootstrap_perfect_tree(firm.tree, kind, boot), std::nullopt, {}};
      f.null.values.clear();
      f.null.values.shrink_to_fit();
      try {
        f.significance = significance_tests(f.null, options.alpha);
      } catch (const NullModelError& e) {
        f.skip_reason = std::string("AllTied: ") + e.what();
      }
      section.perfect_trees.push_back(std::move(f));
    }
    b.labels.push_back(std::move(section));
  }
  b.hierarchy = hierarchy_fraction_table(snapshot, options.bucket_cap);

  // Rank correlations of firm size against each statistic.
  std::vector<std::size_t> sized;
  for (std::size_t i = 0; i < snapshot.firms().size(); ++i)
    if (snapshot.firms()[i].size) sized.push_back(i);
  if (sized.empty()) {
    b.correlations_notice = "no size data; correlations omitted";
    return b;
  }
  std::vector<double> size;
  for (auto i : sized) size.push_back(*snapshot.firms()[i].size);
  std::vector<Correlation> corr;
  auto correlate = [&](std::string measure, auto value_of) {
    Correlation c{std::move(measure), 0, std::nullopt, {}};
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < sized.size(); ++k) {
      if (auto v = value_of(sized[k])) {
        xs.push_back(size[k]);
        ys.push_back(*v);
      }
    }
    c.n = xs.size();
    try {
      c.rho = spearman_rank_corr(xs, ys);
    } catch (const MetricsError& e) {
      c.skip_reason = e.what();
    }
    corr.push_back(std::move(c));
  };
  auto from_desc = [&](auto member) {
    return [&, member](std::size_t i) -> std::optional<double> {
      return static_cast<double>(b.descriptive[i].*member);
    };
  };
  correlate("n_nodes", from_desc(&DescriptiveStats::n_nodes));
  correlate("n_countries", from_desc(&DescriptiveStats::n_countries));
  correlate("n_sic", from_desc(&DescriptiveStats::n_sic));
  correlate("depth", from_desc(&DescriptiveStats::depth));
  correlate("exponent", [&](std::size_t i) -> std::optional<double> {
    if (b.powerlaw[i].fit) return b.powerlaw[i].fit->exponent;
    return std::nullopt;
  });
  for (const auto& section : b.labels) {
    const std::string kind(to_string(section.label_kind));
    correlate("perfect_" + kind, [&](std::size_t i) -> std::optional<double> {
      return section.perfect_trees[i].statistic.t_total;
    });
    correlate("quantile_" + kind, [&](std::size_t i) -> std::optional<double> {
      return section.perfect_trees[i].null.quantile;
    });
  }
  b.correlations = std::move(corr);
  return b;
}

namespace {

void render_json(const ReportBundle& b, std::ostream& out) {
  ojson j;
  j["as_of"] = b.as_of;
  ojson desc = ojson::array();
  for (const auto& d : b.descriptive) desc.push_back(to_json(d));
  j["descriptive"] = std::move(desc);
  ojson means = ojson::array();
  for (const auto& g : b.group_means) means.push_back(to_json(g));
  j["group_means"] = std::move(means);
  ojson pl = ojson::array();
  for (const auto& p : b.powerlaw) pl.push_back(to_json(p));
  j["powerlaw"] = std::move(pl);
  ojson gini = ojson::array();
  for (const auto& g : b.gini) {
    ojson e{{"firm_id", g.firm_id}};
    if (g.gini)
      e["gini"] = *g.gini;
    else
      e["skip_reason"] = g.skip_reason;
    gini.push_back(std::move(e));
  }
  j["gini"] = std::move(gini);
  ojson labels = ojson::array();
  for (const auto& s : b.labels) {
    ojson firms = ojson::array();
    for (const auto& f : s.perfect_trees) firms.push_back(to_json(f));
    labels.push_back({{"label_kind", std::string(to_string(s.label_kind))},
                      {"transitions", to_json(s.transitions)},
                      {"perfect_trees", std::move(firms)}});
  }
  j["labels"] = std::move(labels);
  j["hierarchy"] = to_json(b.hierarchy);
  if (b.correlations) {
    ojson corr = ojson::array();
    for (const auto& c : *b.correlations) {
      ojson e{{"measure", c.measure}, {"n", c.n}};
      if (c.rho)
        e["rho"] = *c.rho;
      else
        e["skip_reason"] = c.skip_reason;
      corr.push_back(std::move(e));
    }
    j["correlations"] = std::move(corr);
  } else {
    j["correlations"] = nullptr;
    j["correlations_notice"] = b.correlations_notice;
  }
  out << j.dump(2) << '\n';
}

void render_csv(const ReportBundle& b, std::ostream& out) {
  CsvSink csv(out);
  csv.put("snapshot", "", "", "as_of", b.as_of);
  for (const auto& d : b.descriptive) {
    csv.count("descriptive", d.firm_id, "", "n_nodes", static_cast<long long>(d.n_nodes));
    csv.count("descriptive", d.firm_id, "", "n_countries", static_cast<long long>(d.n_countries));
    csv.count("descriptive", d.firm_id, "", "n_sic", static_cast<long long>(d.n_sic));
    csv.count("descriptive", d.firm_id, "", "depth", d.depth);
  }
  for (const auto& g : b.group_means) {
    const std::string group(to_string(g.group));
    csv.count("group_means", group, "", "firms", static_cast<long long>(g.firms));
    csv.num("group_means", group, "", "n_nodes", g.n_nodes);
    csv.num("group_means", group, "", "n_countries", g.n_countries);
    csv.num("group_means", group, "", "n_sic", g.n_sic);
    csv.num("group_means", group, "", "depth", g.depth);
  }
  for (const auto& p : b.powerlaw) {
    if (!p.fit) {
      csv.put("powerlaw", p.firm_id, "", "skip_reason", p.skip_reason);
      continue;
    }
    csv.num("powerlaw", p.firm_id, "", "exponent", p.fit->exponent);
    csv.num("powerlaw", p.firm_id, "", "se", p.fit->se);
    csv.count("powerlaw", p.firm_id, "", "xmin", static_cast<long long>(p.fit->xmin));
    csv.count("powerlaw", p.firm_id, "", "n_tail", static_cast<long long>(p.fit->n_tail));
    csv.num("powerlaw", p.firm_id, "", "ks", p.fit->ks);
  }
  for (const auto& g : b.gini) {
    if (g.gini)
      csv.num("gini", g.firm_id, "", "gini", *g.gini);
    else
      csv.put("gini", g.firm_id, "", "skip_reason", g.skip_reason);
  }
  for (const auto& s : b.labels) {
    const std::string kind(to_string(s.label_kind));
    for (const auto& r : s.transitions.records) {
      csv.count("transitions", r.label, kind, "children", static_cast<long long>(r.children));
      csv.count("transitions", r.label, kind, "same_label_children",
                static_cast<long long>(r.same_label_children));
      csv.num("transitions", r.label, kind, "p_in", r.p_in);
      csv.count("transitions", r.label, kind, "rank", static_cast<long long>(r.rank));
    }
    for (const auto& f : s.perfect_trees) {
      csv.count("perfect_tree", f.firm_id, kind, "matched", static_cast<long long>(f.statistic.matched));
      csv.num("perfect_tree", f.firm_id, kind, "t_total", f.statistic.t_total);
      csv.num("perfect_tree", f.firm_id, kind, "t_nonroot", f.statistic.t_nonroot);
      csv.count("bootstrap", f.firm_id, kind, "replications", static_cast<long long>(f.null.replications));
      csv.num("bootstrap", f.firm_id, kind, "mean", f.null.mean);
      csv.num("bootstrap", f.firm_id, kind, "stdev", f.null.stdev);
      csv.num("bootstrap", f.firm_id, kind, "quantile", f.null.quantile);
      if (f.significance) {
        csv.num("significance", f.firm_id, kind, "z_vs_one", f.significance->z_vs_one);
        csv.num("significance", f.firm_id, kind, "z_vs_zero", f.significance->z_vs_zero);
        csv.count("significance", f.firm_id, kind, "reject_one", f.significance->reject_one);
        csv.count("significance", f.firm_id, kind, "reject_zero", f.significance->reject_zero);
      } else {
        csv.put("significance", f.firm_id, kind, "skip_reason", f.skip_reason);
      }
    }
  }
  const auto buckets = b.hierarchy.bucket_labels();
  for (const auto& r : b.hierarchy.rows)
    for (std::size_t i = 0; i < buckets.size(); ++i)
      csv.num("hierarchy", r.firm_id, "", buckets[i], r.fractions[i]);
  for (std::size_t i = 0; i < buckets.size(); ++i)
    csv.num("hierarchy", "avg", "", buckets[i], b.hierarchy.pooled[i]);
  if (b.correlations) {
    for (const auto& c : *b.correlations) {
      if (c.rho)
        csv.num("correlation", "", "", c.measure, *c.rho);
      else
        csv.put("correlation", "", "", c.measure, "skipped: " + c.skip_reason);
    }
  } else {
    csv.put("correlation", "", "", "notice", b.correlations_notice);
  }
}

void render_table(const ReportBundle& b, std::ostream& out) {
  out << "Snapshot " << b.as_of << "\n\nDescriptive statistics\n";
  TextTable desc({"firm", "#Nodes", "#Countries", "#SIC", "Depth"});
  for (const auto& d : b.descriptive)
    desc.add({d.firm_id, std::to_string(d.n_nodes), std::to_string(d.n_countries),
              std::to_string(d.n_sic), std::to_string(d.depth)});
  for (const auto& g : b.group_means)
    desc.add({"Mean " + std::string(to_string(g.group)), fixed(g.n_nodes, 0),
              fixed(g.n_countries, 0), fixed(g.n_sic, 0), fixed(g.depth, 1)});
  desc.print(out);

  out << "\nPower law (out-degree)\n";
  TextTable pl({"firm", "exponent", "se", "xmin (degree)", "n_tail", "ks", "gini"});
  for (std::size_t i = 0; i < b.powerlaw.size(); ++i) {
    const auto& p = b.powerlaw[i];
    const std::string g = b.gini[i].gini ? fixed(*b.gini[i].gini, 3) : "-";
    if (p.fit)
      pl.add({p.firm_id, fixed(p.fit->exponent, 2), fixed(p.fit->se, 3), std::to_string(p.fit->xmin),
              std::to_string(p.fit->n_tail), fixed(p.fit->ks, 3), g});
    else
      pl.add({p.firm_id, "-", "-", "-", "-", "-", g});
  }
  pl.print(out);
  for (const auto& p : b.powerlaw)
    if (!p.fit) out << "  " << p.firm_id << ": " << p.skip_reason << '\n';

  for (const auto& s : b.labels) {
    const std::string kind(to_string(s.label_kind));
    out << "\nPerfect tree statistics (" << kind << ")\n";
    TextTable pt({"firm", "Perfect", "Nonroot", "Mean", "Stdev", "Quantile", "z(1)", "z(0)"});
    for (const auto& f : s.perfect_trees) {
      pt.add({f.firm_id, fixed(f.statistic.t_total, 3), fixed(f.statistic.t_nonroot, 3),
              fixed(f.null.mean, 3), fixed(f.null.stdev, 3), percent(f.null.quantile),
              f.significance ? fixed(f.significance->z_vs_one, 2) : "-",
              f.significance ? fixed(f.significance->z_vs_zero, 2) : "-"});
    }
    pt.print(out);
    out << "\nWithin-label transition probabilities P(A|A) (" << kind << ")\n";
    TextTable tt({"label", "P(A|A)", "Rank", "children"});
    for (const auto& r : s.transitions.records)
      tt.add({r.label, fixed(r.p_in, 3), std::to_string(r.rank), std::to_string(r.children)});
    tt.print(out);
  }

  out << "\nFraction of nodes by level\n";
  std::vector<std::string> header{"firm"};
  for (auto& l : b.hierarchy.bucket_labels()) header.push_back(l);
  TextTable h(header);
  auto add_row = [&](const std::string& name, const std::vector<double>& fr) {
    std::vector<std::string> row{name};
    for (double v : fr) row.push_back(fixed(v, 3));
    h.add(std::move(row));
  };
  for (const auto& r : b.hierarchy.rows) add_row(r.firm_id, r.fractions);
  add_row("avg", b.hierarchy.pooled);
  h.print(out);

  out << "\nRank correlation with size\n";
  if (!b.correlations) {
    out << "  " << b.correlations_notice << '\n';
    return;
  }
  TextTable c({"measure", "n", "rho"});
  for (const auto& e : *b.correlations) c.add({e.measure, std::to_string(e.n), e.rho ? fixed(*e.rho, 3) : "-"});
  c.print(out);
  for (const auto& e : *b.correlations)
    if (!e.skip_reason.empty()) out << "  " << e.measure << ": " << e.skip_reason << '\n';
}

}  // namespace

void render_report(const ReportBundle& bundle, std::ostream& out, ReportFormat format) {
  switch (format) {
    case ReportFormat::json: render_json(bundle, out); break;
    case ReportFormat::csv: render_csv(bundle, out); break;
    case ReportFormat::table: render_table(bundle, out); break;
  }
}

void render_descriptive(const Snapshot& snapshot, std::ostream& out, ReportFormat format) {
  std::vector<DescriptiveStats> stats;
  for (const auto& f : snapshot.firms()) stats.push_back(describe(f.tree));
  const auto means = group_summary(snapshot);
  if (format == ReportFormat::json) {
    ojson j;
    j["as_of"] = snapshot.as_of();
    ojson firms = ojson::array();
    for (std::size_t i = 0; i < stats.size(); ++i) {
      ojson e = to_json(stats[i]);
      e["group"] = std::string(to_string(snapshot.firms()[i].group));
      firms.push_back(std::move(e));
    }
    j["firms"] = std::move(firms);
    ojson m = ojson::array();
    for (const auto& g : means) m.push_back(to_json(g));
    j["group_means"] = std::move(m);
    out << j.dump(2) << '\n';
  } else if (format == ReportFormat::csv) {
    out << "firm_id,group,n_nodes,n_countries,n_sic,depth\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const auto& d = stats[i];
      out << d.firm_id << ',' << to_string(snapshot.firms()[i].group) << ',' << d.n_nodes << ','
          << d.n_countries << ',' << d.n_sic << ',' << d.depth << '\n';
    }
    for (const auto& g : means)
      out << "mean," << to_string(g.group) << ',' << detail::format_double(g.n_nodes) << ','
          << detail::format_double(g.n_countries) << ',' << detail::format_double(g.n_sic) << ','
          << detail::format_double(g.depth) << '\n';
  } else {
    TextTable t({"firm", "group", "#Nodes", "#Countries", "#SIC", "Depth"});
    for (std::size_t i = 0; i < stats.size(); ++i) {
      const auto& d = stats[i];
      t.add({d.firm_id, std::string(to_string(snapshot.firms()[i].group)), std::to_string(d.n_nodes),
             std::to_string(d.n_countries), std::to_string(d.n_sic), std::to_string(d.depth)});
    }
    for (const auto& g : means)
      t.add({"Mean", std::string(to_string(g.group)), fixed(g.n_nodes, 0), fixed(g.n_countries, 0),
             fixed(g.n_sic, 0), fixed(g.depth, 1)});
    t.print(out);
  }
}

void render_powerlaw(const Snapshot& snapshot, std::ostream& out, ReportFormat format,
                     unsigned workers) {
  std::vector<FirmPowerLaw> fits;
  for (const auto& f : snapshot.firms()) fits.push_back(fit_firm_power_law(f.tree, workers));
  if (format == ReportFormat::json) {
    ojson j;
    j["as_of"] = snapshot.as_of();
    ojson arr = ojson::array();
    for (const auto& p : fits) arr.push_back(to_json(p));
    j["powerlaw"] = std::move(arr);
    out << j.dump(2) << '\n';
  } else if (format == ReportFormat::csv) {
    out << "firm_id,exponent,se,xmin_degree,n_tail,ks,skip_reason\n";
    for (const auto& p : fits) {
      out << p.firm_id << ',';
      if (p.fit)
        out << detail::format_double(p.fit->exponent) << ',' << detail::format_double(p.fit->se) << ','
            << p.fit->xmin << ',' << p.fit->n_tail << ',' << detail::format_double(p.fit->ks) << ",\n";
      else
        out << ",,,,,\"" << p.skip_reason << "\"\n";
    }
  } else {
    TextTable t({"firm", "exponent", "se", "xmin (degree)", "n_tail", "ks"});
    for (const auto& p : fits) {
      if (p.fit)
        t.add({p.firm_id, fixed(p.fit->exponent, 2), fixed(p.fit->se, 3), std::to_string(p.fit->xmin),
               std::to_string(p.fit->n_tail), fixed(p.fit->ks, 3)});
      else
        t.add({p.firm_id, "-", "-", "-", "-", "-"});
    }
    t.print(out);
    for (const auto& p : fits)
      if (!p.fit) out << "  " << p.firm_id << ": " << p.skip_reason << '\n';
  }
}

void write_plot_data(const Snapshot& snapshot, const std::filesystem::path& dir,
                     std::size_t bucket_cap) {
  std::filesystem::create_directories(dir);
  auto write_distribution = [&](const std::string& name, LabelKind kind) {
    std::ofstream out(dir / name);
    out << "label,count\n";
    for (const auto& [label, count] : corpus_label_distribution(snapshot, kind, SIZE_MAX))
      out << label << ',' << count << '\n';
  };
  write_distribution("country_distribution.csv", LabelKind::country);
  write_distribution("sic1_distribution.csv", LabelKind::sic1);
  write_distribution("sic2_distribution.csv", LabelKind::sic2);

  const auto table = hierarchy_fraction_table(snapshot, bucket_cap);
  const auto buckets = table.bucket_labels();
  std::ofstream out(dir / "hierarchy_fractions.csv");
  out << "firm_id,level,fraction\n";
  for (const auto& r : table.rows)
    for (std::size_t i = 0; i < buckets.size(); ++i)
      out << r.firm_id << ',' << buckets[i] << ',' << detail::format_double(r.fractions[i]) << '\n';
  for (std::size_t i = 0; i < buckets.size(); ++i)
    out << "avg," << buckets[i] << ',' << detail::format_double(table.pooled[i]) << '\n';
}

SnapshotDiff compare_snapshots(const Snapshot& earlier, const Snapshot& later,
                               const ReportOptions& options) {
  SnapshotDiff diff;
  diff.earlier_as_of = earlier.as_of();
  diff.later_as_of = later.as_of();
  for (const auto& f : earlier.firms())
    if (!later.find(f.id())) diff.only_earlier.push_back(f.id());
  for (const auto& f : later.firms())
    if (!earlier.find(f.id())) diff.only_later.push_back(f.id());
  for (LabelKind kind : options.labels) diff.summary.push_back({kind, 0, 0});

  BootstrapOptions boot;
  boot.replications = options.replications;
  boot.seed = options.seed;
  boot.workers = options.workers;
  boot.resample = options.resample;

  for (const auto& a : earlier.firms()) {
    const Firm* b = later.find(a.id());
    if (!b) continue;
    const auto da = describe(a.tree);
    const auto db = describe(b->tree);
    FirmDiff d;
    d.firm_id = a.id();
    d.d_nodes = static_cast<long long>(db.n_nodes) - static_cast<long long>(da.n_nodes);
    d.d_countries = static_cast<long long>(db.n_countries) - static_cast<long long>(da.n_countries);
    d.d_sic = static_cast<long long>(db.n_sic) - static_cast<long long>(da.n_sic);
    d.d_depth = static_cast<long long>(db.depth) - static_cast<long long>(da.depth);
    const auto pa = fit_firm_power_law(a.tree, options.workers);
    const auto pb = fit_firm_power_law(b->tree, options.workers);
    if (pa.fit && pb.fit) d.exponent_change = exponent_change(*pa.fit, *pb.fit);
    for (std::size_t k = 0; k < options.labels.size(); ++k) {
      const LabelKind kind = options.labels[k];
      const auto na = bootstrap_perfect_tree(a.tree, kind, boot);
      const auto nb = bootstrap_perfect_tree(b->tree, kind, boot);
      LabelDelta ld{kind, na.actual, nb.actual, nb.actual - na.actual,
                    na.quantile, nb.quantile, nb.quantile - na.quantile};
      if (std::abs(1.0 - ld.t_later) < std::abs(1.0 - ld.t_earlier)) ++diff.summary[k].moved_toward_one;
      if (ld.quantile_later < ld.quantile_earlier) ++diff.summary[k].quantile_declined;
      d.labels.push_back(ld);
    }
    diff.firms.push_back(std::move(d));
  }
  if (diff.firms.empty())
    throw CompareError("snapshots " + earlier.as_of() + " and " + later.as_of() +
                       " have no firm_id in common");
  return diff;
}

void render_diff(const SnapshotDiff& diff, std::ostream& out, ReportFormat format) {
  if (format == ReportFormat::json) {
    ojson j;
    j["earlier"] = diff.earlier_as_of;
    j["later"] = diff.later_as_of;
    ojson firms = ojson::array();
    for (const auto& f : diff.firms) {
      ojson e{{"firm_id", f.firm_id},
              {"d_nodes", f.d_nodes},
              {"d_countries", f.d_countries},
              {"d_sic", f.d_sic},
              {"d_depth", f.d_depth}};
      e["exponent_change"] = f.exponent_change ? ojson(*f.exponent_change) : ojson(nullptr);
      ojson labels = ojson::array();
      for (const auto& l : f.labels)
        labels.push_back({{"label_kind", std::string(to_string(l.label_kind))},
                          {"t_earlier", l.t_earlier},
                          {"t_later", l.t_later},
                          {"t_delta", l.t_delta},
                          {"quantile_earlier", l.quantile_earlier},
                          {"quantile_later", l.quantile_later},
                          {"quantile_delta", l.quantile_delta}});
      e["labels"] = std::move(labels);
      firms.push_back(std::move(e));
    }
    j["firms"] = std::move(firms);
    j["only_earlier"] = diff.only_earlier;
    j["only_later"] = diff.only_later;
    ojson summary = ojson::array();
    for (const auto& s : diff.summary)
      summary.push_back({{"label_kind", std::string(to_string(s.label_kind))},
                         {"moved_toward_one", s.moved_toward_one},
                         {"quantile_declined", s.quantile_declined}});
    j["summary"] = std::move(summary);
    out << j.dump(2) << '\n';
    return;
  }
  if (format == ReportFormat::csv) {
    CsvSink csv(out);
    for (const auto& f : diff.firms) {
      csv.count("diff", f.firm_id, "", "d_nodes", f.d_nodes);
      csv.count("diff", f.firm_id, "", "d_countries", f.d_countries);
      csv.count("diff", f.firm_id, "", "d_sic", f.d_sic);
      csv.count("diff", f.firm_id, "", "d_depth", f.d_depth);
      if (f.exponent_change) csv.num("diff", f.firm_id, "", "exponent_change", *f.exponent_change);
      for (const auto& l : f.labels) {
        const std::string kind(to_string(l.label_kind));
        csv.num("diff", f.firm_id, kind, "t_earlier", l.t_earlier);
        csv.num("diff", f.firm_id, kind, "t_later", l.t_later);
        csv.num("diff", f.firm_id, kind, "t_delta", l.t_delta);
        csv.num("diff", f.firm_id, kind, "quantile_delta", l.quantile_delta);
      }
    }
    for (const auto& id : diff.only_earlier) csv.put("only_earlier", id, "", "present", "1");
    for (const auto& id : diff.only_later) csv.put("only_later", id, "", "present", "1");
    for (const auto& s : diff.summary) {
      const std::string kind(to_string(s.label_kind));
      csv.count("summary", "", kind, "moved_toward_one", static_cast<long long>(s.moved_toward_one));
      csv.count("summary", "", kind, "quantile_declined", static_cast<long long>(s.quantile_declined));
    }
    return;
  }
  out << "Comparison " << diff.earlier_as_of << " -> " << diff.later_as_of << "\n\n";
  std::vector<std::string> header{"firm", "dNodes", "dCountries", "dSIC", "dDepth", "chg in exp"};
  for (const auto& s : diff.summary) {
    const std::string kind(to_string(s.label_kind));
    header.push_back("dPerfect(" + kind + ")");
    header.push_back("dQuantile(" + kind + ")");
  }
  TextTable t(header);
  for (const auto& f : diff.firms) {
    std::vector<std::string> row{f.firm_id, std::to_string(f.d_nodes), std::to_string(f.d_countries),
                                 std::to_string(f.d_sic), std::to_string(f.d_depth),
                                 f.exponent_change ? fixed(*f.exponent_change, 2) : "-"};
    for (const auto& l : f.labels) {
      row.push_back(fixed(l.t_delta, 3));
      row.push_back(fixed(100.0 * l.quantile_delta, 2));
    }
    t.add(std::move(row));
  }
  t.print(out);
  for (const auto& s : diff.summary)
    out << "\n" << to_string(s.label_kind) << ": " << s.moved_toward_one << " of " << diff.firms.size()
        << " firms moved closer to a perfect tree; " << s.quantile_declined
        << " had a lower quantile\n";
  if (!diff.only_earlier.empty()) {
    out << "only in earlier:";
    for (const auto& id : diff.only_earlier) out << ' ' << id;
    out << '\n';
  }
  if (!diff.only_later.empty()) {
    out << "only in later:";
    for (const auto& id : diff.only_later) out << ' ' << id;
    out << '\n';
  }
}

std::string RestructureEvent::describe() const {
  if (kind == Kind::sever) return "SEVER " + entity;
  return "RELABEL " + entity + " " + std::string(to_string(label_kind)) + " " + value;
}

std::vector<RestructureEvent> parse_script(std::istream& in) {
  std::vector<RestructureEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream words{std::string(t)};
    std::string verb;
    words >> verb;
    verb = detail::lower(verb);
    RestructureEvent e;
    if (verb == "sever") {
      if (!(words >> e.entity))
        throw RestructureError(line_no, "line " + std::to_string(line_no) + ": SEVER needs an entity");
    } else if (verb == "relabel") {
      std::string kind;
      if (!(words >> e.entity >> kind >> e.value))
        throw RestructureError(line_no, "line " + std::to_string(line_no) +
                                            ": RELABEL needs <entity> <kind> <label>");
      auto k = parse_label_kind(kind);
      if (!k)
        throw RestructureError(line_no, "line " + std::to_string(line_no) + ": unknown label kind '" +
                                            kind + "'");
      e.kind = RestructureEvent::Kind::relabel;
      e.label_kind = *k;
    } else {
      throw RestructureError(line_no, "line " + std::to_string(line_no) + ": unknown event '" + verb + "'");
    }
    std::string extra;
    if (words >> extra)
      throw RestructureError(line_no, "line " + std::to_string(line_no) + ": trailing text '" + extra + "'");
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<TrajectoryPoint> simulate_restructure(const ControlTree& tree,
                                                  std::span<const RestructureEvent> script,
                                                  std::span<const LabelKind> kinds) {
  auto snapshot_of = [&](const ControlTree& t, std::string event) {
    TrajectoryPoint p{std::move(event), describe(t), {}};
    for (LabelKind k : kinds) p.perfect_trees.push_back(perfect_tree_statistic(t, k));
    return p;
  };
  std::vector<TrajectoryPoint> out{snapshot_of(tree, "start")};
  ControlTree current = tree;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& e = script[i];
    try {
      current = e.kind == RestructureEvent::Kind::sever
                    ? sever_subtree(current, e.entity)
                    : relabel(current, e.entity, e.label_kind, e.value);
    } catch (const TreeError& err) {
      throw RestructureError(i, "event " + std::to_string(i) + " (" + e.describe() + "): " + err.what());
    }
    out.push_back(snapshot_of(current, e.describe()));
  }
  return out;
}

void render_trajectory(const std::vector<TrajectoryPoint>& trajectory, std::ostream& out,
                       ReportFormat format) {
  if (format == ReportFormat::json) {
    ojson arr = ojson::array();
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
      const auto& p = trajectory[i];
      ojson e{{"step", i}, {"event", p.event}, {"stats", to_json(p.stats)}};
      ojson pts = ojson::array();
      for (const auto& r : p.perfect_trees)
        pts.push_back({{"label_kind", std::string(to_string(r.label_kind))},
                       {"matched", r.matched},
                       {"t_total", r.t_total},
                       {"t_nonroot", r.t_nonroot}});
      e["perfect_trees"] = std::move(pts);
      arr.push_back(std::move(e));
    }
    out << ojson{{"trajectory", std::move(arr)}}.dump(2) << '\n';
    return;
  }
  std::vector<std::string> header{"step", "event", "#Nodes", "#Countries", "#SIC", "Depth"};
  if (!trajectory.empty())
    for (const auto& r : trajectory.front().perfect_trees) {
      header.push_back("t_total(" + std::string(to_string(r.label_kind)) + ")");
      header.push_back("t_nonroot(" + std::string(to_string(r.label_kind)) + ")");
    }
  if (format == ReportFormat::csv) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
      const auto& p = trajectory[i];
      out << i << ",\"" << p.event << "\"," << p.stats.n_nodes << ',' << p.stats.n_countries << ','
          << p.stats.n_sic << ',' << p.stats.depth;
      for (const auto& r : p.perfect_trees)
        out << ',' << detail::format_double(r.t_total) << ',' << detail::format_double(r.t_nonroot);
      out << '\n';
    }
    return;
  }
  TextTable t(header);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const auto& p = trajectory[i];
    std::vector<std::string> row{std::to_string(i), p.event, std::to_string(p.stats.n_nodes),
                                 std::to_string(p.stats.n_countries), std::to_string(p.stats.n_sic),
                                 std::to_string(p.stats.depth)};
    for (const auto& r : p.perfect_trees) {
      row.push_back(fixed(r.t_total, 3));
      row.push_back(fixed(r.t_nonroot, 3));
    }
    t.add(std::move(row));
  }
  t.print(out);
}

}  // namespace ctrlhier
