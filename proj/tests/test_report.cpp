#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ctrlhier/ingest.hpp"
#include "ctrlhier/report.hpp"
#include "ctrlhier/synthgen.hpp"
#include "support.hpp"

using namespace ctrlhier;
using nlohmann::json;

namespace {

Snapshot synthetic(std::uint64_t seed, std::size_t firms, bool with_size) {
  std::vector<Firm> out;
  const std::vector<std::string> countries{"US", "GB", "JP", "DE"};
  const std::vector<std::string> sics{"6021", "6211", "7372"};
  for (std::size_t i = 0; i < firms; ++i) {
    auto t = gen_tree({topology::Preferential{80 + 40 * i, 1.0}, seed + i}, "S" + std::to_string(i + 1));
    t = assign_labels(t, LabelKind::country,
                      {labelling::Markov{0.6, uniform_distribution(LabelKind::country, countries)}, seed + 100 + i});
    t = assign_labels(t, LabelKind::sic, {labelling::Iid{uniform_distribution(LabelKind::sic, sics)}, seed + 200 + i});
    std::optional<double> size;
    if (with_size) size = 1e9 * static_cast<double>((i * 7919) % 13 + 1);
    out.push_back({std::move(t), FirmGroup::sifi, size});
  }
  return Snapshot("2011-05-26", std::move(out));
}

std::string render(const ReportBundle& b, ReportFormat f) {
  std::ostringstream out;
  render_report(b, out, f);
  return out.str();
}

std::map<std::string, std::string> csv_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out[line.substr(0, cut)] = line.substr(cut + 1);
  }
  return out;
}

bool same_to_12_digits(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

}  // namespace

TEST_SUITE_BEGIN("report");

TEST_CASE("bundle covers every firm") {
  const auto snap = synthetic(1, 4, false);
  ReportOptions opts;
  opts.labels = {LabelKind::country, LabelKind::sic};
  opts.replications = 200;
  const auto b = build_report(snap, opts);
  CHECK(b.descriptive.size() == 4);
  CHECK(b.powerlaw.size() == 4);
  CHECK(b.gini.size() == 4);
  REQUIRE(b.labels.size() == 2);
  for (const auto& s : b.labels) CHECK(s.perfect_trees.size() == 4);
  for (const auto& p : b.powerlaw) CHECK((p.fit.has_value() || !p.skip_reason.empty()));
  CHECK(b.hierarchy.rows.size() == 4);
  CHECK_FALSE(b.correlations);
  CHECK_FALSE(b.correlations_notice.empty());
}

TEST_CASE("fixture report carries skip reasons") {
  const auto snap = load_snapshot_file(testing::fixture("s11.csv"));
  const auto b = build_report(snap, {});
  REQUIRE(b.powerlaw.size() == 1);
  CHECK_FALSE(b.powerlaw[0].fit);
  CHECK(b.powerlaw[0].skip_reason.rfind("InsufficientData", 0) == 0);
  CHECK(b.labels[0].perfect_trees[0].statistic.matched == 12);
  const auto text = render(b, ReportFormat::table);
  CHECK(text.find("xmin (degree)") != std::string::npos);
  CHECK(text.find("%") != std::string::npos);
}

TEST_CASE("correlations with size data") {
  const auto snap = synthetic(2, 6, true);
  ReportOptions opts;
  opts.replications = 100;
  const auto b = build_report(snap, opts);
  REQUIRE(b.correlations);
  for (const auto& c : *b.correlations) {
    if (c.rho) {
      CHECK(*c.rho >= -1.0);
      CHECK(*c.rho <= 1.0);
    } else {
      CHECK_FALSE(c.skip_reason.empty());
    }
  }
  const auto& first = b.correlations->front();
  CHECK(first.measure == "n_nodes");
  CHECK(first.n == 6);
}

TEST_CASE("json and csv agree") {
  const auto snap = synthetic(3, 3, true);
  ReportOptions opts;
  opts.labels = {LabelKind::country, LabelKind::sic1};
  opts.replications = 150;
  opts.seed = 5;
  const auto b = build_report(snap, opts);
  const auto j = json::parse(render(b, ReportFormat::json));
  const auto csv = csv_values(render(b, ReportFormat::csv));

  std::size_t compared = 0;
  auto check = [&](const std::string& key, double v) {
    REQUIRE(csv.count(key));
    CHECK(same_to_12_digits(std::stod(csv.at(key)), v));
    ++compared;
  };
  for (const auto& s : j["labels"]) {
    const std::string kind = s["label_kind"];
    for (const auto& f : s["perfect_trees"]) {
      const std::string firm = f["firm_id"];
      check("perfect_tree," + firm + "," + kind + ",t_total", f["t_total"]);
      check("perfect_tree," + firm + "," + kind + ",t_nonroot", f["t_nonroot"]);
      check("bootstrap," + firm + "," + kind + ",mean", f["bootstrap"]["mean"]);
      check("bootstrap," + firm + "," + kind + ",stdev", f["bootstrap"]["stdev"]);
      check("bootstrap," + firm + "," + kind + ",quantile", f["bootstrap"]["quantile"]);
    }
    for (const auto& r : s["transitions"])
      check("transitions," + r["label"].get<std::string>() + "," + kind + ",p_in", r["p_in"]);
  }
  for (const auto& p : j["powerlaw"])
    if (p.contains("exponent")) check("powerlaw," + p["firm_id"].get<std::string>() + ",,exponent", p["exponent"]);
  for (const auto& g : j["gini"]) check("gini," + g["firm_id"].get<std::string>() + ",,gini", g["gini"]);
  const auto buckets = b.hierarchy.bucket_labels();
  for (std::size_t i = 0; i < buckets.size(); ++i)
    check("hierarchy,avg,," + buckets[i], j["hierarchy"]["avg"][i]);
  for (const auto& c : j["correlations"])
    if (c.contains("rho")) check("correlation,,," + c["measure"].get<std::string>(), c["rho"]);
  CHECK(compared > 20);
}

TEST_CASE("reports are reproducible and independent of workers") {
  const auto snap = synthetic(4, 3, false);
  ReportOptions opts;
  opts.replications = 300;
  opts.seed = 7;
  const auto a = render(build_report(snap, opts), ReportFormat::json);
  CHECK(render(build_report(snap, opts), ReportFormat::json) == a);
  opts.workers = 4;
  CHECK(render(build_report(snap, opts), ReportFormat::json) == a);
}

TEST_CASE("label kind only changes label sections") {
  const auto snap = synthetic(5, 2, false);
  ReportOptions opts;
  opts.replications = 100;
  const auto c = json::parse(render(build_report(snap, opts), ReportFormat::json));
  opts.labels = {LabelKind::sic};
  const auto s = json::parse(render(build_report(snap, opts), ReportFormat::json));
  for (const auto& [key, value] : c.items())
    if (key != "labels" && key != "correlations") CHECK(s[key] == value);
  CHECK(s["labels"] != c["labels"]);
}

TEST_CASE("comparing snapshots") {
  const auto snap = synthetic(6, 3, false);
  ReportOptions opts;
  opts.replications = 200;

  SUBCASE("identical") {
    const auto d = compare_snapshots(snap, snap, opts);
    REQUIRE(d.firms.size() == 3);
    for (const auto& f : d.firms) {
      CHECK(f.d_nodes == 0);
      CHECK(f.d_depth == 0);
      CHECK((!f.exponent_change || *f.exponent_change == 0.0));
      for (const auto& l : f.labels) {
        CHECK(l.t_delta == 0.0);
        CHECK(l.quantile_delta == 0.0);
      }
    }
    CHECK(d.summary[0].moved_toward_one == 0);
  }
  SUBCASE("perfect relabeling") {
    std::vector<Firm> later;
    for (const auto& f : snap.firms()) {
      auto t = assign_labels(f.tree, LabelKind::country,
                             {labelling::PerfectCopy{f.tree.labels(f.tree.root()).country}, 0});
      later.push_back({std::move(t), f.group, f.size});
    }
    const Snapshot after("2013-02-25", later);
    const auto d = compare_snapshots(snap, after, opts);
    for (std::size_t i = 0; i < d.firms.size(); ++i) {
      const double n = static_cast<double>(snap.firms()[i].tree.size());
      const double before = perfect_tree_statistic(snap.firms()[i].tree, LabelKind::country).t_total;
      CHECK(d.firms[i].labels[0].t_delta == doctest::Approx((n - 1) / n - before).epsilon(1e-12));
      CHECK(d.firms[i].d_countries <= 0);
    }
    CHECK(d.summary[0].moved_toward_one == 3);
  }
  SUBCASE("deltas are later minus earlier") {
    const auto other = synthetic(60, 4, false);
    const auto d = compare_snapshots(snap, other, opts);
    for (const auto& f : d.firms) {
      const auto a = describe(snap.find(f.firm_id)->tree);
      const auto b = describe(other.find(f.firm_id)->tree);
      CHECK(f.d_nodes == static_cast<long long>(b.n_nodes) - static_cast<long long>(a.n_nodes));
      CHECK(f.d_depth == static_cast<long long>(b.depth) - static_cast<long long>(a.depth));
    }
    CHECK(d.only_later == std::vector<std::string>{"S4"});
    CHECK(d.only_earlier.empty());
  }
  SUBCASE("no common firms") {
    const Snapshot other("2013-02-25", {{testing::figure1(), FirmGroup::bank, std::nullopt}});
    CHECK_THROWS_AS(compare_snapshots(snap, other, opts), CompareError);
  }
}

TEST_CASE("restructuring scripts") {
  std::istringstream script("# comment\n\nSEVER C\nrelabel B country GB\n");
  const auto events = parse_script(script);
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind == RestructureEvent::Kind::sever);
  CHECK(events[1].label_kind == LabelKind::country);
  CHECK(events[1].value == "GB");

  for (const char* bad : {"MERGE A\n", "SEVER\n", "RELABEL A planet X\n", "SEVER A B\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(parse_script(in), RestructureError);
  }

  const auto t = testing::figure1();
  const std::vector<LabelKind> kinds{LabelKind::country};
  const auto none = simulate_restructure(t, {}, kinds);
  REQUIRE(none.size() == 1);
  CHECK(none[0].event == "start");
  CHECK(none[0].stats == describe(t));

  const auto traj = simulate_restructure(t, events, kinds);
  REQUIRE(traj.size() == 3);
  CHECK(traj[1].stats.n_nodes == 2);
  CHECK(traj[1].stats.depth == 1);
  CHECK(traj[2].perfect_trees[0].matched == 0);
  CHECK(t.size() == 5);

  const std::vector<RestructureEvent> broken{{RestructureEvent::Kind::sever, "C"}, {RestructureEvent::Kind::sever, "D"}};
  try {
    simulate_restructure(t, broken, kinds);
    FAIL("expected failure");
  } catch (const RestructureError& e) {
    CHECK(e.event_index() == 1);
  }
}

TEST_CASE("severing a perfect copy stays perfect") {
  const auto base = gen_tree({topology::Preferential{300, 1.0}, 12});
  const auto t = assign_labels(base, LabelKind::country, {labelling::PerfectCopy{"JP"}, 0});
  std::vector<RestructureEvent> script;
  for (NodeIndex i = 0; i < t.size(); i += 37)
    if (i != t.root()) script.push_back({RestructureEvent::Kind::sever, t.id(i)});
  std::vector<RestructureEvent> valid;
  ControlTree cur = t;
  for (const auto& e : script)
    if (cur.find(e.entity)) {
      valid.push_back(e);
      cur = sever_subtree(cur, e.entity);
    }
  const std::vector<LabelKind> kinds{LabelKind::country};
  for (const auto& p : simulate_restructure(t, valid, kinds)) CHECK(p.perfect_trees[0].t_nonroot == 1.0);
}

TEST_CASE("plot data files") {
  const auto dir = std::filesystem::temp_directory_path() / "ctrlhier_plotdata_test";
  std::filesystem::remove_all(dir);
  write_plot_data(load_snapshot_file(testing::fixture("s11.csv")), dir);
  for (const char* f : {"country_distribution.csv", "sic1_distribution.csv", "sic2_distribution.csv",
                        "hierarchy_fractions.csv"})
    CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
}

TEST_SUITE_END();
