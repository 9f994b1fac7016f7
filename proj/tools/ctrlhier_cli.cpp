#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctrlhier/graph_export.hpp"
#include "ctrlhier/ingest.hpp"
#include "ctrlhier/random.hpp"
#include "ctrlhier/report.hpp"
#include "ctrlhier/synthgen.hpp"

using namespace ctrlhier;
using nlohmann::json;

namespace {

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by several subcommands. A JSON config file can supply any of
// them; values given on the command line win.
struct Settings {
  std::string format = "table";
  std::vector<std::string> labels{"country"};
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::size_t bucket_cap = 9;
  unsigned workers = 1;
  bool fix_level_one = false;
  bool permutation = false;
  std::string plotdata;
  std::string output;
};

struct Binding {
  CLI::Option* option;
  std::function<void(const json&)> set;
};

class Bindings {
 public:
  template <class T>
  void add(CLI::App* sub, const std::string& key, const std::string& flags, T& target,
           const std::string& help) {
    auto* opt = sub->add_option(flags, target, help);
    if constexpr (!std::is_same_v<T, std::vector<std::string>>) opt->capture_default_str();
    by_sub_[sub][key] = {opt, [&target](const json& v) {
                           if constexpr (std::is_same_v<T, std::vector<std::string>>) {
                             target = v.is_array() ? v.get<T>() : T{v.get<std::string>()};
                           } else {
                             target = v.get<T>();
                           }
                         }};
  }
  void add_flag(CLI::App* sub, const std::string& key, const std::string& flags, bool& target,
                const std::string& help) {
    auto* opt = sub->add_flag(flags, target, help);
    by_sub_[sub][key] = {opt, [&target](const json& v) { target = v.get<bool>(); }};
  }

  void apply_config(CLI::App* sub, const std::string& path) const {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(path + ": " + e.what());
    }
    if (!cfg.is_object()) throw UsageError(path + ": config must be a JSON object");
    const auto it = by_sub_.find(sub);
    for (const auto& [key, value] : cfg.items()) {
      if (it == by_sub_.end() || !it->second.count(key)) {
        std::cerr << "warning: " << path << ": key '" << key << "' does not apply to '"
                  << sub->get_name() << "'\n";
        continue;
      }
      const auto& b = it->second.at(key);
      if (b.option->count() > 0) continue;
      try {
        b.set(value);
      } catch (const json::exception&) {
        throw UsageError(path + ": bad value for '" + key + "'");
      }
    }
  }

 private:
  std::map<const CLI::App*, std::map<std::string, Binding>> by_sub_;
};

ReportFormat report_format(const Settings& s) {
  auto f = parse_report_format(s.format);
  if (!f) throw UsageError("unknown --format '" + s.format + "' (csv, json, table)");
  return *f;
}

std::vector<LabelKind> label_kinds(const Settings& s) {
  std::vector<LabelKind> kinds;
  for (const auto& text : s.labels) {
    auto k = parse_label_kind(text);
    if (!k) throw UsageError("unknown --label '" + text + "' (country, sic, sic1, sic2)");
    if (std::find(kinds.begin(), kinds.end(), *k) == kinds.end()) kinds.push_back(*k);
  }
  if (kinds.empty()) throw UsageError("--label needs at least one value");
  return kinds;
}

ReportOptions report_options(const Settings& s) {
  if (s.replications < 2) throw UsageError("--replications must be at least 2");
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  if (s.bucket_cap < 1) throw UsageError("--bucket-cap must be at least 1");
  ReportOptions o;
  o.labels = label_kinds(s);
  o.replications = s.replications;
  o.seed = s.seed;
  o.alpha = s.alpha;
  o.bucket_cap = s.bucket_cap;
  o.workers = s.workers;
  o.resample.fix_level_one = s.fix_level_one;
  o.resample.permutation = s.permutation;
  return o;
}

Snapshot load(const std::string& path) {
  std::vector<std::string> warnings;
  Snapshot snap = load_snapshot_file(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << '\n';
  return snap;
}

const ControlTree& pick_firm(const Snapshot& snap, const std::string& firm_id) {
  if (firm_id.empty()) {
    if (snap.firms().size() == 1) return snap.firms().front().tree;
    throw UsageError("snapshot has " + std::to_string(snap.firms().size()) +
                     " firms; choose one with --firm");
  }
  const Firm* f = snap.find(firm_id);
  if (!f) throw Error("no firm '" + firm_id + "' in snapshot");
  return f->tree;
}

// Writes to --output when given, otherwise stdout.
template <class Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  write(out);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct GenerateArgs {
  std::string topology = "preferential";
  std::size_t n = 200;
  std::uint32_t k = 3;
  std::uint32_t depth = 3;
  double smoothing = 1.0;
  std::string labelling = "markov";
  double stay = 0.6;
  std::string countries = "US,GB,JP,DE,FR,CH,NL,LU";
  std::string sics = "6021,6211,6311,6282,7372";
  std::size_t firms = 1;
  std::string group = "SIFI";
  std::string as_of = "2011-05-26";
  std::string out_format;
};

Snapshot generate(const GenerateArgs& g, std::uint64_t seed) {
  auto group = parse_firm_group(g.group);
  if (!group) throw UsageError("unknown --group '" + g.group + "'");
  const auto countries = split_list(g.countries);
  const auto sics = split_list(g.sics);
  if (countries.empty() || sics.empty()) throw UsageError("label sets must not be empty");
  const int width = static_cast<int>(std::to_string(g.firms).size());

  auto label_model = [&](LabelKind kind, const std::vector<std::string>& set,
                         std::uint64_t s) -> LabelModel {
    auto dist = uniform_distribution(kind, set);
    if (g.labelling == "perfect") return {labelling::PerfectCopy{set.front()}, s};
    if (g.labelling == "iid") return {labelling::Iid{std::move(dist)}, s};
    if (g.labelling == "markov") return {labelling::Markov{g.stay, std::move(dist)}, s};
    throw UsageError("unknown --labels '" + g.labelling + "' (perfect, iid, markov)");
  };

  std::vector<Firm> firms;
  for (std::size_t i = 0; i < g.firms; ++i) {
    std::string idx = std::to_string(i + 1);
    idx.insert(0, static_cast<std::size_t>(width) - idx.size(), '0');
    const std::string firm_id = std::string(1, group_prefix(*group)) + idx;
    TopologyModel topo;
    topo.seed = substream_seed(seed, 3 * i);
    if (g.topology == "regular")
      topo.kind = topology::Regular{g.k, g.depth};
    else if (g.topology == "preferential")
      topo.kind = topology::Preferential{g.n, g.smoothing};
    else if (g.topology == "uniform")
      topo.kind = topology::Uniform{g.n};
    else
      throw UsageError("unknown --topology '" + g.topology + "' (regular, preferential, uniform)");
    ControlTree tree = gen_tree(topo, firm_id);
    tree = assign_labels(tree, LabelKind::country,
                         label_model(LabelKind::country, countries, substream_seed(seed, 3 * i + 1)));
    tree = assign_labels(tree, LabelKind::sic,
                         label_model(LabelKind::sic, sics, substream_seed(seed, 3 * i + 2)));
    firms.push_back({std::move(tree), *group, std::nullopt});
  }
  return Snapshot(g.as_of, std::move(firms));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control hierarchy analysis of financial conglomerates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  Settings s;
  Bindings bind;
  std::string config;
  std::vector<std::string> files;
  std::string firm_id;
  std::string script_path;
  std::string graph_format = "graphml";
  std::string color_by = "depth";
  GenerateArgs gen;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON file with default option values")
        ->check(CLI::ExistingFile);
    bind.add(sub, "format", "--format", s.format, "Output format: csv, json or table");
    bind.add(sub, "output", "-o,--output", s.output, "Write to this file instead of stdout");
  };
  auto analysis = [&](CLI::App* sub) {
    bind.add(sub, "label", "--label", s.labels, "Label kind(s): country, sic, sic1, sic2");
    bind.add(sub, "replications", "--replications", s.replications, "Bootstrap replications");
    bind.add(sub, "seed", "--seed", s.seed, "Master seed");
    bind.add(sub, "alpha", "--alpha", s.alpha, "Two-sided significance level");
    bind.add(sub, "workers", "--workers", s.workers, "Worker threads (0 = all cores)");
    bind.add_flag(sub, "fix_level_one", "--fix-level-one", s.fix_level_one,
                  "Keep level-1 labels fixed in the bootstrap");
    bind.add_flag(sub, "permutation", "--permutation", s.permutation,
                  "Permute the observed non-root labels instead of drawing them");
  };

  auto* validate = app.add_subcommand("validate", "Check that snapshot files load");
  validate->add_option("files", files, "Snapshot files (.csv or .json)")->required();

  auto* describe_cmd = app.add_subcommand("describe", "Per-firm node, country, SIC and depth counts");
  describe_cmd->add_option("file", files, "Snapshot file")->required()->expected(1);
  common(describe_cmd);

  auto* metrics = app.add_subcommand("metrics", "Full report: perfect trees, bootstrap, transitions, Gini");
  metrics->add_option("file", files, "Snapshot file")->required()->expected(1);
  common(metrics);
  analysis(metrics);
  bind.add(metrics, "bucket_cap", "--bucket-cap", s.bucket_cap, "Deepest level with its own column");
  bind.add(metrics, "emit_plotdata", "--emit-plotdata", s.plotdata, "Directory for plot data CSVs");

  auto* powerlaw = app.add_subcommand("powerlaw", "Fit power laws to out-degree distributions");
  powerlaw->add_option("file", files, "Snapshot file")->required()->expected(1);
  common(powerlaw);
  bind.add(powerlaw, "workers", "--workers", s.workers, "Worker threads (0 = all cores)");

  auto* compare = app.add_subcommand("compare", "Compare two snapshots firm by firm");
  compare->add_option("files", files, "Earlier and later snapshot")->required()->expected(2);
  common(compare);
  analysis(compare);

  auto* simulate = app.add_subcommand("simulate", "Apply a restructuring script to one firm");
  simulate->add_option("file", files, "Snapshot file")->required()->expected(1);
  simulate->add_option("--script", script_path, "Event script (SEVER / RELABEL lines)")->required();
  simulate->add_option("--firm", firm_id, "Firm id (optional for single-firm snapshots)");
  common(simulate);
  bind.add(simulate, "label", "--label", s.labels, "Label kind(s): country, sic, sic1, sic2");

  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic snapshot");
  common(generate_cmd);
  bind.add(generate_cmd, "seed", "--seed", s.seed, "Master seed");
  bind.add(generate_cmd, "topology", "--topology", gen.topology, "regular, preferential or uniform");
  bind.add(generate_cmd, "n", "-n,--nodes", gen.n, "Nodes per firm (preferential, uniform)");
  bind.add(generate_cmd, "k", "-k,--branching", gen.k, "Children per node (regular)");
  bind.add(generate_cmd, "depth", "--depth", gen.depth, "Depth (regular)");
  bind.add(generate_cmd, "smoothing", "--smoothing", gen.smoothing, "Attachment smoothing (preferential)");
  bind.add(generate_cmd, "labels", "--labels", gen.labelling, "perfect, iid or markov");
  bind.add(generate_cmd, "stay", "--stay", gen.stay, "Markov probability of keeping the parent label");
  bind.add(generate_cmd, "countries", "--countries", gen.countries, "Comma-separated country labels");
  bind.add(generate_cmd, "sics", "--sics", gen.sics, "Comma-separated SIC labels");
  bind.add(generate_cmd, "firms", "--firms", gen.firms, "Number of firms");
  bind.add(generate_cmd, "group", "--group", gen.group, "SIFI, BANK or INSURER");
  bind.add(generate_cmd, "as_of", "--as-of", gen.as_of, "Snapshot date");
  generate_cmd->get_option("--format")->description("Snapshot format: csv or json (default from -o, else csv)");
  generate_cmd->get_option("--format")->default_str("");

  auto* export_cmd = app.add_subcommand("export", "Write one firm's hierarchy as DOT or GraphML");
  export_cmd->add_option("file", files, "Snapshot file")->required()->expected(1);
  export_cmd->add_option("--firm", firm_id, "Firm id (optional for single-firm snapshots)");
  export_cmd->add_option("--config", config, "JSON file with default option values")
      ->check(CLI::ExistingFile);
  bind.add(export_cmd, "output", "-o,--output", s.output, "Write to this file instead of stdout");
  bind.add(export_cmd, "graph_format", "--graph-format", graph_format, "dot or graphml");
  bind.add(export_cmd, "color_by", "--color-by", color_by, "depth, country, sic1 or sic2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string current_file;
  try {
    if (!config.empty()) bind.apply_config(sub, config);
    if (sub == generate_cmd && generate_cmd->get_option("--format")->count() == 0 &&
        s.format == "table")
      s.format.clear();

    if (sub == validate) {
      std::size_t n_firms = 0, n_entities = 0;
      for (const auto& f : files) {
        current_file = f;
        const Snapshot snap = load(f);
        n_firms += snap.firms().size();
        for (const auto& firm : snap.firms()) n_entities += firm.tree.size();
      }
      std::cout << n_firms << (n_firms == 1 ? " firm, " : " firms, ") << n_entities
                << (n_entities == 1 ? " entity" : " entities") << ", OK\n";
      return 0;
    }

    if (sub == generate_cmd) {
      std::string fmt = s.format;
      if (fmt.empty()) fmt = (!s.output.empty() && format_for_path(s.output) == SnapshotFormat::json) ? "json" : "csv";
      SnapshotFormat sf;
      if (fmt == "csv")
        sf = SnapshotFormat::csv;
      else if (fmt == "json")
        sf = SnapshotFormat::json;
      else
        throw UsageError("generate writes csv or json, not '" + fmt + "'");
      const Snapshot snap = generate(gen, s.seed);
      emit(s.output, [&](std::ostream& out) { save_snapshot(snap, out, sf); });
      return 0;
    }

    current_file = files.front();
    const Snapshot snap = load(files.front());

    if (sub == describe_cmd) {
      const auto fmt = report_format(s);
      emit(s.output, [&](std::ostream& out) { render_descriptive(snap, out, fmt); });
    } else if (sub == metrics) {
      const auto fmt = report_format(s);
      const auto bundle = build_report(snap, report_options(s));
      if (!s.plotdata.empty()) write_plot_data(snap, s.plotdata, s.bucket_cap);
      emit(s.output, [&](std::ostream& out) { render_report(bundle, out, fmt); });
    } else if (sub == powerlaw) {
      const auto fmt = report_format(s);
      emit(s.output, [&](std::ostream& out) { render_powerlaw(snap, out, fmt, s.workers); });
    } else if (sub == compare) {
      const auto fmt = report_format(s);
      current_file = files[1];
      const Snapshot later = load(files[1]);
      current_file.clear();
      const auto diff = compare_snapshots(snap, later, report_options(s));
      emit(s.output, [&](std::ostream& out) { render_diff(diff, out, fmt); });
    } else if (sub == simulate) {
      const auto fmt = report_format(s);
      const ControlTree& tree = pick_firm(snap, firm_id);
      std::ifstream in(script_path);
      if (!in) throw Error("cannot open script '" + script_path + "'");
      current_file = script_path;
      const auto script = parse_script(in);
      const auto kinds = label_kinds(s);
      const auto trajectory = simulate_restructure(tree, script, kinds);
      emit(s.output, [&](std::ostream& out) { render_trajectory(trajectory, out, fmt); });
    } else if (sub == export_cmd) {
      auto gf = parse_graph_format(graph_format);
      if (!gf) throw UsageError("unknown --graph-format '" + graph_format + "' (dot, graphml)");
      auto cb = parse_color_by(color_by);
      if (!cb) throw UsageError("unknown --color-by '" + color_by + "'");
      const ControlTree& tree = pick_firm(snap, firm_id);
      emit(s.output, [&](std::ostream& out) { export_graph(tree, out, *gf, *cb); });
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const IngestError& e) {
    std::cerr << current_file;
    if (e.line() > 0) std::cerr << ':' << e.line();
    std::cerr << ": " << to_string(e.code());
    if (e.tree_code()) std::cerr << '/' << to_string(*e.tree_code());
    if (!e.firm_id().empty()) std::cerr << " (firm " << e.firm_id() << ')';
    std::cerr << ": " << e.what() << "\n";
    return kDataError;
  } catch (const RestructureError& e) {
    std::cerr << current_file << ": " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << (current_file.empty() ? "" : current_file + ": ") << "error: " << e.what() << "\n";
    return kDataError;
  }
}
