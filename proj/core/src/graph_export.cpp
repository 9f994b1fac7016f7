#include "ctrlhier/graph_export.hpp"

#include <map>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace ctrlhier {

std::optional<GraphFormat> parse_graph_format(std::string_view text) {
  const auto t = detail::lower(detail::trim(text));
  if (t == "dot") return GraphFormat::dot;
  if (t == "graphml") return GraphFormat::graphml;
  return std::nullopt;
}

std::optional<ColorBy> parse_color_by(std::string_view text) {
  const auto t = detail::lower(detail::trim(text));
  if (t == "depth") return ColorBy::depth;
  if (t == "country") return ColorBy::country;
  if (t == "sic1") return ColorBy::sic1;
  if (t == "sic2") return ColorBy::sic2;
  return std::nullopt;
}

namespace {

// tab20
constexpr std::string_view kPalette[] = {
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728",
    "#ff9896", "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2",
    "#7f7f7f", "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5"};

struct NodeAttributes {
  std::uint32_t level;
  std::string country;
  std::string sic1;
  std::string sic2;
  std::uint32_t size_rank;
  std::size_t color_class;
};

std::vector<NodeAttributes> attributes(const ControlTree& tree, ColorBy color_by) {
  std::vector<NodeAttributes> out;
  out.reserve(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    out.push_back({tree.level(i), tree.labels(i).country, tree.label(i, LabelKind::sic1),
                   tree.label(i, LabelKind::sic2), tree.depth() - tree.level(i) + 1, 0});
  }
  std::map<std::string, std::size_t> classes;
  auto key = [&](const NodeAttributes& a) -> std::string {
    switch (color_by) {
      case ColorBy::depth: return {};
      case ColorBy::country: return a.country;
      case ColorBy::sic1: return a.sic1;
      case ColorBy::sic2: return a.sic2;
    }
    return {};
  };
  if (color_by == ColorBy::depth) {
    for (auto& a : out) a.color_class = a.level;
  } else {
    for (const auto& a : out) classes.emplace(key(a), 0);
    std::size_t next = 0;
    for (auto& [k, v] : classes) v = next++;
    for (auto& a : out) a.color_class = classes.at(key(a));
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_dot(const ControlTree& tree, const std::vector<NodeAttributes>& attrs, std::ostream& out) {
  out << "digraph " << dot_quote(tree.firm_id()) << " {\n";
  out << "  node [shape=circle, style=filled, label=\"\"];\n";
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const auto& a = attrs[i];
    out << "  " << dot_quote(tree.id(i)) << " [level=" << a.level
        << ", country=" << dot_quote(a.country) << ", sic1=" << dot_quote(a.sic1)
        << ", sic2=" << dot_quote(a.sic2) << ", size_rank=" << a.size_rank
        << ", color_class=" << a.color_class << ", fillcolor=\""
        << kPalette[a.color_class % std::size(kPalette)] << "\", width="
        << (20 + 15 * a.size_rank) / 100.0 << "];\n";
  }
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    for (NodeIndex c : tree.children(i))
      out << "  " << dot_quote(tree.id(i)) << " -> " << dot_quote(tree.id(c)) << ";\n";
  }
  out << "}\n";
}

void write_graphml(const ControlTree& tree, const std::vector<NodeAttributes>& attrs,
                   std::ostream& out) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\"\n"
         "    xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\"\n"
         "    xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
         "  <key id=\"level\" for=\"node\" attr.name=\"level\" attr.type=\"int\"/>\n"
         "  <key id=\"country\" for=\"node\" attr.name=\"country\" attr.type=\"string\"/>\n"
         "  <key id=\"sic1\" for=\"node\" attr.name=\"sic1\" attr.type=\"string\"/>\n"
         "  <key id=\"sic2\" for=\"node\" attr.name=\"sic2\" attr.type=\"string\"/>\n"
         "  <key id=\"size_rank\" for=\"node\" attr.name=\"size_rank\" attr.type=\"int\"/>\n"
         "  <key id=\"color_class\" for=\"node\" attr.name=\"color_class\" attr.type=\"int\"/>\n"
         "  <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n";
  out << "  <graph id=\"" << xml_escape(tree.firm_id()) << "\" edgedefault=\"directed\">\n";
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const auto& a = attrs[i];
    out << "    <node id=\"" << xml_escape(tree.id(i)) << "\">\n"
        << "      <data key=\"level\">" << a.level << "</data>\n"
        << "      <data key=\"country\">" << xml_escape(a.country) << "</data>\n"
        << "      <data key=\"sic1\">" << xml_escape(a.sic1) << "</data>\n"
        << "      <data key=\"sic2\">" << xml_escape(a.sic2) << "</data>\n"
        << "      <data key=\"size_rank\">" << a.size_rank << "</data>\n"
        << "      <data key=\"color_class\">" << a.color_class << "</data>\n"
        << "      <data key=\"color\">" << kPalette[a.color_class % std::size(kPalette)]
        << "</data>\n"
        << "    </node>\n";
  }
  std::size_t edge = 0;
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    for (NodeIndex c : tree.children(i)) {
      out << "    <edge id=\"e" << edge++ << "\" source=\"" << xml_escape(tree.id(i))
          << "\" target=\"" << xml_escape(tree.id(c)) << "\"/>\n";
    }
  }
  out << "  </graph>\n</graphml>\n";
}

}  // namespace

void export_graph(const ControlTree& tree, std::ostream& out, GraphFormat format, ColorBy color_by) {
  const auto attrs = attributes(tree, color_by);
  if (format == GraphFormat::dot)
    write_dot(tree, attrs, out);
  else
    write_graphml(tree, attrs, out);
}

std::string export_graph(const ControlTree& tree, GraphFormat format, ColorBy color_by) {
  std::ostringstream out;
  export_graph(tree, out, format, color_by);
  return out.str();
}

}  // namespace ctrlhier
