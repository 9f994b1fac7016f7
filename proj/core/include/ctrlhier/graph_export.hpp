#pragma once

#include <iosfwd>
#include <string>

#include "ctrlhier/tree.hpp"

namespace ctrlhier {

enum class GraphFormat { dot, graphml };
enum class ColorBy { depth, country, sic1, sic2 };

std::optional<GraphFormat> parse_graph_format(std::string_view text);
std::optional<ColorBy> parse_color_by(std::string_view text);

// Writes the tree with node attributes level, country, sic1, sic2,
// size_rank (largest at the root, shrinking with level) and a color class
// derived from `color_by`. No layout coordinates are produced.
void export_graph(const ControlTree& tree, std::ostream& out, GraphFormat format, ColorBy color_by);
std::string export_graph(const ControlTree& tree, GraphFormat format, ColorBy color_by);

}  // namespace ctrlhier
