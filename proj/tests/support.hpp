#pragma once

#include <string>
#include <vector>

#include "ctrlhier/snapshot.hpp"
#include "ctrlhier/tree.hpp"

namespace testing {

using ctrlhier::ControlTree;
using ctrlhier::EntityRow;

inline EntityRow row(std::string id, std::string parent, std::string country = "US",
                     std::string sic = "6021") {
  EntityRow r;
  r.id = std::move(id);
  if (!parent.empty()) r.parent = std::move(parent);
  r.country = std::move(country);
  r.sic = std::move(sic);
  return r;
}

// A is the root; B and C hang off A; D and E hang off C.
inline ControlTree figure1(const std::vector<std::string>& countries = {"US", "US", "US", "US", "US"},
                           std::string firm_id = "F1") {
  std::vector<EntityRow> rows{row("A", "", countries[0]), row("B", "A", countries[1]),
                              row("C", "A", countries[2]), row("D", "C", countries[3]),
                              row("E", "C", countries[4])};
  return ctrlhier::build_tree(std::move(firm_id), rows);
}

inline std::string pad(std::size_t i, int width = 6) {
  std::string s = std::to_string(i);
  return std::string(width - static_cast<int>(s.size()), '0') + s;
}

// n-node path: node i is the only child of node i-1.
inline ControlTree chain(std::size_t n, std::string firm_id = "CHAIN") {
  std::vector<EntityRow> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back(row("N" + pad(i), i ? "N" + pad(i - 1) : ""));
  return ctrlhier::build_tree(std::move(firm_id), rows);
}

// Tree whose level sizes are given: every node on level k+1 hangs off the
// first node of level k.
inline ControlTree layered(const std::vector<std::size_t>& levels, std::string firm_id = "L") {
  std::vector<EntityRow> rows{row("R", "")};
  std::string anchor = "R";
  for (std::size_t k = 0; k < levels.size(); ++k) {
    std::string first;
    for (std::size_t i = 0; i < levels[k]; ++i) {
      std::string id = "L" + std::to_string(k + 1) + "_" + pad(i);
      rows.push_back(row(id, anchor));
      if (i == 0) first = id;
    }
    anchor = first;
  }
  return ctrlhier::build_tree(std::move(firm_id), rows);
}

inline std::string fixture(const std::string& name) {
  return std::string(CTRLHIER_FIXTURE_DIR) + "/" + name;
}

}  // namespace testing
