#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlhier/error.hpp"
#include "ctrlhier/tree.hpp"

namespace ctrlhier {

enum class FirmGroup { sifi, bank, insurer };

std::string_view to_string(FirmGroup group);  // "SIFI", "BANK", "INSURER"
std::optional<FirmGroup> parse_firm_group(std::string_view text);
// Prefix used by anonymized firm ids: S, B or I.
char group_prefix(FirmGroup group);

struct Firm {
  ControlTree tree;
  FirmGroup group = FirmGroup::sifi;
  std::optional<double> size;  // total assets, currency units

  const std::string& id() const { return tree.firm_id(); }
  friend bool operator==(const Firm&, const Firm&) = default;
};

class SnapshotError : public Error {
 public:
  enum class Code { duplicate_firm, bad_date, bad_size };
  SnapshotError(Code code, std::string message) : Error(std::move(message)), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

bool is_iso_date(std::string_view text);

// A dated collection of control hierarchies. Firms are kept sorted by
// firm_id, which fixes report order.
class Snapshot {
 public:
  Snapshot(std::string as_of, std::vector<Firm> firms);

  const std::string& as_of() const noexcept { return as_of_; }
  const std::vector<Firm>& firms() const noexcept { return firms_; }
  const Firm* find(std::string_view firm_id) const;
  std::size_t count(FirmGroup group) const;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;

 private:
  std::string as_of_;
  std::vector<Firm> firms_;
};

}  // namespace ctrlhier
