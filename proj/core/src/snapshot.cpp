#include "ctrlhier/snapshot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "text_util.hpp"

namespace ctrlhier {

std::string_view to_string(FirmGroup group) {
  switch (group) {
    case FirmGroup::sifi: return "SIFI";
    case FirmGroup::bank: return "BANK";
    case FirmGroup::insurer: return "INSURER";
  }
  return "?";
}

std::optional<FirmGroup> parse_firm_group(std::string_view text) {
  const auto t = detail::trim(text);
  if (t == "SIFI") return FirmGroup::sifi;
  if (t == "BANK") return FirmGroup::bank;
  if (t == "INSURER") return FirmGroup::insurer;
  return std::nullopt;
}

char group_prefix(FirmGroup group) {
  switch (group) {
    case FirmGroup::sifi: return 'S';
    case FirmGroup::bank: return 'B';
    case FirmGroup::insurer: return 'I';
  }
  return '?';
}

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  auto num = [&](std::size_t pos, std::size_t len, int& out) {
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc{} && p == s.data() + pos + len;
  };
  int y = 0, m = 0, d = 0;
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return false;
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int limit = days[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

Snapshot::Snapshot(std::string as_of, std::vector<Firm> firms)
    : as_of_(std::move(as_of)), firms_(std::move(firms)) {
  if (!is_iso_date(as_of_))
    throw SnapshotError(SnapshotError::Code::bad_date,
                        "as_of '" + as_of_ + "' is not an ISO-8601 date (YYYY-MM-DD)");
  std::sort(firms_.begin(), firms_.end(),
            [](const Firm& a, const Firm& b) { return a.id() < b.id(); });
  for (std::size_t i = 1; i < firms_.size(); ++i) {
    if (firms_[i].id() == firms_[i - 1].id())
      throw SnapshotError(SnapshotError::Code::duplicate_firm,
                          "duplicate firm id '" + firms_[i].id() + "'");
  }
  for (const auto& f : firms_) {
    if (f.size && !(std::isfinite(*f.size) && *f.size >= 0.0))
      throw SnapshotError(SnapshotError::Code::bad_size,
                          "firm '" + f.id() + "' has a negative or non-finite size");
  }
}

const Firm* Snapshot::find(std::string_view firm_id) const {
  auto it = std::lower_bound(firms_.begin(), firms_.end(), firm_id,
                             [](const Firm& f, std::string_view id) { return f.id() < id; });
  return it != firms_.end() && it->id() == firm_id ? &*it : nullptr;
}

std::size_t Snapshot::count(FirmGroup group) const {
  return static_cast<std::size_t>(
      std::count_if(firms_.begin(), firms_.end(), [group](const Firm& f) { return f.group == group; }));
}

}  // namespace ctrlhier
