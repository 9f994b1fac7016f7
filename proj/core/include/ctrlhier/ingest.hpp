#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ctrlhier/snapshot.hpp"

namespace ctrlhier {

enum class SnapshotFormat { csv, json };

class IngestError : public Error {
 public:
  enum class Code {
    parse_error,
    validation_error,  // a firm's rows failed build_tree; see tree_code()
    duplicate_firm,
    bad_date,
    bad_group_tag,
    inconsistent_firm,  // group, as_of or size disagree across one firm's rows
  };

  IngestError(Code code, std::string message, std::size_t line = 0, std::string firm_id = {},
              std::optional<TreeError::Code> tree_code = std::nullopt);

  Code code() const noexcept { return code_; }
  // 1-based line (CSV) or byte offset (JSON); 0 when not applicable.
  std::size_t line() const noexcept { return line_; }
  const std::string& firm_id() const noexcept { return firm_id_; }
  std::optional<TreeError::Code> tree_code() const noexcept { return tree_code_; }

 private:
  Code code_;
  std::size_t line_;
  std::string firm_id_;
  std::optional<TreeError::Code> tree_code_;
};

std::string_view to_string(IngestError::Code code);

// CSV layout: optional "# as_of: YYYY-MM-DD" line, then the header
//   firm_id,entity_id,parent_id,country,sic,group,as_of[,size]
// with one row per entity. An empty parent_id marks the root. Unknown
// columns are ignored and reported through `warnings`.
Snapshot load_snapshot(std::istream& in, SnapshotFormat format,
                       std::vector<std::string>* warnings = nullptr);
Snapshot load_snapshot_file(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);
// Guesses the format from the file extension (.json, otherwise CSV).
SnapshotFormat format_for_path(const std::string& path);

void save_snapshot(const Snapshot& snapshot, std::ostream& out, SnapshotFormat format);
std::string save_snapshot(const Snapshot& snapshot, SnapshotFormat format);

// Replaces firm ids with group-prefixed ordinals (S1.., B1.., I1..) in a
// seeded random order within each group, and entity ids with zero-padded
// sequential tokens that keep the original id order. Labels and topology are
// unchanged.
Snapshot anonymize(const Snapshot& snapshot, std::uint64_t seed);

}  // namespace ctrlhier
