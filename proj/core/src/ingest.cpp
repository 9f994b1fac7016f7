#include "ctrlhier/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ctrlhier/random.hpp"
#include "text_util.hpp"

namespace ctrlhier {

IngestError::IngestError(Code code, std::string message, std::size_t line, std::string firm_id,
                         std::optional<TreeError::Code> tree_code)
    : Error(std::move(message)),
      code_(code),
      line_(line),
      firm_id_(std::move(firm_id)),
      tree_code_(tree_code) {}

std::string_view to_string(IngestError::Code code) {
  using C = IngestError::Code;
  switch (code) {
    case C::parse_error: return "ParseError";
    case C::validation_error: return "ValidationError";
    case C::duplicate_firm: return "DuplicateFirm";
    case C::bad_date: return "BadDate";
    case C::bad_group_tag: return "BadGroupTag";
    case C::inconsistent_firm: return "InconsistentFirm";
  }
  return "?";
}

namespace {

using C = IngestError::Code;

struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// RFC-4180 reader: quoted fields may hold commas, doubled quotes and line
// breaks; LF and CRLF are both accepted.
class CsvReader {
 public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {
    if (text_.starts_with("\xEF\xBB\xBF")) pos_ = 3;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  std::size_t line() const { return line_; }

  std::string_view peek_line() const {
    const auto end = text_.find('\n', pos_);
    auto s = std::string_view(text_).substr(pos_, end == std::string::npos ? std::string::npos
                                                                           : end - pos_);
    if (s.ends_with('\r')) s.remove_suffix(1);
    return s;
  }

  void skip_line() {
    const auto end = text_.find('\n', pos_);
    pos_ = end == std::string::npos ? text_.size() : end + 1;
    ++line_;
  }

  CsvRecord next() {
    CsvRecord rec;
    rec.line = line_;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field += '"';
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field += c;
        }
        continue;
      }
      if (c == '"') {
        if (!field.empty() || field_was_quoted)
          throw IngestError(C::parse_error, "unexpected quote inside unquoted field", line_);
        quoted = true;
        field_was_quoted = true;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      } else {
        if (field_was_quoted)
          throw IngestError(C::parse_error, "characters after closing quote", line_);
        field += c;
      }
    }
    if (quoted) throw IngestError(C::parse_error, "unterminated quoted field", rec.line);
    rec.fields.push_back(std::move(field));
    return rec;
  }

 private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::optional<double> parse_size(std::string_view text, std::size_t line) {
  const auto t = detail::trim(text);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size() || !std::isfinite(v) || v < 0.0)
    throw IngestError(C::parse_error, "size '" + std::string(t) + "' is not a number >= 0", line);
  return v;
}

FirmGroup parse_group(std::string_view text, std::size_t line, const std::string& firm) {
  if (auto g = parse_firm_group(text)) return *g;
  throw IngestError(C::bad_group_tag,
                    "unknown group tag '" + std::string(text) + "' (expected SIFI, BANK or INSURER)",
                    line, firm);
}

std::string checked_date(std::string_view text, std::size_t line) {
  const auto t = detail::trim(text);
  if (!is_iso_date(t))
    throw IngestError(C::bad_date, "as_of '" + std::string(t) + "' is not a YYYY-MM-DD date", line);
  return std::string(t);
}

struct PendingFirm {
  std::string id;
  std::size_t first_line = 0;
  FirmGroup group = FirmGroup::sifi;
  std::optional<double> size;
  std::vector<EntityRow> rows;
};

Firm finish_firm(PendingFirm&& p) {
  try {
    return Firm{ControlTree::build(p.id, p.rows), p.group, p.size};
  } catch (const TreeError& e) {
    throw IngestError(C::validation_error, "firm '" + p.id + "': " + e.what(), p.first_line, p.id,
                      e.code());
  }
}

Snapshot assemble(std::string as_of, std::vector<PendingFirm>&& pending) {
  std::vector<Firm> firms;
  firms.reserve(pending.size());
  for (auto& p : pending) firms.push_back(finish_firm(std::move(p)));
  try {
    return Snapshot(std::move(as_of), std::move(firms));
  } catch (const SnapshotError& e) {
    throw IngestError(e.code() == SnapshotError::Code::duplicate_firm ? C::duplicate_firm
                      : e.code() == SnapshotError::Code::bad_date ? C::bad_date
                                                                  : C::parse_error,
                      e.what());
  }
}

Snapshot load_csv(std::string text, std::vector<std::string>* warnings) {
  CsvReader reader(std::move(text));
  std::optional<std::string> as_of;

  while (!reader.at_end() && reader.peek_line().starts_with('#')) {
    const std::size_t line = reader.line();
    auto body = detail::trim(reader.peek_line().substr(1));
    if (body.starts_with("as_of")) {
      body = detail::trim(body.substr(5));
      if (!body.empty() && (body.front() == ':' || body.front() == '=')) body.remove_prefix(1);
      as_of = checked_date(body, line);
    }
    reader.skip_line();
  }
  if (reader.at_end()) throw IngestError(C::parse_error, "missing CSV header", reader.line());

  const CsvRecord header = reader.next();
  static constexpr std::string_view required[] = {"firm_id", "entity_id", "parent_id", "country",
                                                  "sic",     "group",     "as_of"};
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.fields.size(); ++i) {
    const std::string name(detail::trim(header.fields[i]));
    if (std::find(std::begin(required), std::end(required), name) == std::end(required) &&
        name != "size") {
      if (warnings) warnings->push_back("ignoring unknown column '" + name + "'");
      continue;
    }
    if (!column.emplace(name, i).second)
      throw IngestError(C::parse_error, "duplicate column '" + name + "'", header.line);
  }
  for (auto name : required) {
    if (!column.contains(std::string(name)))
      throw IngestError(C::parse_error, "missing required column '" + std::string(name) + "'",
                        header.line);
  }
  const std::optional<std::size_t> size_col =
      column.contains("size") ? std::optional(column.at("size")) : std::nullopt;

  std::vector<PendingFirm> pending;
  std::map<std::string, std::size_t, std::less<>> firm_index;
  std::map<std::string, std::string, std::less<>> firm_dates;

  while (!reader.at_end()) {
    CsvRecord rec = reader.next();
    if (rec.fields.size() == 1 && detail::trim(rec.fields[0]).empty()) continue;  // blank line
    if (rec.fields.size() != header.fields.size())
      throw IngestError(C::parse_error,
                        "expected " + std::to_string(header.fields.size()) + " fields, found " +
                            std::to_string(rec.fields.size()),
                        rec.line);
    auto field = [&](std::string_view name) -> const std::string& {
      return rec.fields[column.at(std::string(name))];
    };
    const std::string firm_id(detail::trim(field("firm_id")));
    if (firm_id.empty()) throw IngestError(C::parse_error, "empty firm_id", rec.line);
    const FirmGroup group = parse_group(field("group"), rec.line, firm_id);
    const std::string date = checked_date(field("as_of"), rec.line);
    const auto size = size_col ? parse_size(rec.fields[*size_col], rec.line) : std::nullopt;

    if (!as_of) as_of = date;
    if (date != *as_of)
      throw IngestError(C::inconsistent_firm,
                        "as_of " + date + " differs from snapshot date " + *as_of, rec.line,
                        firm_id);

    auto [it, inserted] = firm_index.try_emplace(firm_id, pending.size());
    if (inserted) pending.push_back(PendingFirm{firm_id, rec.line, group, size, {}});
    PendingFirm& firm = pending[it->second];
    if (firm.group != group)
      throw IngestError(C::inconsistent_firm, "firm '" + firm_id + "' has conflicting group tags",
                        rec.line, firm_id);
    if (size) {
      if (firm.size && *firm.size != *size)
        throw IngestError(C::inconsistent_firm, "firm '" + firm_id + "' has conflicting sizes",
                          rec.line, firm_id);
      firm.size = size;
    }

    EntityRow row;
    row.id = std::string(detail::trim(field("entity_id")));
    const auto parent = detail::trim(field("parent_id"));
    if (!parent.empty()) row.parent = std::string(parent);
    row.country = field("country");
    row.sic = field("sic");
    firm.rows.push_back(std::move(row));
  }
  if (!as_of)
    throw IngestError(C::bad_date, "snapshot has no rows and no '# as_of:' line", reader.line());
  return assemble(std::move(*as_of), std::move(pending));
}

using nlohmann::json;

std::string json_string(const json& j, std::string_view what) {
  if (!j.is_string()) throw IngestError(C::parse_error, std::string(what) + " must be a string");
  return j.get<std::string>();
}

Snapshot load_json(std::string text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IngestError(C::parse_error, e.what(), e.byte);
  }
  if (!doc.is_object()) throw IngestError(C::parse_error, "top level must be an object");
  if (!doc.contains("as_of")) throw IngestError(C::bad_date, "missing 'as_of'");
  std::string as_of = checked_date(json_string(doc["as_of"], "as_of"), 0);
  if (!doc.contains("firms") || !doc["firms"].is_array())
    throw IngestError(C::parse_error, "'firms' must be an array");

  std::vector<PendingFirm> pending;
  for (const auto& f : doc["firms"]) {
    if (!f.is_object()) throw IngestError(C::parse_error, "firm entries must be objects");
    PendingFirm p;
    p.id = f.contains("firm_id") ? json_string(f["firm_id"], "firm_id") : std::string{};
    if (p.id.empty()) throw IngestError(C::parse_error, "firm without 'firm_id'");
    if (!f.contains("group")) throw IngestError(C::bad_group_tag, "firm '" + p.id + "' has no group");
    p.group = parse_group(json_string(f["group"], "group"), 0, p.id);
    if (f.contains("size") && !f["size"].is_null()) {
      if (!f["size"].is_number())
        throw IngestError(C::parse_error, "firm '" + p.id + "': size must be a number");
      const double v = f["size"].get<double>();
      if (!std::isfinite(v) || v < 0.0)
        throw IngestError(C::parse_error, "firm '" + p.id + "': size must be >= 0");
      p.size = v;
    }
    if (!f.contains("entities") || !f["entities"].is_array())
      throw IngestError(C::parse_error, "firm '" + p.id + "': 'entities' must be an array");
    for (const auto& e : f["entities"]) {
      if (!e.is_object()) throw IngestError(C::parse_error, "entity entries must be objects");
      EntityRow row;
      row.id = e.contains("id") ? json_string(e["id"], "id") : std::string{};
      if (e.contains("parent") && !e["parent"].is_null()) row.parent = json_string(e["parent"], "parent");
      row.country = e.contains("country") ? json_string(e["country"], "country") : std::string{};
      row.sic = e.contains("sic") ? json_string(e["sic"], "sic") : std::string{};
      p.rows.push_back(std::move(row));
    }
    pending.push_back(std::move(p));
  }
  return assemble(std::move(as_of), std::move(pending));
}

std::string csv_field(std::string_view value) {
  const bool needs_quotes =
      value.find_first_of(",\"\r\n") != std::string_view::npos ||
      (!value.empty() && (value.front() == ' ' || value.back() == ' ' || value.front() == '#'));
  if (!needs_quotes) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void save_csv(const Snapshot& s, std::ostream& out) {
  out << "# as_of: " << s.as_of() << '\n';
  out << "firm_id,entity_id,parent_id,country,sic,group,as_of,size\n";
  for (const auto& firm : s.firms()) {
    const std::string firm_id = csv_field(firm.id());
    const std::string size = firm.size ? detail::format_double(*firm.size) : std::string{};
    for (const auto& r : firm.tree.rows()) {
      out << firm_id << ',' << csv_field(r.id) << ',' << csv_field(r.parent.value_or("")) << ','
          << csv_field(r.country) << ',' << csv_field(r.sic) << ',' << to_string(firm.group)
          << ',' << s.as_of() << ',' << size << '\n';
    }
  }
}

void save_json(const Snapshot& s, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["as_of"] = s.as_of();
  doc["firms"] = nlohmann::ordered_json::array();
  for (const auto& firm : s.firms()) {
    nlohmann::ordered_json f;
    f["firm_id"] = firm.id();
    f["group"] = std::string(to_string(firm.group));
    if (firm.size) f["size"] = *firm.size;
    f["entities"] = nlohmann::ordered_json::array();
    for (const auto& r : firm.tree.rows()) {
      nlohmann::ordered_json e;
      e["id"] = r.id;
      if (r.parent) e["parent"] = *r.parent;
      e["country"] = r.country;
      e["sic"] = r.sic;
      f["entities"].push_back(std::move(e));
    }
    doc["firms"].push_back(std::move(f));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace

Snapshot load_snapshot(std::istream& in, SnapshotFormat format, std::vector<std::string>* warnings) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return format == SnapshotFormat::json ? load_json(std::move(text))
                                        : load_csv(std::move(text), warnings);
}

SnapshotFormat format_for_path(const std::string& path) {
  return detail::lower(path).ends_with(".json") ? SnapshotFormat::json : SnapshotFormat::csv;
}

Snapshot load_snapshot_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(C::parse_error, "cannot open '" + path + "'");
  return load_snapshot(in, format_for_path(path), warnings);
}

void save_snapshot(const Snapshot& snapshot, std::ostream& out, SnapshotFormat format) {
  if (format == SnapshotFormat::json)
    save_json(snapshot, out);
  else
    save_csv(snapshot, out);
}

std::string save_snapshot(const Snapshot& snapshot, SnapshotFormat format) {
  std::ostringstream out;
  save_snapshot(snapshot, out, format);
  return out.str();
}

namespace {

ControlTree anonymize_tree(const ControlTree& tree, std::string firm_id) {
  const std::size_t width = std::to_string(tree.size()).size();
  std::vector<std::string> token(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    std::string digits = std::to_string(i + 1);
    token[i] = "E" + std::string(width - digits.size(), '0') + digits;
  }
  std::vector<EntityRow> rows;
  rows.reserve(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    EntityRow r{token[i], std::nullopt, tree.labels(i).country, tree.labels(i).sic};
    if (tree.parent(i) != kNoNode) r.parent = token[tree.parent(i)];
    rows.push_back(std::move(r));
  }
  return ControlTree::build(std::move(firm_id), rows);
}

}  // namespace

Snapshot anonymize(const Snapshot& snapshot, std::uint64_t seed) {
  std::vector<Firm> out;
  out.reserve(snapshot.firms().size());
  for (FirmGroup g : {FirmGroup::sifi, FirmGroup::bank, FirmGroup::insurer}) {
    std::vector<const Firm*> members;
    for (const auto& f : snapshot.firms())
      if (f.group == g) members.push_back(&f);
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(g)));
    rng.shuffle(std::span(members));
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Firm& f = *members[k];
      std::string id = std::string(1, group_prefix(g)) + std::to_string(k + 1);
      out.push_back(Firm{anonymize_tree(f.tree, std::move(id)), f.group, f.size});
    }
  }
  return Snapshot(snapshot.as_of(), std::move(out));
}

}  // namespace ctrlhier
