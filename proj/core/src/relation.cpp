#include "tdt/relation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "tdt/error.hpp"

namespace tdt {
namespace {

using nlohmann::json;

void require_unique(const std::vector<std::string>& ids, std::string_view what) {
  std::unordered_set<std::string_view> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate " + std::string(what) + " identifier '" +
                            id + "'");
    }
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

// Parses a "input,<col0>,<col1>,..." boolean table, returning the column
// names, the row identifiers and the row-major cells.
struct BoolTable {
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::uint8_t> cells;
};

BoolTable parse_bool_table(std::string_view text, std::string_view what) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  const auto lines = split_lines(text);
  if (lines.empty()) throw FormatError(std::string(what) + " CSV: missing header");
  auto header = split_fields(lines[0]);
  if (header.empty() || header[0] != "input") {
    throw FormatError(std::string(what) +
                      " CSV line 1: header must start with 'input'");
  }
  BoolTable table;
  table.columns.assign(header.begin() + 1, header.end());
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto fields = split_fields(lines[li]);
    if (fields.size() != header.size()) {
      throw FormatError(std::string(what) + " CSV line " + std::to_string(li + 1) +
                        ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(fields[0]);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      if (fields[f] != "0" && fields[f] != "1") {
        throw FormatError(std::string(what) + " CSV line " + std::to_string(li + 1) +
                          ", field " + std::to_string(f + 1) + " ('" +
                          header[f] + "'): cell must be 0 or 1, got '" +
                          fields[f] + "'");
      }
      table.cells.push_back(fields[f] == "1" ? 1 : 0);
    }
  }
  return table;
}

std::vector<std::uint8_t> transpose(const std::vector<std::uint8_t>& cells,
                                    std::size_t rows, std::size_t cols) {
  std::vector<std::uint8_t> out(cells.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = cells[r * cols + c];
  }
  return out;
}

}  // namespace

void require_diagram_capacity(std::size_t m, std::string_view operation) {
  if (m > kMaxDiagramPrograms) {
    throw CapacityError(std::string(operation) + ": " + std::to_string(m) +
                        " programs exceeds the limit of " +
                        std::to_string(kMaxDiagramPrograms));
  }
}

Relation::Relation(std::vector<std::string> programs,
                   std::vector<std::string> inputs,
                   std::vector<std::uint8_t> accepts)
    : programs_(std::move(programs)),
      inputs_(std::move(inputs)),
      accepts_(std::move(accepts)) {
  if (programs_.empty()) throw ValidationError("relation needs at least one program");
  if (accepts_.size() != programs_.size() * inputs_.size()) {
    throw ValidationError("relation matrix has " + std::to_string(accepts_.size()) +
                          " cells, expected " +
                          std::to_string(programs_.size() * inputs_.size()));
  }
  require_unique(programs_, "program");
  require_unique(inputs_, "input");
  for (auto& cell : accepts_) cell = cell != 0 ? 1 : 0;
  if (programs_.size() <= Subset::kMaxElements) {
    columns_.resize(inputs_.size());
    for (std::size_t j = 0; j < programs_.size(); ++j) {
      for (std::size_t k = 0; k < inputs_.size(); ++k) {
        if (this->accepts(j, k)) columns_[k] = columns_[k].with(j);
      }
    }
  }
}

Relation Relation::from_rows(std::vector<std::string> programs,
                             std::vector<std::string> inputs,
                             std::span<const std::string> rows) {
  if (rows.size() != programs.size()) {
    throw ValidationError("relation has " + std::to_string(programs.size()) +
                          " programs but " + std::to_string(rows.size()) + " rows");
  }
  std::vector<std::uint8_t> cells;
  cells.reserve(rows.size() * inputs.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != inputs.size()) {
      throw FormatError("rows[" + std::to_string(j) + "]: length " +
                        std::to_string(rows[j].size()) + ", expected " +
                        std::to_string(inputs.size()));
    }
    for (std::size_t k = 0; k < rows[j].size(); ++k) {
      const char c = rows[j][k];
      if (c != '0' && c != '1') {
        throw FormatError("rows[" + std::to_string(j) + "], column " +
                          std::to_string(k) + ": expected '0' or '1'");
      }
      cells.push_back(c == '1' ? 1 : 0);
    }
  }
  return Relation(std::move(programs), std::move(inputs), std::move(cells));
}

std::size_t Relation::accept_count(std::size_t program) const {
  const auto first = accepts_.begin() + static_cast<std::ptrdiff_t>(program * inputs_.size());
  return static_cast<std::size_t>(
      std::count(first, first + static_cast<std::ptrdiff_t>(inputs_.size()), 1));
}

std::string Relation::row_string(std::size_t program) const {
  std::string row(inputs_.size(), '0');
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    if (accepts(program, k)) row[k] = '1';
  }
  return row;
}

const std::vector<Subset>& Relation::column_sets() const {
  if (programs_.size() > Subset::kMaxElements) {
    throw CapacityError("accept-sets need at most 64 programs");
  }
  return columns_;
}

std::optional<std::size_t> Relation::find_program(std::string_view name) const {
  const auto it = std::find(programs_.begin(), programs_.end(), name);
  if (it == programs_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - programs_.begin());
}

FeatureRelation::FeatureRelation(std::vector<std::string> inputs,
                                 std::vector<std::string> features,
                                 std::vector<std::uint8_t> has_feature)
    : inputs_(std::move(inputs)),
      features_(std::move(features)),
      has_(std::move(has_feature)) {
  if (has_.size() != inputs_.size() * features_.size()) {
    throw ValidationError("feature matrix dimensions do not match identifiers");
  }
  require_unique(inputs_, "input");
  require_unique(features_, "feature");
  for (auto& cell : has_) cell = cell != 0 ? 1 : 0;
}

FeatureRelation FeatureRelation::without_feature(std::size_t feature) const {
  FeatureRelation copy = *this;
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    copy.has_[k * features_.size() + feature] = 0;
  }
  return copy;
}

RelationFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? RelationFormat::csv : RelationFormat::json;
}

Relation parse_relation_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("relation JSON: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("relation JSON: top level must be an object");
  auto strings = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw FormatError(std::string("relation JSON: field '") + key +
                        "' must be an array of strings");
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < doc[key].size(); ++i) {
      const auto& v = doc[key][i];
      if (!v.is_string()) {
        throw FormatError(std::string("relation JSON: ") + key + "[" +
                          std::to_string(i) + "] is not a string");
      }
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  auto programs = strings("programs");
  auto inputs = strings("inputs");
  auto rows = strings("rows");
  return Relation::from_rows(std::move(programs), std::move(inputs), rows);
}

Relation parse_relation_csv(std::string_view text) {
  auto table = parse_bool_table(text, "relation");
  const std::size_t m = table.columns.size();
  const std::size_t n = table.rows.size();
  return Relation(std::move(table.columns), std::move(table.rows),
                  transpose(table.cells, n, m));
}

Relation load_relation(const std::filesystem::path& path, RelationFormat format) {
  const std::string text = read_file(path);
  return format == RelationFormat::csv ? parse_relation_csv(text)
                                       : parse_relation_json(text);
}

std::string relation_to_json(const Relation& r) {
  json doc;
  doc["programs"] = r.programs();
  doc["inputs"] = r.inputs();
  json rows = json::array();
  for (std::size_t j = 0; j < r.program_count(); ++j) rows.push_back(r.row_string(j));
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

std::string relation_to_csv(const Relation& r) {
  std::ostringstream out;
  out << "input";
  for (const auto& p : r.programs()) out << ',' << p;
  out << '\n';
  for (std::size_t k = 0; k < r.input_count(); ++k) {
    out << r.inputs()[k];
    for (std::size_t j = 0; j < r.program_count(); ++j) {
      out << ',' << (r.accepts(j, k) ? '1' : '0');
    }
    out << '\n';
  }
  return out.str();
}

void save_relation(const Relation& r, const std::filesystem::path& path,
                   RelationFormat format) {
  write_file(path, format == RelationFormat::csv ? relation_to_csv(r)
                                                 : relation_to_json(r));
}

std::string relation_to_pgm(const Relation& r) {
  std::ostringstream out;
  out << "P2\n" << r.input_count() << ' ' << r.program_count() << "\n255\n";
  for (std::size_t j = 0; j < r.program_count(); ++j) {
    for (std::size_t k = 0; k < r.input_count(); ++k) {
      if (k > 0) out << ' ';
      out << (r.accepts(j, k) ? 255 : 0);
    }
    out << '\n';
  }
  return out.str();
}

FeatureRelation parse_feature_csv(std::string_view text) {
  auto table = parse_bool_table(text, "feature");
  return FeatureRelation(std::move(table.rows), std::move(table.columns),
                         std::move(table.cells));
}

FeatureRelation load_feature_relation(const std::filesystem::path& path) {
  return parse_feature_csv(read_file(path));
}

Relation restrict_programs(const Relation& r, Subset keep) {
  if (keep.empty()) throw ArgumentError("restrict_programs: keep set is empty");
  if (!keep.is_subset_of(Subset::full(r.program_count()))) {
    throw ArgumentError("restrict_programs: keep set names unknown programs");
  }
  std::vector<std::string> programs;
  std::vector<std::uint8_t> cells;
  for (std::size_t j : keep.members()) {
    programs.push_back(r.programs()[j]);
    for (std::size_t k = 0; k < r.input_count(); ++k) {
      cells.push_back(r.accepts(j, k) ? 1 : 0);
    }
  }
  return Relation(std::move(programs), r.inputs(), std::move(cells));
}

Relation restrict_inputs(const Relation& r, std::span<const std::size_t> keep) {
  for (std::size_t k : keep) {
    if (k >= r.input_count()) {
      throw ArgumentError("restrict_inputs: index " + std::to_string(k) +
                          " out of range for " + std::to_string(r.input_count()) +
                          " inputs");
    }
  }
  std::vector<std::string> inputs;
  inputs.reserve(keep.size());
  for (std::size_t k : keep) inputs.push_back(r.inputs()[k]);
  std::vector<std::uint8_t> cells;
  cells.reserve(r.program_count() * keep.size());
  for (std::size_t j = 0; j < r.program_count(); ++j) {
    for (std::size_t k : keep) cells.push_back(r.accepts(j, k) ? 1 : 0);
  }
  return Relation(r.programs(), std::move(inputs), std::move(cells));
}

Subset accept_set(const Relation& r, std::size_t input) {
  if (input >= r.input_count()) {
    throw ArgumentError("accept_set: input index " + std::to_string(input) +
                        " out of range");
  }
  return r.column_sets()[input];
}

std::vector<Ratio> acceptance_rates(const Relation& r) {
  if (r.input_count() == 0) {
    throw UndefinedStatisticError("acceptance rates are undefined for an empty corpus");
  }
  std::vector<Ratio> rates;
  for (std::size_t j = 0; j < r.program_count(); ++j) {
    rates.emplace_back(r.accept_count(j), r.input_count());
  }
  return rates;
}

std::vector<std::vector<std::optional<Ratio>>> conditional_acceptance(
    const Relation& r) {
  const std::size_t m = r.program_count();
  std::vector<std::vector<std::optional<Ratio>>> out(
      m, std::vector<std::optional<Ratio>>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t given = r.accept_count(j);
    if (given == 0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t both = 0;
      for (std::size_t k = 0; k < r.input_count(); ++k) {
        if (r.accepts(j, k) && r.accepts(i, k)) ++both;
      }
      out[j][i] = Ratio(both, given);
    }
  }
  return out;
}

std::vector<std::string> subset_names(const Relation& r, Subset s) {
  std::vector<std::string> names;
  for (std::size_t j : s.members()) {
    if (j < r.program_count()) names.push_back(r.programs()[j]);
  }
  return names;
}

Subset parse_subset(const Relation& r, std::string_view names) {
  Subset out;
  if (names.empty()) return out;
  std::size_t start = 0;
  while (start <= names.size()) {
    std::size_t comma = names.find(',', start);
    if (comma == std::string_view::npos) comma = names.size();
    const std::string_view name = names.substr(start, comma - start);
    const auto j = r.find_program(name);
    if (!j) throw ArgumentError("unknown program '" + std::string(name) + "'");
    if (*j >= Subset::kMaxElements) throw CapacityError("program index exceeds 64");
    out = out.with(*j);
    start = comma + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ArgumentError("failed writing '" + path.string() + "'");
}

}  // namespace tdt
