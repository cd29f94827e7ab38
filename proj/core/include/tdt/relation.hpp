#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdt/ratio.hpp"
#include "tdt/subset.hpp"

namespace tdt {

/// Largest program count accepted by operations that build dense power-set
/// tables (2^m entries).
inline constexpr std::size_t kMaxDiagramPrograms = 24;

/// Throws CapacityError when `m` exceeds kMaxDiagramPrograms.
void require_diagram_capacity(std::size_t m, std::string_view operation);

/// Boolean program x input relation: entry (j, k) is true iff program j
/// accepts input k. Immutable once constructed.
class Relation {
 public:
  /// `accepts` is row-major, programs.size() rows by inputs.size() columns.
  /// Throws ValidationError on duplicate identifiers, dimension mismatch or
  /// an empty program list.
  Relation(std::vector<std::string> programs, std::vector<std::string> inputs,
           std::vector<std::uint8_t> accepts);

  /// Builds from '0'/'1' row strings; throws FormatError on other characters.
  static Relation from_rows(std::vector<std::string> programs,
                            std::vector<std::string> inputs,
                            std::span<const std::string> rows);

  std::size_t program_count() const { return programs_.size(); }
  std::size_t input_count() const { return inputs_.size(); }
  const std::vector<std::string>& programs() const { return programs_; }
  const std::vector<std::string>& inputs() const { return inputs_; }

  bool accepts(std::size_t program, std::size_t input) const {
    return accepts_[program * inputs_.size() + input] != 0;
  }

  /// Number of inputs accepted by `program`.
  std::size_t accept_count(std::size_t program) const;

  /// Row j as a '0'/'1' string.
  std::string row_string(std::size_t program) const;

  /// Accept-set of every input, in input order. Requires m <= 64.
  const std::vector<Subset>& column_sets() const;

  std::optional<std::size_t> find_program(std::string_view name) const;

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  std::vector<std::string> programs_;
  std::vector<std::string> inputs_;
  std::vector<std::uint8_t> accepts_;
  std::vector<Subset> columns_;
};

/// Boolean input x feature relation: entry (k, l) is true iff input k has
/// feature l.
class FeatureRelation {
 public:
  FeatureRelation(std::vector<std::string> inputs,
                  std::vector<std::string> features,
                  std::vector<std::uint8_t> has_feature);

  std::size_t input_count() const { return inputs_.size(); }
  std::size_t feature_count() const { return features_.size(); }
  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& features() const { return features_; }

  bool has(std::size_t input, std::size_t feature) const {
    return has_[input * features_.size() + feature] != 0;
  }

  /// Copy with the given feature cleared on every input.
  FeatureRelation without_feature(std::size_t feature) const;

 private:
  std::vector<std::string> inputs_;
  std::vector<std::string> features_;
  std::vector<std::uint8_t> has_;
};

enum class RelationFormat { json, csv };

/// Picks csv for a ".csv" extension and json otherwise.
RelationFormat format_from_path(const std::filesystem::path& path);

Relation parse_relation_json(std::string_view text);
Relation parse_relation_csv(std::string_view text);
Relation load_relation(const std::filesystem::path& path, RelationFormat format);

/// Canonical JSON: sorted keys, two-space indent, trailing newline.
std::string relation_to_json(const Relation& r);
std::string relation_to_csv(const Relation& r);
void save_relation(const Relation& r, const std::filesystem::path& path,
                   RelationFormat format);

/// Plain PGM (P2), one pixel per cell: accept = 255, reject = 0. Rows are
/// programs, columns are inputs.
std::string relation_to_pgm(const Relation& r);

FeatureRelation parse_feature_csv(std::string_view text);
FeatureRelation load_feature_relation(const std::filesystem::path& path);

/// Row restriction to the programs in `keep` (order preserved).
Relation restrict_programs(const Relation& r, Subset keep);

/// Column restriction to `keep` (in the given order).
Relation restrict_inputs(const Relation& r, std::span<const std::size_t> keep);

/// Programs accepting input k.
Subset accept_set(const Relation& r, std::size_t input);

/// Per-program fraction of accepted inputs. Throws UndefinedStatisticError
/// when n = 0.
std::vector<Ratio> acceptance_rates(const Relation& r);

/// Entry [j][i] = #(j and i accept) / #(j accepts); nullopt when program j
/// accepts nothing.
std::vector<std::vector<std::optional<Ratio>>> conditional_acceptance(
    const Relation& r);

/// Names of the members of `s`, in program order.
std::vector<std::string> subset_names(const Relation& r, Subset s);

/// Parses "A,B" (or an empty string for the empty set) into a subset.
Subset parse_subset(const Relation& r, std::string_view names);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tdt
