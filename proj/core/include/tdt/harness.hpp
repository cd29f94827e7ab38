#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdt/relation.hpp"

namespace tdt {

enum class AcceptPolicy {
  stderr_empty,  // accept iff nothing was written to stderr
  exit_zero,     // accept iff the exit status is 0
  both,          // both of the above
};

AcceptPolicy parse_policy(std::string_view text);
std::string_view policy_name(AcceptPolicy p);

struct ParserSpec {
  std::string name;
  /// Command line with an {input} placeholder; {config_dir} expands to the
  /// directory holding the config file. Split into words shell-style (single
  /// and double quotes group words) and executed without a shell.
  std::string command;
  AcceptPolicy policy = AcceptPolicy::stderr_empty;
  std::vector<std::string> keywords;
};

struct RunConfig {
  std::vector<ParserSpec> parsers;
  std::filesystem::path corpus;
  std::string glob = "*";
  double timeout_secs = 30.0;
  std::size_t parallelism = 1;
  std::size_t stderr_cap_bytes = 64 * 1024;
  /// Base for relative paths and {config_dir}.
  std::filesystem::path config_dir = ".";
};

/// Parses the declarative JSON config; relative corpus paths resolve against
/// `config_dir`. Throws ConfigError on unknown keys or bad values.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& config_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Shell-style word splitting (quotes and backslash escapes, no expansion).
std::vector<std::string> split_command(std::string_view command);

/// Regular files under the corpus matching the glob (by file name), as paths
/// relative to the corpus, sorted.
std::vector<std::string> list_corpus(const RunConfig& cfg);

/// Checks the config and resolves every parser executable. Throws ConfigError.
void validate_config(const RunConfig& cfg);

struct RunRecord {
  std::size_t parser = 0;
  std::size_t input = 0;
  bool accepted = false;
  int exit_status = -1;  // -1 unless the process exited normally
  int signal = 0;        // terminating signal, 0 if none
  bool timed_out = false;
  std::string stderr_text;  // first stderr_cap_bytes bytes
  std::uint64_t stderr_bytes = 0;
  bool stderr_truncated = false;
  double wall_secs = 0.0;
  std::string diagnostic;  // set when the job could not be run
};

/// One record per (parser, input) pair; record(p, i) is the pair's entry.
struct RunStore {
  std::vector<std::string> parsers;
  std::vector<std::string> inputs;
  std::vector<RunRecord> records;  // parser-major

  const RunRecord& record(std::size_t parser, std::size_t input) const {
    return records.at(parser * inputs.size() + input);
  }
};

struct RunOutput {
  Relation relation;
  RunStore store;
  std::size_t failures = 0;  // jobs that could not be executed
};

/// Runs every parser on every corpus file. Timeouts, crashes and execution
/// failures count as rejects. Rows follow config order, columns sorted file
/// names. The relation does not depend on `parallelism`.
RunOutput run_corpus(const RunConfig& cfg);

/// Relation implied by stored results (rows in store order).
Relation relation_from_store(const RunStore& store);

std::string store_to_jsonl(const RunStore& store);
RunStore parse_store_jsonl(std::string_view text);

struct KeywordTable {
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, std::string>> columns;  // (parser, keyword)
  std::vector<std::vector<bool>> cells;                      // [input][column]
  /// Rejected (parser, input) pairs whose stderr matched no keyword of that
  /// parser; only parsers with keywords are checked.
  std::vector<std::pair<std::string, std::string>> uncovered;
};

/// Case-sensitive substring search of each keyword in that parser's stderr.
/// `keywords[p]` lists keywords for store.parsers[p]. Throws ArgumentError
/// when no parser has keywords.
KeywordTable keyword_table(const RunStore& store,
                           const std::vector<std::vector<std::string>>& keywords);

/// "input,<parser>:<keyword>,..." with 0/1 cells.
std::string keyword_table_to_csv(const KeywordTable& table);

}  // namespace tdt
