#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Disorder-ensemble sweeps over an (L, g) grid with deterministic seeding
// and a stable line-record dataset on disk:
//   out_dir/config-hash       hash of the canonical configuration
//   out_dir/records-000.jsonl one record per line, sorted by key
//   out_dir/manifest          sorted record keys
//   out_dir/run-log           timings, not part of the dataset identity
// Workers append to per-worker shard files that are merged by key when the
// sweep completes, so the final bytes never depend on scheduling.

namespace ftc {

struct SweepConfig {
  std::vector<int> l_values;
  std::vector<double> g_values;
  int n_disorder = 1;
  std::uint64_t master_seed = 1;
  int l_t = 10;
  std::vector<int> t_grid;
  std::vector<std::string> kinds;  // trajectory | eigen-alpha | eigen-cx
  std::string out_dir;
  // optional keys
  double j_typical = 0.05 * 3.14159265358979323846;
  double sigma_j = 0.2 * 3.14159265358979323846;
  double t1 = 1.0;
  double t2 = 1.0;
  std::string occupation = "ground";  // ground | random
  unsigned workers = 0;               // 0 = hardware concurrency

  void validate() const;
  std::size_t record_count() const;
};

// key = value file with '#' comments; lists are comma separated, integer
// lists also accept first:last:step and t_grid accepts log:first:last:count.
SweepConfig load_sweep_config(const std::string& path);

// "key=value" override with the same parsing and checking as the file
void apply_override(SweepConfig& config, const std::string& assignment);

std::string canonical_config(const SweepConfig& config);
std::uint64_t config_hash(const SweepConfig& config);

// parses a canonical_config string back (out_dir and workers are not part
// of the canonical form)
SweepConfig parse_canonical_config(const std::string& text);

// the configuration a dataset directory was produced with
SweepConfig load_dataset_config(const std::string& dir);

struct ResultRecord {
  int schema = 1;
  std::string kind;
  int l = 0;
  double g = 0.0;
  int index = 0;
  std::uint64_t seed = 0;  // effective disorder seed of this realization
  int window = 0;                  // trajectory
  std::vector<int> t;              // trajectory
  std::vector<double> values;      // trajectory o values or cx profile
  double alpha = 0.0;              // eigen-alpha
  bool branch_warning = false;     // eigen records
};

// canonical one-line serialization (17 significant digits for doubles)
std::string record_line(const ResultRecord& record);
ResultRecord parse_record(const std::string& line);

// (kind, l, g, index) ordering used everywhere on disk
bool record_key_less(const ResultRecord& a, const ResultRecord& b);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Computes every missing record, then merges shards into the canonical
// sorted dataset. Refuses to touch a directory whose config-hash differs.
void run_sweep(const SweepConfig& config, const ProgressFn& progress = {});

// all records of a finished or interrupted sweep, sorted by key
std::vector<ResultRecord> load_records(const std::string& dir);

struct Selector {
  std::optional<std::string> kind;
  std::optional<int> l;
  std::optional<double> g;
  std::optional<int> index;

  bool matches(const ResultRecord& record) const;
};

// "key=value" items with keys kind, l, g, index
Selector parse_selector(const std::vector<std::string>& items);

void export_records(const std::vector<ResultRecord>& records,
                    const Selector& selector, std::ostream& out);

// flat tab-separated table with a '#' header; requires selector.kind
void export_table(const std::vector<ResultRecord>& records,
                  const Selector& selector, std::ostream& out);

// 17-significant-digit decimal form used across all emitted files
std::string format_double(double value);

}  // namespace ftc
