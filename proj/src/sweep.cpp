#include "ftc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ftc/eigenstates.hpp"
#include "ftc/majorana.hpp"
#include "ftc/model.hpp"
#include "ftc/observables.hpp"
#include "ftc/rng.hpp"

namespace fs = std::filesystem;

namespace ftc {

namespace {

const std::set<std::string> kKnownKinds = {"trajectory", "eigen-alpha",
                                           "eigen-cx"};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string current;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!current.empty()) items.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) items.push_back(current);
  return items;
}

long parse_long(const std::string& text) {
  std::size_t used = 0;
  long value = std::stol(text, &used);
  if (used != text.size())
    throw std::invalid_argument("config: bad integer '" + text + "'");
  return value;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double value = std::stod(text, &used);
  if (used != text.size())
    throw std::invalid_argument("config: bad number '" + text + "'");
  return value;
}

// integer list: "2,4,8", ranges "first:last:step", and for time grids
// "log:first:last:count" (log-spaced, deduplicated)
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> values;
  for (const std::string& item : split_list(text)) {
    if (item.rfind("log:", 0) == 0) {
      const auto parts = [&] {
        std::vector<std::string> p;
        std::stringstream ss(item.substr(4));
        std::string tok;
        while (std::getline(ss, tok, ':')) p.push_back(tok);
        return p;
      }();
      if (parts.size() != 3)
        throw std::invalid_argument("config: bad log range '" + item + "'");
      const double lo = parse_double(parts[0]);
      const double hi = parse_double(parts[1]);
      const long count = parse_long(parts[2]);
      if (lo <= 0 || hi <= lo || count < 2)
        throw std::invalid_argument("config: bad log range '" + item + "'");
      for (long k = 0; k < count; ++k) {
        const double x =
            lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
        values.push_back(static_cast<int>(std::lround(x)));
      }
    } else if (item.find(':') != std::string::npos) {
      std::vector<std::string> parts;
      std::stringstream ss(item);
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(tok);
      if (parts.size() != 3)
        throw std::invalid_argument("config: bad range '" + item + "'");
      const long first = parse_long(parts[0]);
      const long last = parse_long(parts[1]);
      const long step = parse_long(parts[2]);
      if (step <= 0 || last < first)
        throw std::invalid_argument("config: bad range '" + item + "'");
      for (long v = first; v <= last; v += step)
        values.push_back(static_cast<int>(v));
    } else {
      values.push_back(static_cast<int>(parse_long(item)));
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) {
    if (item.rfind("lin:", 0) == 0) {
      std::vector<std::string> parts;
      std::stringstream ss(item.substr(4));
      std::string tok;
      while (std::getline(ss, tok, ':')) parts.push_back(tok);
      if (parts.size() != 3)
        throw std::invalid_argument("config: bad lin range '" + item + "'");
      const double lo = parse_double(parts[0]);
      const double hi = parse_double(parts[1]);
      const long count = parse_long(parts[2]);
      if (count < 2 || hi <= lo)
        throw std::invalid_argument("config: bad lin range '" + item + "'");
      for (long k = 0; k < count; ++k)
        values.push_back(lo + (hi - lo) * static_cast<double>(k) / (count - 1));
    } else {
      values.push_back(parse_double(item));
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

void assign_key(SweepConfig& config, const std::string& key,
                const std::string& value) {
  if (key == "l_values") {
    config.l_values = parse_int_list(value);
  } else if (key == "g_values") {
    config.g_values = parse_double_list(value);
  } else if (key == "n_disorder") {
    config.n_disorder = static_cast<int>(parse_long(value));
  } else if (key == "master_seed") {
    config.master_seed = static_cast<std::uint64_t>(parse_long(value));
  } else if (key == "l_t") {
    config.l_t = static_cast<int>(parse_long(value));
  } else if (key == "t_grid") {
    config.t_grid = parse_int_list(value);
  } else if (key == "kinds") {
    config.kinds = split_list(value);
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "j_typical") {
    config.j_typical = parse_double(value);
  } else if (key == "sigma_j") {
    config.sigma_j = parse_double(value);
  } else if (key == "t1") {
    config.t1 = parse_double(value);
  } else if (key == "t2") {
    config.t2 = parse_double(value);
  } else if (key == "occupation") {
    config.occupation = value;
  } else if (key == "workers") {
    config.workers = static_cast<unsigned>(parse_long(value));
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  const auto end = s.find_last_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  return s.substr(begin, end - begin + 1);
}

ModelParams cell_params(const SweepConfig& config, int l, double g) {
  ModelParams params;
  params.length = l;
  params.kick = g;
  params.t1 = config.t1;
  params.t2 = config.t2;
  params.j_typical = config.j_typical;
  params.sigma_j = config.sigma_j;
  params.window = config.l_t;
  return params;
}

std::uint64_t cell_seed(const SweepConfig& config, int l, double g) {
  std::uint64_t g_bits;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&g_bits, &g, sizeof(g_bits));
  return counter_hash(config.master_seed, static_cast<std::uint64_t>(l),
                      g_bits, 0);
}

std::string record_key(const ResultRecord& r) {
  return r.kind + "\t" + std::to_string(r.l) + "\t" + format_double(r.g) +
         "\t" + std::to_string(r.index);
}

struct Task {
  int l;
  double g;
  int index;
};

std::vector<ResultRecord> compute_records(const SweepConfig& config,
                                          const Task& task) {
  const ModelParams params = cell_params(config, task.l, task.g);
  const std::uint64_t seed = cell_seed(config, task.l, task.g);
  const DisorderConfig disorder = sample_disorder(params, seed, task.index);

  std::vector<ResultRecord> records;
  const bool want_alpha =
      std::count(config.kinds.begin(), config.kinds.end(), "eigen-alpha") > 0;
  const bool want_cx =
      std::count(config.kinds.begin(), config.kinds.end(), "eigen-cx") > 0;

  ResultRecord base;
  base.l = task.l;
  base.g = task.g;
  base.index = task.index;
  base.seed = seed;

  if (std::count(config.kinds.begin(), config.kinds.end(), "trajectory") > 0) {
    ResultRecord rec = base;
    rec.kind = "trajectory";
    rec.window = config.l_t;
    rec.t = config.t_grid;
    const GaussianState state = initial_state(disorder, params);
    const Eigen::MatrixXd v = floquet_matrix(disorder, params);
    rec.values = trajectory(state, v, config.t_grid, config.l_t);
    records.push_back(std::move(rec));
  }

  if (want_alpha || want_cx) {
    const EffectiveHamiltonian h = effective_hamiltonian(disorder, params);
    std::vector<bool> occupied(h.modes.angles.size(), false);
    if (config.occupation == "random") {
      for (std::size_t k = 0; k < occupied.size(); ++k)
        occupied[k] = counter_hash(seed, task.index, k, 0x0cc) & 1u;
    }
    const EigenstateCovariance cov = eigenstate_covariance(h, occupied);
    const bool warn = h.near_branch_cut || cov.ambiguous_occupation;
    if (want_alpha) {
      ResultRecord rec = base;
      rec.kind = "eigen-alpha";
      rec.alpha = order_parameter_alpha(cov.majorana);
      rec.branch_warning = warn;
      records.push_back(std::move(rec));
    }
    if (want_cx) {
      ResultRecord rec = base;
      rec.kind = "eigen-cx";
      rec.branch_warning = warn;
      rec.values.reserve(task.l - 1);
      for (int x = 1; x < task.l; ++x)
        rec.values.push_back(zz_correlator(cov.majorana, x));
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::vector<ResultRecord> scan_shards(const std::string& dir) {
  std::vector<ResultRecord> records;
  if (!fs::exists(dir)) return records;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const bool canonical =
        name.rfind("records-", 0) == 0 && name.ends_with(".jsonl");
    const bool partial = name.rfind("records-w", 0) == 0 && name.ends_with(".part");
    if (!canonical && !partial) continue;
    std::ifstream in(entry.path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        records.push_back(parse_record(line));
      } catch (const std::exception&) {
        // a torn trailing line from an interrupted writer is recomputed
      }
    }
  }
  std::sort(records.begin(), records.end(), record_key_less);
  records.erase(std::unique(records.begin(), records.end(),
                            [](const ResultRecord& a, const ResultRecord& b) {
                              return record_key(a) == record_key(b);
                            }),
                records.end());
  return records;
}

void finalize_dataset(const std::string& dir,
                      std::vector<ResultRecord> records) {
  std::sort(records.begin(), records.end(), record_key_less);
  {
    std::ofstream out(fs::path(dir) / "records-000.jsonl.tmp",
                      std::ios::trunc);
    for (const auto& r : records) out << record_line(r) << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "manifest.tmp", std::ios::trunc);
    for (const auto& r : records) out << record_key(r) << "\n";
  }
  fs::rename(fs::path(dir) / "records-000.jsonl.tmp",
             fs::path(dir) / "records-000.jsonl");
  fs::rename(fs::path(dir) / "manifest.tmp", fs::path(dir) / "manifest");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("records-w", 0) == 0 && name.ends_with(".part"))
      fs::remove(entry.path());
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void SweepConfig::validate() const {
  if (l_values.empty() || g_values.empty() || kinds.empty())
    throw std::invalid_argument("config: l_values, g_values and kinds must be non-empty");
  if (n_disorder < 1)
    throw std::invalid_argument("config: n_disorder must be >= 1");
  if (l_t < 1) throw std::invalid_argument("config: l_t must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir is required");
  for (int l : l_values)
    if (l < 2) throw std::invalid_argument("config: l_values must be >= 2");
  for (double g : g_values)
    if (g < 0.0 || g > 1.0)
      throw std::invalid_argument("config: g_values must lie in [0, 1]");
  for (const auto& kind : kinds)
    if (!kKnownKinds.count(kind))
      throw std::invalid_argument("config: unknown kind '" + kind + "'");
  if (std::count(kinds.begin(), kinds.end(), "trajectory") > 0 &&
      t_grid.empty())
    throw std::invalid_argument("config: trajectory records need a t_grid");
  if (occupation != "ground" && occupation != "random")
    throw std::invalid_argument("config: occupation must be ground or random");
  if (j_typical <= 0.0 || sigma_j < 0.0)
    throw std::invalid_argument("config: bad disorder law parameters");
}

std::size_t SweepConfig::record_count() const {
  return l_values.size() * g_values.size() *
         static_cast<std::size_t>(n_disorder) * kinds.size();
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  SweepConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key = value");
    assign_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

void apply_override(SweepConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override: expected key=value, got '" +
                                assignment + "'");
  assign_key(config, trim(assignment.substr(0, eq)),
             trim(assignment.substr(eq + 1)));
}

std::string canonical_config(const SweepConfig& config) {
  std::ostringstream out;
  out << "schema=1";
  out << ";l_values=";
  for (int l : config.l_values) out << l << ",";
  out << ";g_values=";
  for (double g : config.g_values) out << format_double(g) << ",";
  out << ";n_disorder=" << config.n_disorder;
  out << ";master_seed=" << config.master_seed;
  out << ";l_t=" << config.l_t;
  out << ";t_grid=";
  for (int t : config.t_grid) out << t << ",";
  out << ";kinds=";
  std::vector<std::string> kinds = config.kinds;
  std::sort(kinds.begin(), kinds.end());
  for (const auto& k : kinds) out << k << ",";
  out << ";j_typical=" << format_double(config.j_typical);
  out << ";sigma_j=" << format_double(config.sigma_j);
  out << ";t1=" << format_double(config.t1);
  out << ";t2=" << format_double(config.t2);
  out << ";occupation=" << config.occupation;
  return out.str();
}

std::uint64_t config_hash(const SweepConfig& config) {
  const std::string text = canonical_config(config);
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

SweepConfig parse_canonical_config(const std::string& text) {
  SweepConfig config;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: bad canonical entry '" + item + "'");
    const std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (key == "schema") continue;
    while (!value.empty() && value.back() == ',') value.pop_back();
    if (value.empty() && (key == "t_grid")) continue;
    assign_key(config, key, value);
  }
  return config;
}

SweepConfig load_dataset_config(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "config");
  if (!in)
    throw std::invalid_argument("dataset: missing config file in '" + dir + "'");
  std::string text;
  std::getline(in, text);
  SweepConfig config = parse_canonical_config(text);
  config.out_dir = dir;
  return config;
}

std::string record_line(const ResultRecord& r) {
  std::ostringstream out;
  out << "{\"schema\":" << r.schema << ",\"kind\":\"" << r.kind
      << "\",\"l\":" << r.l << ",\"g\":" << format_double(r.g)
      << ",\"index\":" << r.index << ",\"seed\":" << r.seed;
  if (r.kind == "trajectory") {
    out << ",\"window\":" << r.window << ",\"t\":[";
    for (std::size_t i = 0; i < r.t.size(); ++i)
      out << (i ? "," : "") << r.t[i];
    out << "],\"o\":[";
    for (std::size_t i = 0; i < r.values.size(); ++i)
      out << (i ? "," : "") << format_double(r.values[i]);
    out << "]";
  } else if (r.kind == "eigen-alpha") {
    out << ",\"branch\":" << (r.branch_warning ? "true" : "false")
        << ",\"alpha\":" << format_double(r.alpha);
  } else if (r.kind == "eigen-cx") {
    out << ",\"branch\":" << (r.branch_warning ? "true" : "false")
        << ",\"cx\":[";
    for (std::size_t i = 0; i < r.values.size(); ++i)
      out << (i ? "," : "") << format_double(r.values[i]);
    out << "]";
  }
  out << "}";
  return out.str();
}

ResultRecord parse_record(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  ResultRecord r;
  r.schema = j.at("schema").get<int>();
  r.kind = j.at("kind").get<std::string>();
  r.l = j.at("l").get<int>();
  r.g = j.at("g").get<double>();
  r.index = j.at("index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (r.kind == "trajectory") {
    r.window = j.at("window").get<int>();
    r.t = j.at("t").get<std::vector<int>>();
    r.values = j.at("o").get<std::vector<double>>();
  } else if (r.kind == "eigen-alpha") {
    r.branch_warning = j.at("branch").get<bool>();
    r.alpha = j.at("alpha").get<double>();
  } else if (r.kind == "eigen-cx") {
    r.branch_warning = j.at("branch").get<bool>();
    r.values = j.at("cx").get<std::vector<double>>();
  } else {
    throw std::invalid_argument("record: unknown kind '" + r.kind + "'");
  }
  return r;
}

bool record_key_less(const ResultRecord& a, const ResultRecord& b) {
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.l != b.l) return a.l < b.l;
  if (a.g != b.g) return a.g < b.g;
  return a.index < b.index;
}

void run_sweep(const SweepConfig& config, const ProgressFn& progress) {
  config.validate();
  fs::create_directories(config.out_dir);

  const std::string hash_text = [&] {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    return std::string(buffer);
  }();
  const fs::path hash_path = fs::path(config.out_dir) / "config-hash";
  if (fs::exists(hash_path)) {
    std::ifstream in(hash_path);
    std::string existing;
    in >> existing;
    if (existing != hash_text)
      throw std::invalid_argument(
          "sweep: output directory holds a dataset with a different config");
  } else {
    std::ofstream out(hash_path);
    out << hash_text << "\n";
  }

  std::vector<ResultRecord> done = scan_shards(config.out_dir);
  std::set<std::string> done_keys;
  for (const auto& r : done) done_keys.insert(record_key(r));

  std::vector<Task> tasks;
  for (int l : config.l_values)
    for (double g : config.g_values)
      for (int index = 0; index < config.n_disorder; ++index) {
        bool missing = false;
        for (const auto& kind : config.kinds) {
          ResultRecord probe;
          probe.kind = kind;
          probe.l = l;
          probe.g = g;
          probe.index = index;
          if (!done_keys.count(record_key(probe))) missing = true;
        }
        if (missing) tasks.push_back({l, g, index});
      }

  const std::size_t total = config.record_count();
  std::atomic<std::size_t> completed{total - tasks.size() * config.kinds.size()};
  if (progress) progress(completed.load(), total);

  const unsigned workers = config.workers
                               ? config.workers
                               : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::ofstream run_log(fs::path(config.out_dir) / "run-log", std::ios::app);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker_loop = [&](unsigned worker_id) {
    std::ofstream shard(fs::path(config.out_dir) /
                            ("records-w" + std::to_string(worker_id) + ".part"),
                        std::ios::app);
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const auto start = std::chrono::steady_clock::now();
      std::vector<ResultRecord> records;
      try {
        records = compute_records(config, tasks[i]);
      } catch (...) {
        std::scoped_lock lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        start)
              .count();
      for (const auto& r : records) shard << record_line(r) << "\n";
      shard.flush();
      const std::size_t done_now = completed.fetch_add(records.size()) +
                                   records.size();
      {
        std::scoped_lock lock(log_mutex);
        run_log << "l=" << tasks[i].l << " g=" << format_double(tasks[i].g)
                << " index=" << tasks[i].index << " seconds=" << seconds
                << "\n";
        if (progress) progress(done_now, total);
      }
    }
  };

  if (workers <= 1 || tasks.size() <= 1) {
    worker_loop(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(worker_loop, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  finalize_dataset(config.out_dir, scan_shards(config.out_dir));
}

std::vector<ResultRecord> load_records(const std::string& dir) {
  if (!fs::exists(dir))
    throw std::invalid_argument("dataset: directory '" + dir + "' not found");
  return scan_shards(dir);
}

bool Selector::matches(const ResultRecord& record) const {
  if (kind && *kind != record.kind) return false;
  if (l && *l != record.l) return false;
  if (g && *g != record.g) return false;
  if (index && *index != record.index) return false;
  return true;
}

Selector parse_selector(const std::vector<std::string>& items) {
  Selector selector;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("selector: expected key=value, got '" +
                                  item + "'");
    const std::string key = trim(item.substr(0, eq));
    const std::string value = trim(item.substr(eq + 1));
    if (key == "kind") {
      if (!kKnownKinds.count(value))
        throw std::invalid_argument("selector: unknown kind '" + value + "'");
      selector.kind = value;
    } else if (key == "l") {
      selector.l = static_cast<int>(parse_long(value));
    } else if (key == "g") {
      selector.g = parse_double(value);
    } else if (key == "index") {
      selector.index = static_cast<int>(parse_long(value));
    } else {
      throw std::invalid_argument("selector: unknown key '" + key + "'");
    }
  }
  return selector;
}

void export_records(const std::vector<ResultRecord>& records,
                    const Selector& selector, std::ostream& out) {
  for (const auto& r : records)
    if (selector.matches(r)) out << record_line(r) << "\n";
}

void export_table(const std::vector<ResultRecord>& records,
                  const Selector& selector, std::ostream& out) {
  if (!selector.kind)
    throw std::invalid_argument("export: table format needs kind=...");
  const std::string& kind = *selector.kind;
  if (kind == "trajectory") {
    out << "#l\tg\tindex\tt\to\n";
    for (const auto& r : records) {
      if (!selector.matches(r)) continue;
      for (std::size_t i = 0; i < r.t.size(); ++i)
        out << r.l << "\t" << format_double(r.g) << "\t" << r.index << "\t"
            << r.t[i] << "\t" << format_double(r.values[i]) << "\n";
    }
  } else if (kind == "eigen-alpha") {
    out << "#l\tg\tindex\talpha\tbranch\n";
    for (const auto& r : records) {
      if (!selector.matches(r)) continue;
      out << r.l << "\t" << format_double(r.g) << "\t" << r.index << "\t"
          << format_double(r.alpha) << "\t" << (r.branch_warning ? 1 : 0)
          << "\n";
    }
  } else {
    out << "#l\tg\tindex\tx\tcx\n";
    for (const auto& r : records) {
      if (!selector.matches(r)) continue;
      for (std::size_t i = 0; i < r.values.size(); ++i)
        out << r.l << "\t" << format_double(r.g) << "\t" << r.index << "\t"
            << (i + 1) << "\t" << format_double(r.values[i]) << "\n";
    }
  }
}

}  // namespace ftc
