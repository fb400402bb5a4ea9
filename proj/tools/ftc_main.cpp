// Command-line driver: disorder sweeps, relaxation fits, eigenstate
// summaries, finite-size-scaling collapses, and dataset export.
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 I/O error,
// 4 missing records, 5 unidentifiable collapse.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ftc/analysis.hpp"
#include "ftc/observables.hpp"
#include "ftc/parallel.hpp"
#include "ftc/sweep.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitMissing = 4;
constexpr int kExitUnidentifiable = 5;

struct MissingRecords : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Unidentifiable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "'");
  return out;
}

ftc::Average parse_average(const std::string& name) {
  if (name == "mean") return ftc::Average::mean;
  if (name == "typical") return ftc::Average::typical;
  throw std::invalid_argument("--avg must be mean or typical");
}

ftc::ModelParams dataset_params(const std::vector<ftc::ResultRecord>& records) {
  // physics constants are global per dataset; geometry comes per record
  ftc::ModelParams params;
  if (!records.empty()) params.length = records.front().l;
  return params;
}

// ----------------------------------------------------------------- grouping

struct CellKey {
  int l;
  double g;
  bool operator<(const CellKey& other) const {
    if (l != other.l) return l < other.l;
    return g < other.g;
  }
};

using CellMap = std::map<CellKey, std::vector<const ftc::ResultRecord*>>;

CellMap group_cells(const std::vector<ftc::ResultRecord>& records,
                    const std::string& kind) {
  CellMap cells;
  for (const auto& r : records)
    if (r.kind == kind) cells[{r.l, r.g}].push_back(&r);
  return cells;
}

void require_rectangular(const CellMap& cells, const std::string& kind) {
  if (cells.empty())
    throw MissingRecords("no " + kind + " records in dataset");
  std::set<int> ls;
  std::set<double> gs;
  std::size_t count = cells.begin()->second.size();
  for (const auto& [key, recs] : cells) {
    ls.insert(key.l);
    gs.insert(key.g);
    count = std::min(count, recs.size());
  }
  std::ostringstream missing;
  bool bad = false;
  for (int l : ls)
    for (double g : gs)
      if (!cells.count({l, g})) {
        missing << " (" << l << ", " << ftc::format_double(g) << ")";
        bad = true;
      }
  if (bad)
    throw MissingRecords("missing " + kind + " cells:" + missing.str());
}

// ------------------------------------------------------------------- sweep

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& overrides, unsigned workers) {
  ftc::SweepConfig config = ftc::load_sweep_config(config_path);
  for (const auto& item : overrides) ftc::apply_override(config, item);
  if (workers) config.workers = workers;

  std::size_t last = static_cast<std::size_t>(-1);
  ftc::run_sweep(config, [&](std::size_t done, std::size_t total) {
    if (done == last) return;
    last = done;
    std::cerr << "\r" << done << "/" << total << std::flush;
  });
  std::cerr << "\n";
  return 0;
}

// ------------------------------------------------------------------ export

int cmd_export(const std::string& data_dir,
               const std::vector<std::string>& select_items,
               const std::string& format, const std::string& out_path) {
  const auto records = ftc::load_records(data_dir);
  const ftc::Selector selector = ftc::parse_selector(select_items);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file = open_output(out_path);
    out = &file;
  }
  if (format == "records") {
    ftc::export_records(records, selector, *out);
  } else if (format == "table") {
    ftc::export_table(records, selector, *out);
  } else {
    throw std::invalid_argument("--format must be records or table");
  }
  return 0;
}

// --------------------------------------------------------------- fit-relax

struct TrajectoryCell {
  int l;
  double g;
  std::vector<int> t;
  // values[realization][time index]
  std::vector<std::vector<double>> values;
};

std::vector<TrajectoryCell> trajectory_cells(
    const std::vector<ftc::ResultRecord>& records) {
  const CellMap cells = group_cells(records, "trajectory");
  require_rectangular(cells, "trajectory");
  std::vector<TrajectoryCell> out;
  for (const auto& [key, recs] : cells) {
    TrajectoryCell cell;
    cell.l = key.l;
    cell.g = key.g;
    cell.t = recs.front()->t;
    for (const auto* r : recs) {
      if (r->t != cell.t)
        throw MissingRecords("inconsistent time grids within one cell");
      cell.values.push_back(r->values);
    }
    out.push_back(std::move(cell));
  }
  return out;
}

std::vector<double> cell_average(const TrajectoryCell& cell,
                                 ftc::Average avg,
                                 const std::vector<std::size_t>* draw,
                                 int* floored) {
  std::vector<double> averaged(cell.t.size());
  std::vector<double> sample(cell.values.size());
  for (std::size_t ti = 0; ti < cell.t.size(); ++ti) {
    for (std::size_t r = 0; r < cell.values.size(); ++r)
      sample[r] = cell.values[draw ? (*draw)[r] : r][ti];
    if (avg == ftc::Average::typical) {
      const auto floored_sample = ftc::floor_positive(sample);
      if (floored) *floored += floored_sample.floored;
      averaged[ti] = ftc::ensemble_average(floored_sample.values, avg);
    } else {
      averaged[ti] = ftc::ensemble_average(sample, avg);
    }
  }
  return averaged;
}

int cmd_fit_relax(const std::string& data_dir, const std::string& avg_name,
                  int tmax, const std::string& out_path) {
  const auto records = ftc::load_records(data_dir);
  const ftc::Average avg = parse_average(avg_name);
  auto cells = trajectory_cells(records);

  struct Row {
    double g;
    int l;
    ftc::RelaxationFit fit;
  };
  std::vector<Row> rows;
  for (auto& cell : cells) {
    std::vector<double> t_kept, o_kept;
    const std::vector<double> averaged = cell_average(cell, avg, nullptr, nullptr);
    for (std::size_t ti = 0; ti < cell.t.size(); ++ti) {
      if (cell.t[ti] > tmax) continue;
      t_kept.push_back(cell.t[ti]);
      o_kept.push_back(std::clamp(averaged[ti], 0.0, 1.0));
    }
    if (t_kept.size() < 8)
      throw MissingRecords("cell has fewer than 8 time points below --tmax");
    rows.push_back({cell.g, cell.l, ftc::fit_relaxation(t_kept, o_kept)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.g != b.g) return a.g < b.g;
    return a.l < b.l;
  });

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file = open_output(out_path);
    out = &file;
  }
  *out << "#g\tl\ttau\tsse\tflag\n";
  for (const auto& row : rows) {
    const int flag = !row.fit.converged ? 2 : (row.fit.degenerate ? 1 : 0);
    *out << ftc::format_double(row.g) << "\t" << row.l << "\t"
         << ftc::format_double(row.fit.tau) << "\t"
         << ftc::format_double(row.fit.sse) << "\t" << flag << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------- eigen

struct AlphaCell {
  int l;
  double g;
  std::vector<double> alphas;  // branch-warned realizations excluded
  int excluded = 0;
};

std::vector<AlphaCell> alpha_cells(const std::vector<ftc::ResultRecord>& records) {
  const CellMap cells = group_cells(records, "eigen-alpha");
  require_rectangular(cells, "eigen-alpha");
  std::vector<AlphaCell> out;
  for (const auto& [key, recs] : cells) {
    AlphaCell cell;
    cell.l = key.l;
    cell.g = key.g;
    for (const auto* r : recs) {
      if (r->branch_warning)
        ++cell.excluded;
      else
        cell.alphas.push_back(r->alpha);
    }
    if (cell.alphas.empty())
      throw MissingRecords("every realization of a cell hit the branch cut");
    out.push_back(std::move(cell));
  }
  return out;
}

int cmd_eigen(const std::string& data_dir, const std::string& avg_name,
              const std::string& out_prefix) {
  const auto records = ftc::load_records(data_dir);
  const ftc::Average avg = parse_average(avg_name);

  auto cells = alpha_cells(records);
  {
    auto out = open_output(out_prefix + "alpha.tsv");
    out << "#l\tg\talpha\tse\tn\texcluded\n";
    for (const auto& cell : cells) {
      const double value = ftc::ensemble_average(cell.alphas, avg);
      const double n = static_cast<double>(cell.alphas.size());
      double se = 0.0;
      if (cell.alphas.size() > 1) {
        // sample error of the mean; for the typical average, the delta
        // method on the log-mean
        double m = 0.0, v = 0.0;
        std::vector<double> basis = cell.alphas;
        if (avg == ftc::Average::typical)
          for (double& x : basis) x = std::log(x);
        for (double x : basis) m += x;
        m /= n;
        for (double x : basis) v += (x - m) * (x - m);
        v /= (n - 1.0);
        se = std::sqrt(v / n);
        if (avg == ftc::Average::typical) se *= value;
      }
      out << cell.l << "\t" << ftc::format_double(cell.g) << "\t"
          << ftc::format_double(value) << "\t" << ftc::format_double(se)
          << "\t" << cell.alphas.size() << "\t" << cell.excluded << "\n";
    }
  }

  const CellMap cx = group_cells(records, "eigen-cx");
  if (!cx.empty()) {
    auto out = open_output(out_prefix + "cx.tsv");
    out << "#l\tg\tx\tcx\n";
    for (const auto& [key, recs] : cx) {
      const std::size_t profile = recs.front()->values.size();
      std::vector<double> sample;
      for (std::size_t x = 0; x < profile; ++x) {
        sample.clear();
        for (const auto* r : recs)
          if (!r->branch_warning) sample.push_back(r->values[x]);
        if (sample.empty()) continue;
        double value;
        if (avg == ftc::Average::typical) {
          value = ftc::ensemble_average(ftc::floor_positive(sample).values, avg);
        } else {
          value = ftc::ensemble_average(sample, avg);
        }
        out << key.l << "\t" << ftc::format_double(key.g) << "\t" << (x + 1)
            << "\t" << ftc::format_double(value) << "\n";
      }
    }
  }
  return 0;
}

// ---------------------------------------------------------------- collapse

std::vector<ftc::ScalingPoint> alpha_points(const std::vector<AlphaCell>& cells,
                                            ftc::Average avg) {
  std::vector<ftc::ScalingPoint> points;
  for (const auto& cell : cells)
    points.push_back({static_cast<double>(cell.l), cell.g,
                      ftc::ensemble_average(cell.alphas, avg)});
  return points;
}

int cmd_collapse(const std::string& data_dir, const std::string& mode,
                 const std::string& avg_name, double g_critical, double nu,
                 int resamples, const std::string& band,
                 const std::string& out_prefix, int tmin, int tmax,
                 unsigned workers) {
  const auto records = ftc::load_records(data_dir);
  const ftc::Average avg = parse_average(avg_name);
  ftc::ModelParams params = dataset_params(records);
  ftc::CollapseOptions options;
  options.g_critical = g_critical;

  std::ostringstream report;
  std::vector<ftc::CollapsedRow> coordinates;
  bool unidentifiable = false;

  if (mode == "1d") {
    const auto cells = alpha_cells(records);
    const auto points = alpha_points(cells, avg);
    const ftc::ScalingFit1D fit = ftc::collapse_1d(points, params, options);
    unidentifiable = fit.unidentifiable;

    std::vector<std::size_t> cell_sizes;
    for (const auto& cell : cells) cell_sizes.push_back(cell.alphas.size());
    ftc::BootstrapSpec spec;
    spec.resamples = resamples;
    spec.workers = workers;
    const Eigen::VectorXd errors = ftc::bootstrap_stddev(
        cell_sizes, spec, [&](const ftc::CellDraws& draws) {
          std::vector<ftc::ScalingPoint> resampled;
          for (std::size_t c = 0; c < cells.size(); ++c) {
            std::vector<double> sample;
            for (std::size_t k : draws[c]) sample.push_back(cells[c].alphas[k]);
            resampled.push_back({static_cast<double>(cells[c].l), cells[c].g,
                                 ftc::ensemble_average(sample, avg)});
          }
          const ftc::ScalingFit1D refit = ftc::refine_collapse_1d(
              resampled, params, options, fit.exponent_a, fit.nu);
          return Eigen::Vector2d(refit.exponent_a, refit.nu);
        });

    report << "{\"mode\":\"1d\",\"avg\":\"" << avg_name << "\",\"g_c\":"
           << ftc::format_double(g_critical)
           << ",\"a\":" << ftc::format_double(fit.exponent_a)
           << ",\"a_err\":" << ftc::format_double(errors[0])
           << ",\"nu\":" << ftc::format_double(fit.nu)
           << ",\"nu_err\":" << ftc::format_double(errors[1])
           << ",\"objective\":" << ftc::format_double(fit.objective)
           << ",\"unidentifiable\":" << (fit.unidentifiable ? "true" : "false")
           << "}";
    coordinates = ftc::collapsed_coordinates(points, params, g_critical, fit);
  } else if (mode == "2d") {
    if (nu <= 0.0)
      throw std::invalid_argument("--mode 2d needs --nu from the 1d collapse");
    auto cells = trajectory_cells(records);
    // keep the requested time window
    for (auto& cell : cells) {
      std::vector<int> t_kept;
      std::vector<std::size_t> keep;
      for (std::size_t ti = 0; ti < cell.t.size(); ++ti)
        if (cell.t[ti] >= tmin && cell.t[ti] <= tmax) {
          t_kept.push_back(cell.t[ti]);
          keep.push_back(ti);
        }
      for (auto& row : cell.values) {
        std::vector<double> kept;
        for (std::size_t ti : keep) kept.push_back(row[ti]);
        row = std::move(kept);
      }
      cell.t = t_kept;
      if (cell.t.empty())
        throw MissingRecords("no trajectory points inside [--tmin, --tmax]");
    }

    int floored = 0;
    auto cell_points = [&](const ftc::CellDraws* draws) {
      std::vector<ftc::TrajectoryPoint> points;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::vector<double> averaged = cell_average(
            cells[c], avg, draws ? &(*draws)[c] : nullptr,
            draws ? nullptr : &floored);
        for (std::size_t ti = 0; ti < cells[c].t.size(); ++ti)
          points.push_back({static_cast<double>(cells[c].l), cells[c].g,
                            static_cast<double>(cells[c].t[ti]), averaged[ti]});
      }
      return points;
    };
    const auto points = cell_points(nullptr);
    const ftc::ScalingFit2D fit = ftc::collapse_2d(points, nu, params, options);
    unidentifiable = fit.unidentifiable;

    std::vector<std::size_t> cell_sizes;
    for (const auto& cell : cells) cell_sizes.push_back(cell.values.size());
    ftc::BootstrapSpec spec;
    spec.resamples = resamples;
    spec.workers = workers;
    const Eigen::VectorXd errors = ftc::bootstrap_stddev(
        cell_sizes, spec, [&](const ftc::CellDraws& draws) {
          const auto resampled = cell_points(&draws);
          const ftc::ScalingFit2D refit = ftc::refine_collapse_2d(
              resampled, nu, params, options, fit.beta, fit.b, fit.t0);
          return Eigen::Vector3d(refit.beta, refit.b, refit.t0);
        });

    ftc::ScalingFit1D given;
    given.nu = nu;
    const ftc::CsdReport csd = ftc::csd_consistency(given, fit, errors[1]);

    report << "{\"mode\":\"2d\",\"avg\":\"" << avg_name << "\",\"g_c\":"
           << ftc::format_double(g_critical)
           << ",\"nu\":" << ftc::format_double(nu)
           << ",\"beta\":" << ftc::format_double(fit.beta)
           << ",\"beta_err\":" << ftc::format_double(errors[0])
           << ",\"b\":" << ftc::format_double(fit.b)
           << ",\"b_err\":" << ftc::format_double(errors[1])
           << ",\"t0\":" << ftc::format_double(fit.t0)
           << ",\"t0_err\":" << ftc::format_double(errors[2])
           << ",\"objective\":" << ftc::format_double(fit.objective)
           << ",\"floored\":" << floored
           << ",\"t0_at_boundary\":" << (fit.t0_at_boundary ? "true" : "false")
           << ",\"nu_b\":" << ftc::format_double(csd.nu_times_b)
           << ",\"csd_sqrt_consistent\":"
           << (csd.consistent_with_sqrt ? "true" : "false")
           << ",\"unidentifiable\":" << (fit.unidentifiable ? "true" : "false")
           << "}";
    coordinates = ftc::collapsed_coordinates(points, params, g_critical, fit);

    if (!band.empty()) {
      const auto colon = band.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("--band expects lo:hi");
      const double lo = std::stod(band.substr(0, colon));
      const double hi = std::stod(band.substr(colon + 1));
      const auto slice = ftc::band_slice(coordinates, lo, hi);
      auto out = open_output(out_prefix + "band.tsv");
      out << "#u\tz\tl\tg\tt\n";
      for (const auto& row : slice)
        out << ftc::format_double(row.u) << "\t" << ftc::format_double(row.z)
            << "\t" << row.size << "\t" << ftc::format_double(row.g) << "\t"
            << row.time << "\n";
    }
  } else {
    throw std::invalid_argument("--mode must be 1d or 2d");
  }

  {
    auto out = open_output(out_prefix + "report.json");
    out << report.str() << "\n";
  }
  {
    auto out = open_output(out_prefix + "collapsed.tsv");
    out << "#u\tw\tz\tl\tg\tt\n";
    for (const auto& row : coordinates)
      out << ftc::format_double(row.u) << "\t" << ftc::format_double(row.w)
          << "\t" << ftc::format_double(row.z) << "\t" << row.size << "\t"
          << ftc::format_double(row.g) << "\t" << row.time << "\n";
  }
  std::cout << report.str() << "\n";
  if (unidentifiable)
    throw Unidentifiable("collapse objective is flat; exponents unidentifiable");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kicked-chain time-crystal simulation and scaling analysis"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a disorder-ensemble sweep");
  std::string sweep_config;
  std::vector<std::string> sweep_sets;
  unsigned sweep_workers = 0;
  sweep->add_option("--config", sweep_config, "sweep configuration file")
      ->required();
  sweep->add_option("--set", sweep_sets, "override a config key (key=value)");
  sweep->add_option("--workers", sweep_workers, "worker thread count");

  // export
  auto* exp = app.add_subcommand("export", "emit records or flat tables");
  std::string exp_data, exp_format = "records", exp_out;
  std::vector<std::string> exp_select;
  exp->add_option("--data", exp_data, "dataset directory")->required();
  exp->add_option("--select", exp_select, "filter (kind=, l=, g=, index=)");
  exp->add_option("--format", exp_format, "records | table");
  exp->add_option("--out", exp_out, "output file (default stdout)");

  // fit-relax
  auto* fit = app.add_subcommand("fit-relax", "exponential relaxation fits");
  std::string fit_data, fit_avg = "mean", fit_out;
  int fit_tmax = 200;
  fit->add_option("--data", fit_data, "dataset directory")->required();
  fit->add_option("--avg", fit_avg, "mean | typical");
  fit->add_option("--tmax", fit_tmax, "largest offset used in the fit");
  fit->add_option("--out", fit_out, "output table (default stdout)");

  // eigen
  auto* eig = app.add_subcommand("eigen", "eigenstate order-parameter tables");
  std::string eig_data, eig_avg = "mean", eig_out = "eigen-";
  eig->add_option("--data", eig_data, "dataset directory")->required();
  eig->add_option("--avg", eig_avg, "mean | typical");
  eig->add_option("--out", eig_out, "output file prefix");

  // collapse
  auto* col = app.add_subcommand("collapse", "finite-size-scaling collapse");
  std::string col_data, col_mode, col_avg = "mean", col_band, col_out = "collapse-";
  double col_gc = 0.9, col_nu = 0.0;
  int col_boot = 500, col_tmin = 0, col_tmax = 1 << 30;
  unsigned col_workers = ftc::default_workers();
  col->add_option("--data", col_data, "dataset directory")->required();
  col->add_option("--mode", col_mode, "1d | 2d")->required();
  col->add_option("--avg", col_avg, "mean | typical");
  col->add_option("--gc", col_gc, "critical kick strength");
  col->add_option("--nu", col_nu, "correlation-length exponent (2d mode)");
  col->add_option("--bootstrap", col_boot, "bootstrap resamples");
  col->add_option("--band", col_band, "slice lo:hi of the second variable");
  col->add_option("--out", col_out, "output file prefix");
  col->add_option("--tmin", col_tmin, "smallest trajectory offset (2d)");
  col->add_option("--tmax", col_tmax, "largest trajectory offset (2d)");
  col->add_option("--workers", col_workers, "bootstrap worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sweep) return cmd_sweep(sweep_config, sweep_sets, sweep_workers);
    if (*exp) return cmd_export(exp_data, exp_select, exp_format, exp_out);
    if (*fit) return cmd_fit_relax(fit_data, fit_avg, fit_tmax, fit_out);
    if (*eig) return cmd_eigen(eig_data, eig_avg, eig_out);
    if (*col)
      return cmd_collapse(col_data, col_mode, col_avg, col_gc, col_nu,
                          col_boot, col_band, col_out, col_tmin, col_tmax,
                          col_workers);
  } catch (const Unidentifiable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnidentifiable;
  } catch (const MissingRecords& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
