#pragma once

// Parameter sweeps over generated (or one loaded) instance, with per-cell
// aggregation.
//
// Grid files are key=value lines; list-valued keys take comma-separated
// values and span the cartesian product of cells, enumerated with alpha
// outermost and omega innermost:
//
//   alpha=0.4,0.8,1.2      beta=0.05     delta=0.5     gamma=100
//   epsilon=0.01           omega=0.01
//   users=200  boards=30  tags=50  slots_per_board=48  slot_duration=1800
//   rls_iters=20  master_seed=1  allow_out_of_range=false  instance=DIR
//   score_context=tag|full  score_denominator=cost|influence  early_stop=false
//
// Repetition r of every cell generates its world from derive_seed(master, {r})
// and solves with derive_seed(master, {cell, r}), so rows do not depend on the
// worker count.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trmoa/allocators.hpp"
#include "trmoa/instance_io.hpp"

namespace trmoa {

struct SweepCell {
  double alpha = 1.0;
  double beta = 0.05;
  double delta = 0.5;
  double gamma = 100.0;
  double epsilon = 0.01;
  double omega = 0.01;
};

struct SweepSpec {
  std::vector<double> alpha{1.0};
  std::vector<double> beta{0.05};
  std::vector<double> delta{0.5};
  std::vector<double> gamma{100.0};
  std::vector<double> epsilon{0.01};
  std::vector<double> omega{0.01};
  std::vector<Algorithm> algorithms{Algorithm::bg, Algorithm::rg, Algorithm::rls,
                                    Algorithm::random};
  std::size_t seeds = 10;
  std::uint64_t master_seed = 1;
  std::uint32_t rls_iters = 20;
  ScoreContext score_context = ScoreContext::tag;
  ScoreDenominator score_denominator = ScoreDenominator::cost;
  bool early_stop = false;
  // World shape for generated instances; alpha, beta, gamma and seed are
  // overwritten per cell.
  GeneratorParams world;
  // When set, every cell solves this instance and alpha/beta must be single-valued.
  std::optional<std::filesystem::path> instance_dir;
  bool allow_out_of_range = false;
  // Worker threads over (cell, repetition) tasks.
  std::size_t jobs = 1;
  // Writes trace/cell<c>_rep<r>_<algo>.csv when an output directory is given.
  bool write_traces = true;
};

// Throws InvalidInput for empty lists, zero seeds or values outside the
// documented ranges (unless allow_out_of_range).
void check_spec(const SweepSpec& spec);
std::vector<SweepCell> expand_cells(const SweepSpec& spec);

// Applies grid-file keys on top of `base`; throws ParseError with line numbers.
SweepSpec parse_grid(std::istream& in, const std::string& name, SweepSpec base = {});
SweepSpec load_grid(const std::filesystem::path& path, SweepSpec base = {});

struct SweepResultRow {
  std::size_t cell = 0;
  SweepCell params;
  Algorithm algorithm = Algorithm::bg;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::size_t advertisers = 0;
  std::size_t slots = 0;
  std::size_t allocated = 0;
  double excessive = 0.0;
  double unsatisfied = 0.0;
  double total = 0.0;
  std::size_t satisfied = 0;
  double wall_ms = 0.0;
  // Empty on success; otherwise the failure message and the regret fields are zero.
  std::string error;

  bool flagged() const noexcept { return !error.empty(); }
};

struct SweepOutput {
  std::vector<SweepResultRow> rows;
  std::size_t flagged = 0;
};

// Rows are ordered by (cell, repetition, algorithm as listed). When `out_dir`
// is given, writes results.csv, timings.csv, summary.csv and trace/ there.
SweepOutput run_sweep(const SweepSpec& spec,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct Stats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

// Sample statistics; stddev uses n - 1 and is zero for a single value.
Stats describe(std::vector<double> values);

struct SummaryRow {
  std::size_t cell = 0;
  SweepCell params;
  Algorithm algorithm = Algorithm::bg;
  std::size_t runs = 0;
  Stats total;
  Stats excessive;
  Stats unsatisfied;
  Stats wall_ms;
  // Mean excessive regret over mean total; zero when the total is zero.
  double excessive_share = 0.0;
  double satisfied_mean = 0.0;
};

struct CellFlags {
  std::size_t cell = 0;
  // Unset when the cell lacks one of the algorithms involved.
  std::optional<bool> bg_le_random;
  std::optional<bool> random_highest;
  // Random < RG <= RLS < BG on mean wall time.
  std::optional<bool> runtime_order;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::vector<CellFlags> cells;
};

// Flagged rows are excluded from the statistics.
Summary summarize(const std::vector<SweepResultRow>& rows);

// Column layouts are fixed; see the README for field meanings.
void write_results_csv(std::ostream& out, const std::vector<SweepResultRow>& rows);
void write_timings_csv(std::ostream& out, const std::vector<SweepResultRow>& rows);
void write_summary_csv(std::ostream& out, const Summary& summary);

}  // namespace trmoa
