#ifndef FENVM_COMMANDS_HPP
#define FENVM_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fenvm/config.hpp"

namespace fenvm {

namespace fs = std::filesystem;

// Each command writes CSV files into out_dir and returns what it wrote so
// callers (CLI, tests) can inspect the numbers directly.

struct IvOptions {
    // Integer millivolt grid keeps grid points such as 0.1 V exact.
    int v_min_mv = -300;
    int v_max_mv = 300;
    int step_mv = 10;
    std::vector<double> temperatures{300.0, 320.0, 340.0, 360.0};
};

struct IvRow {
    std::string state;  // "lrs" or "hrs"
    double temperature;
    double voltage;
    double current;
    double current_density;
    double resistance;
};

/// Writes iv.csv plus sweep_lrs.csv / sweep_hrs.csv in the sweep format.
std::vector<IvRow> cmd_iv(const SimConfig& cfg, const IvOptions& opt, const fs::path& out_dir);

struct PulseOptions {
    Scheme scheme = Scheme::AmplitudeRamp;
    int n_pot = -1;  // -1 means n_levels
    int n_dep = -1;
    bool noise = false;
};

/// Writes trace.csv. Starts from the nominal HRS state.
Trace cmd_pulse(const SimConfig& cfg, const PulseOptions& opt, const fs::path& out_dir);

struct FitInputs {
    std::vector<fs::path> sweeps;
    std::optional<fs::path> trace;
};

struct FitReportRow {
    std::string quantity;
    double value;
    std::string unit;
};

/// Fits every sweep file (Ohmic and PF windows from the config) and the
/// trace segments; writes fit_report.csv. Throws FitError when nothing can
/// be fitted or a fit is impossible.
std::vector<FitReportRow> cmd_fit(const SimConfig& cfg, const FitInputs& in, const fs::path& out_dir);

struct XbarReport {
    std::size_t random_writes = 0;
    std::size_t disturbed_cells = 0;
    double open_loop_mean_abs_error = 0.0;  // fraction of the conductance span
    double write_verify_convergence = 0.0;
    int write_verify_max_iterations = 0;
    std::size_t write_verify_pulses = 0;
    double sneak_ratio_programmed = 0.0;
    double sneak_ratio_all_lrs = 0.0;
    std::vector<double> column_currents;
};

/// Random half-select workload, open-loop and write-verify programming of
/// random targets, one VMM read and the sneak metric. Writes
/// xbar_report.csv, xbar_read.csv and xbar_state.csv.
XbarReport cmd_xbar(const SimConfig& cfg, const fs::path& out_dir);

struct InferResult {
    std::vector<AccuracyReport> per_seed;
    double mean_degradation = 0.0;
};

/// Trains the float baseline, then programs one analog replica per seed.
/// Writes infer_report.csv and infer_per_class.csv.
InferResult cmd_infer(const SimConfig& cfg, const std::optional<fs::path>& dataset,
                      const fs::path& out_dir);

struct BenchRow {
    std::string metric;
    std::string value;
    std::string unit;
};

/// Benchmark summary measured from simulation. Writes bench.csv.
std::vector<BenchRow> cmd_bench(const SimConfig& cfg, const fs::path& out_dir);

}  // namespace fenvm

#endif  // FENVM_COMMANDS_HPP
