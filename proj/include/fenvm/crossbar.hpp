#ifndef FENVM_CROSSBAR_HPP
#define FENVM_CROSSBAR_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fenvm/device.hpp"
#include "fenvm/stochastic.hpp"

namespace fenvm {

/// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill)
    {
    }
    double& operator()(int r, int c) { return data[index(r, c)]; }
    double operator()(int r, int c) const { return data[index(r, c)]; }

private:
    std::size_t index(int r, int c) const
    {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
               static_cast<std::size_t>(c);
    }
};

/// V/2 write biasing: selected row at +V/2, selected column at -V/2.
struct BiasScheme {
    double v_write_pot = -1.6;  // V
    double v_write_dep = 2.4;   // V
    double width = 50e-6;       // s
    double v_read = 0.2;        // V, verify read
    Scheme scheme = Scheme::AmplitudeRamp;

    PulseSpec pulse(Direction d) const
    {
        return {d == Direction::Potentiate ? v_write_pot : v_write_dep, width, scheme};
    }
    /// Half-select levels must stay below the pulse threshold.
    void validate(const DeviceParams& p) const;
};

class Crossbar {
public:
    /// Cells start at HRS with endpoints drawn by sample_population(seed).
    /// Cycle-to-cycle noise, when vp.sigma_c2c > 0, runs on its own stream
    /// derived from the same seed.
    Crossbar(int rows, int cols, const DeviceParams& params,
             const VariabilityParams& vp = VariabilityParams::none(), std::uint64_t seed = 0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const DeviceParams& params() const { return params_; }
    const VariabilityParams& variability() const { return vp_; }

    const DeviceState& cell(int r, int c) const { return cells_[index(r, c)]; }
    DeviceState& cell(int r, int c) { return cells_[index(r, c)]; }
    std::span<const DeviceState> cells() const { return cells_; }

    /// Conductance matrix g(w).
    Matrix conductances() const;

    /// Cycle-to-cycle hook for the next update (empty when noiseless).
    StepNoise step_noise();

private:
    std::size_t index(int r, int c) const;

    int rows_;
    int cols_;
    DeviceParams params_;
    VariabilityParams vp_;
    std::vector<DeviceState> cells_;
    std::optional<CycleNoise> noise_;
};

struct DisturbReport {
    bool selected_changed = false;
    std::size_t half_selected = 0;
    std::size_t disturbed = 0;  // unselected cells whose state changed
};

DisturbReport write_cell(Crossbar& xb, int r, int c, const PulseSpec& pulse);

/// Whole-array DC RESET (every cell sees v_reset_full); leaves all cells at HRS.
void erase(Crossbar& xb);

struct ProgramReport {
    std::size_t clipped = 0;   // targets outside [g_hrs, g_lrs]
    std::size_t pulses = 0;
};

/// Number of potentiation pulses from HRS whose noiseless level is nearest
/// the target, using the nominal endpoints.
int open_loop_count(double target, const DeviceParams& p, Scheme scheme);

/// Erase, then give every cell its open_loop_count() potentiation pulses
/// through write_cell().
ProgramReport program_open_loop(Crossbar& xb, const Matrix& target, const BiasScheme& bias);

struct WriteVerifyReport {
    std::size_t clipped = 0;
    std::size_t converged = 0;
    std::size_t cells = 0;
    std::size_t pulses = 0;
    int max_iterations_used = 0;
    double convergence_fraction() const
    {
        return cells ? static_cast<double>(converged) / static_cast<double>(cells) : 0.0;
    }
};

/// Closed loop from the current array state: read at bias.v_read, stop when
/// |G - G_t| / G_t <= tol, otherwise pulse toward the target. Exhausting
/// max_iters leaves the cell unconverged.
WriteVerifyReport program_write_verify(Crossbar& xb, const Matrix& target, const BiasScheme& bias,
                                       double tol, int max_iters);

/// Sets every cell to exactly the w that realizes the target (clipped to the
/// device's own range). Continuous programming for idealized comparisons.
void program_exact(Crossbar& xb, const Matrix& target);

/// Column currents for row voltages x with unselected lines grounded and
/// ideal wires: I_j = sum_i current(x_i, g_ij, t).
std::vector<double> read_vmm(const Crossbar& xb, std::span<const double> x, double t);

/// Current through three cells in series sharing voltage v.
double series_current(std::span<const double> conductances, double v, double t,
                      const ConductionParams& p);

/// Selected-cell current at v_read over the largest three-cell sneak current
/// (r,c') -> (r',c') -> (r',c) across all r' != r, c' != c. +infinity when no
/// such path exists.
double sneak_ratio(const Crossbar& xb, int r, int c, double v_read, double t);

}  // namespace fenvm

#endif  // FENVM_CROSSBAR_HPP
