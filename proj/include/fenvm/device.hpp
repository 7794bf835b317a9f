#ifndef FENVM_DEVICE_HPP
#define FENVM_DEVICE_HPP

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fenvm/conduction.hpp"

namespace fenvm {

enum class Direction { Potentiate, Depress };

/// Programming scheme a pulse belongs to. AmplitudeRamp keeps the width and
/// raises the amplitude; WidthRamp keeps the amplitude and stretches the
/// width. Single pulses use the AmplitudeRamp update shape.
enum class Scheme { AmplitudeRamp, WidthRamp, Single };

std::string_view to_string(Scheme s);
std::string_view to_string(Direction d);
/// Throws std::invalid_argument for unknown names.
Scheme parse_scheme(std::string_view name);

/// Update-curve sharpness per direction, nu = N_max / A.
struct UpdateShape {
    double nu_p;
    double nu_d;
};

struct DeviceParams {
    ConductionParams conduction;
    double area = 14400.0;          // um^2
    int n_levels = 50;              // pulses from one endpoint to the other
    UpdateShape amplitude_ramp{1.9, 4.3};
    UpdateShape width_ramp{4.3, 1.9};
    double v_set_full = -1.6;       // V, DC write reaching full LRS
    double v_reset_full = 2.4;      // V, DC write reaching full HRS
    double v_c_set = -0.6;          // V
    double v_c_reset = -0.6 + 1.4;  // V, v_c_set + memory window
    double v_pulse_threshold = 1.3; // V, smallest |amplitude| that switches
    double t_width_ref = 50e-6;     // s
    double hzo_thickness_nm = 10.0; // reporting only

    /// Endpoint conductances at this device's area.
    double g_lrs() const { return conduction.g_lrs_ref * area / conduction.area_ref; }
    double g_hrs() const { return g_lrs() / conduction.on_off; }
    double memory_window() const { return v_c_reset - v_c_set; }
    const UpdateShape& shape(Scheme s) const
    {
        return s == Scheme::WidthRamp ? width_ramp : amplitude_ramp;
    }
    double nu(Scheme s, Direction d) const
    {
        return d == Direction::Potentiate ? shape(s).nu_p : shape(s).nu_d;
    }
    /// |V| / thickness in MV/cm.
    double field_mv_per_cm(double v) const;

    void validate() const;
};

/// Analog state of one junction. w = 0 is HRS, w = 1 is LRS; the endpoint
/// conductances carry the device-to-device spread.
struct DeviceState {
    double w = 0.0;
    double g_hrs_dev = 0.0;
    double g_lrs_dev = 0.0;

    double conductance() const { return g_hrs_dev + w * (g_lrs_dev - g_hrs_dev); }
    bool operator==(const DeviceState&) const = default;
};

DeviceState nominal_state(const DeviceParams& p, double w);
inline DeviceState hrs_state(const DeviceParams& p) { return nominal_state(p, 0.0); }
inline DeviceState lrs_state(const DeviceParams& p) { return nominal_state(p, 1.0); }

struct PulseSpec {
    double amplitude;  // V, negative potentiates
    double width;      // s
    Scheme scheme = Scheme::AmplitudeRamp;
};

/// Perturbs a noiseless state increment; empty means noiseless.
using StepNoise = std::function<double(double)>;

/// Normalized conductance after a normalized pulse count x in [0, 1]:
/// potentiation (1 - e^{-nu x}) / (1 - e^{-nu}), depression one minus that.
double update_curve(double x, double nu, Direction d);

/// Position x on the curve that yields normalized conductance g.
double update_curve_inverse(double g, double nu, Direction d);

/// One pulse. Sub-threshold pulses return the input unchanged; otherwise the
/// state moves one level along the scheme's update curve, starting from the
/// curve position equivalent to the current w.
DeviceState apply_pulse(const DeviceState& s, const PulseSpec& pulse, const DeviceParams& p,
                        const StepNoise& noise = {});

/// Quasi-static write: saturating one-sided update outside the coercive
/// window, no change inside it.
DeviceState dc_write(const DeviceState& s, double v_write, const DeviceParams& p);

double read_resistance(const DeviceState& s, double v_read, double t, const DeviceParams& p);

/// Small-signal pulse energy g(w) V^2 t.
double write_energy(const DeviceState& s, const PulseSpec& pulse);

DeviceParams scale_area(const DeviceParams& p, double new_area);

struct TracePoint {
    int count;
    Direction direction;
    double conductance;  // S, 1/R at the read voltage
    double resistance;   // Ohm
};

struct Trace {
    std::vector<TracePoint> points;
    DeviceState final_state;
};

inline constexpr double kTraceReadVoltage = 0.2;

/// Potentiation staircase followed by a depression staircase. The first
/// point (count 0) is the initial read. Pulses use the full write
/// amplitudes (v_set_full / v_reset_full) at t_width_ref.
Trace run_sequence(const DeviceState& s, Scheme scheme, int n_pot, int n_dep,
                   const DeviceParams& p, const StepNoise& noise = {});

struct TraceSegments {
    std::vector<double> potentiation;  // includes the starting read
    std::vector<double> depression;    // includes the last potentiation read
};
TraceSegments split_trace(std::span<const TracePoint> trace);

struct UpdateFit {
    double sigma0;
    double nu;
    double rms;
    bool monotone;
    bool at_bound;
};

/// Fits one monotone staircase (conductances at equally spaced counts) to
/// sigma0 * P_nu(x), where the progress (G - G_0)/(G_end - G_0) is used so
/// both directions share one family. Needs >= 5 points.
UpdateFit fit_update_curve(std::span<const double> conductances);

enum class Branch { Up, Down };

struct LoopPoint {
    double v_write;
    double resistance;
    double w;
    Branch branch;
};

inline constexpr double kLoopReadVoltage = 0.3;

/// R(V_write) loop: v_min -> v_max -> v_min, n_steps points per branch,
/// reading at +0.3 V after every write. Starts from the state the first
/// v_min write leaves.
std::vector<LoopPoint> hysteresis_loop(const DeviceParams& p, double v_min, double v_max,
                                       int n_steps, const DeviceState* initial = nullptr);

struct LoopWindow {
    double v_reset;  // onset on the up branch
    double v_set;    // onset on the down branch
    double window;
};

/// Switching onsets as midpoints between the last unchanged and the first
/// changed grid point on each branch. Throws if a branch never switches.
LoopWindow extract_window(std::span<const LoopPoint> loop);

}  // namespace fenvm

#endif  // FENVM_DEVICE_HPP
