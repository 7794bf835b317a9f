#ifndef FENVM_CONDUCTION_HPP
#define FENVM_CONDUCTION_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fenvm {

/// Boltzmann constant in eV/K.
inline constexpr double kBoltzmannEv = 8.617333262e-5;

/// kT in eV.
double thermal_energy(double temperature_k);

/// Raised by the regression-based fitters when the data cannot support the
/// requested fit (too few temperatures, degenerate voltage grid, ...).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Small-signal conduction of one junction. Conductances are given at the
/// reference area and reference temperature; the LRS value is the anchor and
/// the HRS value follows from the ON/OFF ratio.
struct ConductionParams {
    double g_lrs_ref = 1.0e-8;   // S (RON = 100 MOhm)
    double on_off = 7.0;
    double area_ref = 14400.0;   // um^2
    double e_a = 0.15;           // eV, Ohmic activation energy
    double beta = 0.4;           // eV V^-1/2, Poole-Frenkel field lowering
    double v_ohmic_max = 0.1;    // V
    double v_pf_min = 0.2;       // V
    double v_clamp = 1.0;        // V, PF exponent frozen above this
    double t_ref = 300.0;        // K

    double g_hrs_ref() const { return g_lrs_ref / on_off; }

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Poole-Frenkel enhancement over the Ohmic line. Equal to 1 up to v_pf_min,
/// then exp(beta (sqrt(v) - sqrt(v_pf_min)) / kT), frozen beyond v_clamp.
double shape_factor(double v, double t, const ConductionParams& p);

/// Arrhenius factor exp(-e_a (1/kT - 1/kT_ref)); exactly 1 at t_ref.
double activation_factor(double t, const ConductionParams& p);

/// Junction current (A) for a small-signal state conductance g_state (S).
/// Odd in v.
double current(double v, double g_state, double t, const ConductionParams& p);

/// Inverse of current() in v for a given current magnitude; used for series
/// path solves. Returns a voltage with the sign of i.
double voltage_for_current(double i, double g_state, double t, const ConductionParams& p);

/// current(v) / current(v/2) at a fixed state.
double nonlinearity_ratio(double v, double t, const ConductionParams& p);

struct SweepSample {
    double voltage;          // V
    double current_density;  // A/um^2
    double temperature;      // K
};

struct SweepRecord {
    std::vector<SweepSample> samples;
};

/// Generates a sweep with the forward model at a fixed state.
SweepRecord simulate_sweep(const std::vector<double>& voltages,
                           const std::vector<double>& temperatures,
                           double g_state, double area, const ConductionParams& p);

struct OhmicFitOptions {
    double v_max = 0.1;              // samples with |V| above this are ignored
    double residual_threshold = 0.05;  // max |ln(J/V) - mean| before flagging
};

struct OhmicTemperatureDiag {
    double temperature;
    double mean_log_jv;
    double max_residual;
    std::size_t n;
};

struct OhmicFit {
    double e_a;           // eV
    double ln_prefactor;  // ln(J/V) extrapolated to 1/kT = 0
    double arrhenius_r2;
    double max_residual;
    bool regime_violation;
    std::vector<OhmicTemperatureDiag> per_temperature;
};

OhmicFit fit_ohmic(const SweepRecord& data, const OhmicFitOptions& opt = {});

struct PooleFrenkelFitOptions {
    double v_min = 0.2;
    double v_max = 0.3;
};

struct PfTemperatureDiag {
    double temperature;
    double slope;       // d ln(J/V) / d sqrt(V)
    double intercept;
    double beta;        // slope * kT
    double r2;
    std::size_t n;
};

struct PooleFrenkelFit {
    double phi_b;          // eV
    double beta;           // eV V^-1/2, mean over temperatures
    double ln_prefactor;
    double arrhenius_r2;
    double min_r2;         // worst per-temperature linearity
    std::vector<PfTemperatureDiag> per_temperature;
};

PooleFrenkelFit fit_poole_frenkel(const SweepRecord& data, const PooleFrenkelFitOptions& opt = {});

/// Barrier a PF fit reports when applied to sweeps from current(): the
/// anchored form folds beta*sqrt(v_pf_min) into the intercept.
double anchored_apparent_barrier(const ConductionParams& p);

}  // namespace fenvm

#endif  // FENVM_CONDUCTION_HPP
