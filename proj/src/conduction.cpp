#include "fenvm/conduction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <boost/math/special_functions/lambert_w.hpp>

#include "fenvm/regression.hpp"

namespace fenvm {

namespace {

void require_finite(double x, const char* what)
{
    if (!std::isfinite(x))
        throw std::invalid_argument(std::string(what) + " must be finite");
}

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw std::invalid_argument(msg);
}

// Samples grouped by temperature, then by voltage magnitude. Duplicate
// (T, V) points collapse to the mean of their ln(J/V).
using Grouped = std::map<double, std::map<double, std::vector<double>>>;

Grouped group_log_jv(const SweepRecord& data, double v_lo, double v_hi)
{
    constexpr double kEdge = 1e-12;
    Grouped g;
    for (const auto& s : data.samples) {
        if (!std::isfinite(s.voltage) || !std::isfinite(s.current_density) ||
            !std::isfinite(s.temperature))
            throw FitError("sweep contains non-finite samples");
        if (!(s.temperature > 0.0))
            throw FitError("sweep temperature must be positive");
        const double v = std::abs(s.voltage);
        if (v == 0.0 || v < v_lo - kEdge || v > v_hi + kEdge)
            continue;
        const double jv = s.current_density / s.voltage;
        if (!(jv > 0.0))
            throw FitError("sweep sample at " + std::to_string(s.voltage) +
                           " V has zero current or current opposite to the voltage");
        g[s.temperature][v].push_back(std::log(jv));
    }
    return g;
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double thermal_energy(double temperature_k)
{
    return kBoltzmannEv * temperature_k;
}

void ConductionParams::validate() const
{
    const double fields[] = {g_lrs_ref, on_off, area_ref, e_a, beta,
                             v_ohmic_max, v_pf_min, v_clamp, t_ref};
    for (double f : fields)
        require_finite(f, "conduction parameter");
    require(g_lrs_ref > 0.0, "g_lrs_ref must be > 0");
    require(on_off > 1.0, "on_off must be > 1");
    require(area_ref > 0.0, "area_ref must be > 0");
    require(e_a >= 0.0, "e_a must be >= 0");
    require(beta >= 0.0, "beta must be >= 0");
    require(v_ohmic_max > 0.0 && v_ohmic_max <= v_pf_min && v_pf_min < v_clamp,
            "need 0 < v_ohmic_max <= v_pf_min < v_clamp");
    require(t_ref > 0.0, "t_ref must be > 0");
}

double shape_factor(double v, double t, const ConductionParams& p)
{
    require_finite(v, "voltage");
    require_finite(t, "temperature");
    require(v >= 0.0, "shape_factor: voltage must be >= 0");
    require(t > 0.0, "temperature must be > 0");
    if (v <= p.v_pf_min)
        return 1.0;
    const double v_eff = std::min(v, p.v_clamp);
    return std::exp(p.beta * (std::sqrt(v_eff) - std::sqrt(p.v_pf_min)) / thermal_energy(t));
}

double activation_factor(double t, const ConductionParams& p)
{
    require_finite(t, "temperature");
    require(t > 0.0, "temperature must be > 0");
    return std::exp(-p.e_a * (1.0 / thermal_energy(t) - 1.0 / thermal_energy(p.t_ref)));
}

double current(double v, double g_state, double t, const ConductionParams& p)
{
    require_finite(v, "voltage");
    require_finite(g_state, "state conductance");
    require(g_state > 0.0, "state conductance must be > 0");
    if (v == 0.0)
        return 0.0;
    const double mag = std::abs(v);
    const double i = g_state * activation_factor(t, p) * mag * shape_factor(mag, t, p);
    return v < 0.0 ? -i : i;
}

double voltage_for_current(double i, double g_state, double t, const ConductionParams& p)
{
    require_finite(i, "current");
    require(g_state > 0.0, "state conductance must be > 0");
    if (i == 0.0)
        return 0.0;
    const double a = std::abs(i);
    const double c = g_state * activation_factor(t, p);
    double v;
    if (p.beta == 0.0 || a <= c * p.v_pf_min) {
        v = a / c;
    } else {
        const double h_clamp = shape_factor(p.v_clamp, t, p);
        if (a >= c * p.v_clamp * h_clamp) {
            v = a / (c * h_clamp);
        } else {
            // c v exp(b (sqrt v - sqrt vpf)) = a  with u = sqrt v:
            // (b u / 2) exp(b u / 2) = (b / 2) sqrt(a/c) exp(b sqrt(vpf) / 2)
            const double b = p.beta / thermal_energy(t);
            const double arg =
                0.5 * b * std::exp(0.5 * (std::log(a / c) + b * std::sqrt(p.v_pf_min)));
            const double u = 2.0 / b * boost::math::lambert_w0(arg);
            v = u * u;
        }
    }
    return i < 0.0 ? -v : v;
}

double nonlinearity_ratio(double v, double t, const ConductionParams& p)
{
    require_finite(v, "voltage");
    require(v > 0.0, "nonlinearity_ratio: voltage must be > 0");
    // Unit conductance; the state cancels.
    return current(v, 1.0, t, p) / current(0.5 * v, 1.0, t, p);
}

SweepRecord simulate_sweep(const std::vector<double>& voltages,
                           const std::vector<double>& temperatures,
                           double g_state, double area, const ConductionParams& p)
{
    require(area > 0.0, "area must be > 0");
    SweepRecord rec;
    rec.samples.reserve(voltages.size() * temperatures.size());
    for (double t : temperatures)
        for (double v : voltages)
            rec.samples.push_back({v, current(v, g_state, t, p) / area, t});
    return rec;
}

OhmicFit fit_ohmic(const SweepRecord& data, const OhmicFitOptions& opt)
{
    const Grouped g = group_log_jv(data, 0.0, opt.v_max);
    if (g.size() < 2)
        throw FitError("ohmic fit: Arrhenius regression needs at least two temperatures");

    OhmicFit out{};
    std::vector<double> inv_kt, level;
    for (const auto& [t, by_v] : g) {
        std::vector<double> lv;
        for (const auto& [v, logs] : by_v)
            lv.push_back(mean(logs));
        const double m = mean(lv);
        double worst = 0.0;
        for (double x : lv)
            worst = std::max(worst, std::abs(x - m));
        out.per_temperature.push_back({t, m, worst, lv.size()});
        out.max_residual = std::max(out.max_residual, worst);
        inv_kt.push_back(1.0 / thermal_energy(t));
        level.push_back(m);
    }
    const LineFit arr = fit_line(inv_kt, level);
    out.e_a = -arr.slope;
    out.ln_prefactor = arr.intercept;
    out.arrhenius_r2 = arr.r2;
    out.regime_violation = out.max_residual > opt.residual_threshold;
    return out;
}

PooleFrenkelFit fit_poole_frenkel(const SweepRecord& data, const PooleFrenkelFitOptions& opt)
{
    const Grouped g = group_log_jv(data, opt.v_min, opt.v_max);
    if (g.size() < 2)
        throw FitError("poole-frenkel fit: need at least two temperatures in the PF window");

    PooleFrenkelFit out{};
    out.min_r2 = 1.0;
    std::vector<double> inv_kt, intercepts;
    double beta_sum = 0.0;
    for (const auto& [t, by_v] : g) {
        if (by_v.size() < 3)
            throw FitError("poole-frenkel fit: need at least three voltages at T=" +
                           std::to_string(t) + " K");
        std::vector<double> sv, lv;
        for (const auto& [v, logs] : by_v) {
            sv.push_back(std::sqrt(v));
            lv.push_back(mean(logs));
        }
        const LineFit f = fit_line(sv, lv);
        const double kt = thermal_energy(t);
        out.per_temperature.push_back({t, f.slope, f.intercept, f.slope * kt, f.r2, f.n});
        out.min_r2 = std::min(out.min_r2, f.r2);
        beta_sum += f.slope * kt;
        inv_kt.push_back(1.0 / kt);
        intercepts.push_back(f.intercept);
    }
    const LineFit arr = fit_line(inv_kt, intercepts);
    out.phi_b = -arr.slope;
    out.ln_prefactor = arr.intercept;
    out.arrhenius_r2 = arr.r2;
    out.beta = beta_sum / static_cast<double>(g.size());
    return out;
}

double anchored_apparent_barrier(const ConductionParams& p)
{
    return p.e_a + p.beta * std::sqrt(p.v_pf_min);
}

}  // namespace fenvm
