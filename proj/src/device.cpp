#include "fenvm/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>

namespace fenvm {

namespace {

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw std::invalid_argument(msg);
}

// Potentiation-direction progress curve; tends to x as nu -> 0.
double progress(double x, double nu)
{
    if (std::abs(nu) < 1e-12)
        return x;
    return std::expm1(-nu * x) / std::expm1(-nu);
}

double progress_inverse(double y, double nu)
{
    if (std::abs(nu) < 1e-12)
        return y;
    return -std::log1p(y * std::expm1(-nu)) / nu;
}

}  // namespace

std::string_view to_string(Scheme s)
{
    switch (s) {
    case Scheme::AmplitudeRamp: return "amplitude_ramp";
    case Scheme::WidthRamp: return "width_ramp";
    case Scheme::Single: return "single";
    }
    return "?";
}

std::string_view to_string(Direction d)
{
    return d == Direction::Potentiate ? "pot" : "dep";
}

Scheme parse_scheme(std::string_view name)
{
    if (name == "amplitude_ramp" || name == "amplitude")
        return Scheme::AmplitudeRamp;
    if (name == "width_ramp" || name == "width")
        return Scheme::WidthRamp;
    if (name == "single")
        return Scheme::Single;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

double DeviceParams::field_mv_per_cm(double v) const
{
    // 1 V/nm = 10 MV/cm
    return 10.0 * std::abs(v) / hzo_thickness_nm;
}

void DeviceParams::validate() const
{
    conduction.validate();
    const double fields[] = {area, amplitude_ramp.nu_p, amplitude_ramp.nu_d, width_ramp.nu_p,
                             width_ramp.nu_d, v_set_full, v_reset_full, v_c_set, v_c_reset,
                             v_pulse_threshold, t_width_ref, hzo_thickness_nm};
    for (double f : fields)
        require(std::isfinite(f), "device parameters must be finite");
    require(area > 0.0, "area must be > 0");
    require(n_levels >= 2, "n_levels must be >= 2");
    require(amplitude_ramp.nu_p > 0.0 && amplitude_ramp.nu_d > 0.0 && width_ramp.nu_p > 0.0 &&
                width_ramp.nu_d > 0.0,
            "update shapes nu must be > 0");
    require(v_set_full <= v_c_set && v_c_set < 0.0 && 0.0 < v_c_reset &&
                v_c_reset <= v_reset_full,
            "need v_set_full <= v_c_set < 0 < v_c_reset <= v_reset_full");
    require(v_pulse_threshold > std::max(-v_c_set, v_c_reset),
            "v_pulse_threshold must exceed both coercive voltages");
    require(v_pulse_threshold > 0.5 * std::max(-v_set_full, v_reset_full),
            "v_pulse_threshold must exceed half of every write amplitude");
    require(t_width_ref > 0.0, "t_width_ref must be > 0");
    require(hzo_thickness_nm > 0.0, "hzo_thickness_nm must be > 0");
}

DeviceState nominal_state(const DeviceParams& p, double w)
{
    require(w >= 0.0 && w <= 1.0, "state w must lie in [0, 1]");
    return DeviceState{w, p.g_hrs(), p.g_lrs()};
}

double update_curve(double x, double nu, Direction d)
{
    require(x >= 0.0 && x <= 1.0, "update_curve: x must lie in [0, 1]");
    require(nu > 0.0, "update_curve: nu must be > 0");
    const double y = progress(x, nu);
    return d == Direction::Potentiate ? y : 1.0 - y;
}

double update_curve_inverse(double g, double nu, Direction d)
{
    require(g >= 0.0 && g <= 1.0, "update_curve_inverse: g must lie in [0, 1]");
    require(nu > 0.0, "update_curve_inverse: nu must be > 0");
    const double y = d == Direction::Potentiate ? g : 1.0 - g;
    return std::clamp(progress_inverse(y, nu), 0.0, 1.0);
}

DeviceState apply_pulse(const DeviceState& s, const PulseSpec& pulse, const DeviceParams& p,
                        const StepNoise& noise)
{
    require(std::isfinite(pulse.amplitude) && std::isfinite(pulse.width),
            "pulse fields must be finite");
    require(pulse.width > 0.0, "pulse width must be > 0");
    if (std::abs(pulse.amplitude) < p.v_pulse_threshold)
        return s;

    const Direction dir = pulse.amplitude < 0.0 ? Direction::Potentiate : Direction::Depress;
    const double nu = p.nu(pulse.scheme, dir);
    const double n = static_cast<double>(p.n_levels);

    // Noiseless staircases sit on integer levels; snap so that inversion
    // round-off does not shift the ladder.
    double pos = update_curve_inverse(s.w, nu, dir) * n;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-6)
        pos = nearest;
    pos = std::min(n, pos + 1.0);
    const double target = update_curve(pos / n, nu, dir);

    DeviceState out = s;
    if (!noise) {
        out.w = target;
    } else {
        const double dw = noise(target - s.w);
        out.w = std::clamp(s.w + dw, 0.0, 1.0);
    }
    return out;
}

DeviceState dc_write(const DeviceState& s, double v_write, const DeviceParams& p)
{
    require(std::isfinite(v_write), "v_write must be finite");
    DeviceState out = s;
    if (v_write <= p.v_c_set) {
        const double target = std::min(1.0, (p.v_c_set - v_write) / (p.v_c_set - p.v_set_full));
        out.w = std::max(s.w, target);
    } else if (v_write >= p.v_c_reset) {
        const double drop =
            std::min(1.0, (v_write - p.v_c_reset) / (p.v_reset_full - p.v_c_reset));
        out.w = std::min(s.w, 1.0 - drop);
    }
    return out;
}

double read_resistance(const DeviceState& s, double v_read, double t, const DeviceParams& p)
{
    require(v_read != 0.0, "read voltage must be non-zero");
    return v_read / current(v_read, s.conductance(), t, p.conduction);
}

double write_energy(const DeviceState& s, const PulseSpec& pulse)
{
    require(pulse.width >= 0.0, "pulse width must be >= 0");
    return s.conductance() * pulse.amplitude * pulse.amplitude * pulse.width;
}

DeviceParams scale_area(const DeviceParams& p, double new_area)
{
    require(std::isfinite(new_area) && new_area > 0.0, "area must be > 0");
    DeviceParams out = p;
    out.area = new_area;
    return out;
}

Trace run_sequence(const DeviceState& s, Scheme scheme, int n_pot, int n_dep,
                   const DeviceParams& p, const StepNoise& noise)
{
    require(n_pot >= 0 && n_dep >= 0, "pulse counts must be >= 0");
    require(n_pot <= p.n_levels && n_dep <= p.n_levels, "pulse counts must not exceed n_levels");

    const double t = p.conduction.t_ref;
    Trace tr;
    tr.points.reserve(static_cast<std::size_t>(n_pot + n_dep + 1));
    auto read = [&](int count, Direction d, const DeviceState& st) {
        const double r = read_resistance(st, kTraceReadVoltage, t, p);
        tr.points.push_back({count, d, 1.0 / r, r});
    };

    DeviceState st = s;
    read(0, Direction::Potentiate, st);
    const PulseSpec pot{p.v_set_full, p.t_width_ref, scheme};
    const PulseSpec dep{p.v_reset_full, p.t_width_ref, scheme};
    int count = 0;
    for (int k = 0; k < n_pot; ++k) {
        st = apply_pulse(st, pot, p, noise);
        read(++count, Direction::Potentiate, st);
    }
    for (int k = 0; k < n_dep; ++k) {
        st = apply_pulse(st, dep, p, noise);
        read(++count, Direction::Depress, st);
    }
    tr.final_state = st;
    return tr;
}

TraceSegments split_trace(std::span<const TracePoint> trace)
{
    TraceSegments seg;
    if (trace.empty())
        return seg;
    seg.potentiation.push_back(trace.front().conductance);
    std::size_t i = 1;
    for (; i < trace.size() && trace[i].direction == Direction::Potentiate; ++i)
        seg.potentiation.push_back(trace[i].conductance);
    if (i < trace.size()) {
        seg.depression.push_back(trace[i - 1].conductance);
        for (; i < trace.size() && trace[i].direction == Direction::Depress; ++i)
            seg.depression.push_back(trace[i].conductance);
    }
    return seg;
}

UpdateFit fit_update_curve(std::span<const double> conductances)
{
    const std::size_t n = conductances.size();
    require(n >= 5, "fit_update_curve: need at least 5 points");
    const double g0 = conductances.front();
    const double span = conductances.back() - g0;
    if (!(std::abs(span) > 0.0))
        throw FitError("fit_update_curve: staircase has no net conductance change");

    std::vector<double> x(n), y(n);
    bool monotone = true;
    for (std::size_t k = 0; k < n; ++k) {
        x[k] = static_cast<double>(k) / static_cast<double>(n - 1);
        y[k] = (conductances[k] - g0) / span;
        if (k > 0 && y[k] < y[k - 1] - 1e-12)
            monotone = false;
    }

    // sigma0 is linear given nu, so only nu is searched.
    auto amplitude = [&](double nu) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double pk = progress(x[k], nu);
            num += y[k] * pk;
            den += pk * pk;
        }
        return num / den;
    };
    auto ssr = [&](double nu) {
        const double a = amplitude(nu);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = y[k] - a * progress(x[k], nu);
            s += r * r;
        }
        return s;
    };

    constexpr double kNuMin = 1e-6;
    constexpr double kNuMax = 60.0;
    const int bits = std::numeric_limits<double>::digits / 2;
    const auto [nu, best] = boost::math::tools::brent_find_minima(ssr, kNuMin, kNuMax, bits);

    UpdateFit f{};
    f.nu = nu;
    f.sigma0 = amplitude(nu);
    f.rms = std::sqrt(best / static_cast<double>(n));
    f.monotone = monotone;
    f.at_bound = nu < kNuMin * 1.001 || nu > kNuMax * 0.999;
    return f;
}

std::vector<LoopPoint> hysteresis_loop(const DeviceParams& p, double v_min, double v_max,
                                       int n_steps, const DeviceState* initial)
{
    // A range that never crosses a coercive voltage gives a flat loop.
    require(std::isfinite(v_min) && std::isfinite(v_max) && v_min < v_max,
            "hysteresis_loop: need v_min < v_max");
    require(n_steps >= 2, "hysteresis_loop: need at least 2 steps per branch");

    DeviceState st = initial ? *initial : hrs_state(p);
    const double t = p.conduction.t_ref;
    const double step = (v_max - v_min) / static_cast<double>(n_steps - 1);
    std::vector<LoopPoint> loop;
    loop.reserve(static_cast<std::size_t>(2 * n_steps));
    auto visit = [&](double v, Branch b) {
        st = dc_write(st, v, p);
        loop.push_back({v, read_resistance(st, kLoopReadVoltage, t, p), st.w, b});
    };
    for (int i = 0; i < n_steps; ++i)
        visit(v_min + step * i, Branch::Up);
    for (int i = n_steps - 1; i >= 0; --i)
        visit(v_min + step * i, Branch::Down);
    return loop;
}

LoopWindow extract_window(std::span<const LoopPoint> loop)
{
    auto onset = [&](Branch b) {
        const LoopPoint* prev = nullptr;
        for (const auto& pt : loop) {
            if (pt.branch != b)
                continue;
            if (prev && std::abs(pt.resistance - prev->resistance) >
                            1e-12 * std::abs(prev->resistance))
                return 0.5 * (pt.v_write + prev->v_write);
            prev = &pt;
        }
        throw std::invalid_argument("extract_window: branch never switches");
    };
    LoopWindow lw{};
    lw.v_reset = onset(Branch::Up);
    lw.v_set = onset(Branch::Down);
    lw.window = lw.v_reset - lw.v_set;
    return lw;
}

}  // namespace fenvm
