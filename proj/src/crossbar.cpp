#include "fenvm/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>

namespace fenvm {

void BiasScheme::validate(const DeviceParams& p) const
{
    if (!(width > 0.0))
        throw std::invalid_argument("bias width must be > 0");
    if (!(v_write_pot < 0.0) || !(v_write_dep > 0.0))
        throw std::invalid_argument("bias needs v_write_pot < 0 < v_write_dep");
    if (0.5 * std::abs(v_write_pot) >= p.v_pulse_threshold ||
        0.5 * std::abs(v_write_dep) >= p.v_pulse_threshold)
        throw std::invalid_argument("half-select level |v_write|/2 must stay below v_pulse_threshold");
    if (!(v_read > 0.0) || v_read > 0.3)
        throw std::invalid_argument("v_read must lie in (0, 0.3] V");
}

Crossbar::Crossbar(int rows, int cols, const DeviceParams& params, const VariabilityParams& vp,
                   std::uint64_t seed)
    : rows_(rows), cols_(cols), params_(params), vp_(vp)
{
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("crossbar dimensions must be >= 1");
    params_.validate();
    cells_ = sample_population(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                               params_, vp_, seed);
    if (vp_.sigma_c2c > 0.0)
        noise_.emplace(vp_.sigma_c2c, derive_seed(seed, SeedStream::CycleToCycle, 0));
}

std::size_t Crossbar::index(int r, int c) const
{
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
        throw std::out_of_range("crossbar cell (" + std::to_string(r) + "," + std::to_string(c) +
                                ") out of bounds");
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
}

Matrix Crossbar::conductances() const
{
    Matrix g(rows_, cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            g(r, c) = cell(r, c).conductance();
    return g;
}

StepNoise Crossbar::step_noise()
{
    if (!noise_)
        return {};
    return noise_->hook();
}

DisturbReport write_cell(Crossbar& xb, int r, int c, const PulseSpec& pulse)
{
    const DeviceParams& p = xb.params();
    DisturbReport rep;
    const StepNoise noise = xb.step_noise();

    DeviceState& sel = xb.cell(r, c);
    const DeviceState before = sel;
    sel = apply_pulse(sel, pulse, p, noise);
    rep.selected_changed = !(sel == before);

    const PulseSpec half{0.5 * pulse.amplitude, pulse.width, pulse.scheme};
    auto disturb = [&](int rr, int cc) {
        DeviceState& s = xb.cell(rr, cc);
        const DeviceState prev = s;
        s = apply_pulse(s, half, p, noise);
        ++rep.half_selected;
        if (!(s == prev))
            ++rep.disturbed;
    };
    for (int cc = 0; cc < xb.cols(); ++cc)
        if (cc != c)
            disturb(r, cc);
    for (int rr = 0; rr < xb.rows(); ++rr)
        if (rr != r)
            disturb(rr, c);
    return rep;
}

void erase(Crossbar& xb)
{
    const DeviceParams& p = xb.params();
    for (int r = 0; r < xb.rows(); ++r)
        for (int c = 0; c < xb.cols(); ++c)
            xb.cell(r, c) = dc_write(xb.cell(r, c), p.v_reset_full, p);
}

namespace {

void check_shape(const Crossbar& xb, const Matrix& m)
{
    if (m.rows != xb.rows() || m.cols != xb.cols())
        throw std::invalid_argument("target matrix shape does not match the crossbar");
}

}  // namespace

int open_loop_count(double target, const DeviceParams& p, Scheme scheme)
{
    const double g_hrs = p.g_hrs();
    const double g_lrs = p.g_lrs();
    const double y = (std::clamp(target, g_hrs, g_lrs) - g_hrs) / (g_lrs - g_hrs);
    const double nu = p.nu(scheme, Direction::Potentiate);
    int best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= p.n_levels; ++k) {
        const double lvl = update_curve(static_cast<double>(k) / p.n_levels, nu,
                                        Direction::Potentiate);
        const double err = std::abs(lvl - y);
        if (err < best_err) {
            best_err = err;
            best = k;
        }
    }
    return best;
}

ProgramReport program_open_loop(Crossbar& xb, const Matrix& target, const BiasScheme& bias)
{
    check_shape(xb, target);
    const DeviceParams& p = xb.params();
    ProgramReport rep;
    erase(xb);
    const PulseSpec pot = bias.pulse(Direction::Potentiate);
    for (int r = 0; r < xb.rows(); ++r) {
        for (int c = 0; c < xb.cols(); ++c) {
            const double t = target(r, c);
            if (t < p.g_hrs() || t > p.g_lrs())
                ++rep.clipped;
            const int k = open_loop_count(t, p, bias.scheme);
            for (int i = 0; i < k; ++i)
                write_cell(xb, r, c, pot);
            rep.pulses += static_cast<std::size_t>(k);
        }
    }
    return rep;
}

WriteVerifyReport program_write_verify(Crossbar& xb, const Matrix& target, const BiasScheme& bias,
                                       double tol, int max_iters)
{
    check_shape(xb, target);
    if (!(tol > 0.0) || max_iters < 0)
        throw std::invalid_argument("write-verify needs tol > 0 and max_iters >= 0");
    const DeviceParams& p = xb.params();
    const double t_read = p.conduction.t_ref;
    WriteVerifyReport rep;
    for (int r = 0; r < xb.rows(); ++r) {
        for (int c = 0; c < xb.cols(); ++c) {
            double gt = target(r, c);
            if (gt < p.g_hrs() || gt > p.g_lrs()) {
                ++rep.clipped;
                gt = std::clamp(gt, p.g_hrs(), p.g_lrs());
            }
            ++rep.cells;
            for (int it = 0;; ++it) {
                const double g =
                    current(bias.v_read, xb.cell(r, c).conductance(), t_read, p.conduction) /
                    bias.v_read;
                if (std::abs(g - gt) <= tol * gt) {
                    ++rep.converged;
                    rep.max_iterations_used = std::max(rep.max_iterations_used, it);
                    break;
                }
                if (it == max_iters) {
                    rep.max_iterations_used = std::max(rep.max_iterations_used, it);
                    break;
                }
                write_cell(xb, r, c,
                           bias.pulse(g < gt ? Direction::Potentiate : Direction::Depress));
                ++rep.pulses;
            }
        }
    }
    return rep;
}

void program_exact(Crossbar& xb, const Matrix& target)
{
    check_shape(xb, target);
    for (int r = 0; r < xb.rows(); ++r) {
        for (int c = 0; c < xb.cols(); ++c) {
            DeviceState& s = xb.cell(r, c);
            s.w = std::clamp((target(r, c) - s.g_hrs_dev) / (s.g_lrs_dev - s.g_hrs_dev), 0.0, 1.0);
        }
    }
}

std::vector<double> read_vmm(const Crossbar& xb, std::span<const double> x, double t)
{
    if (static_cast<int>(x.size()) != xb.rows())
        throw std::invalid_argument("read_vmm: input length must equal the row count");
    for (double v : x)
        if (!std::isfinite(v) || std::abs(v) > 0.3 + 1e-12)
            throw std::invalid_argument("read_vmm: |x_i| must not exceed 0.3 V");
    const ConductionParams& cp = xb.params().conduction;
    std::vector<double> out(static_cast<std::size_t>(xb.cols()), 0.0);
    for (int r = 0; r < xb.rows(); ++r) {
        const double v = x[static_cast<std::size_t>(r)];
        if (v == 0.0)
            continue;
        for (int c = 0; c < xb.cols(); ++c)
            out[static_cast<std::size_t>(c)] += current(v, xb.cell(r, c).conductance(), t, cp);
    }
    return out;
}

double series_current(std::span<const double> conductances, double v, double t,
                      const ConductionParams& p)
{
    if (conductances.empty())
        throw std::invalid_argument("series_current: empty path");
    if (v == 0.0)
        return 0.0;
    const double mag = std::abs(v);
    // The full voltage across the weakest cell bounds the series current.
    double hi = std::numeric_limits<double>::infinity();
    for (double g : conductances)
        hi = std::min(hi, current(mag, g, t, p));
    auto f = [&](double i) {
        double s = -mag;
        for (double g : conductances)
            s += voltage_for_current(i, g, t, p);
        return s;
    };
    std::uintmax_t iters = 200;
    const auto [lo_i, hi_i] = boost::math::tools::toms748_solve(
        f, 0.0, hi, -mag, f(hi), boost::math::tools::eps_tolerance<double>(), iters);
    const double i = 0.5 * (lo_i + hi_i);
    return v < 0.0 ? -i : i;
}

double sneak_ratio(const Crossbar& xb, int r, int c, double v_read, double t)
{
    if (!(v_read > 0.0))
        throw std::invalid_argument("sneak_ratio: v_read must be > 0");
    const ConductionParams& cp = xb.params().conduction;
    const double i_sel = current(v_read, xb.cell(r, c).conductance(), t, cp);
    if (xb.rows() < 2 || xb.cols() < 2)
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (int rr = 0; rr < xb.rows(); ++rr) {
        if (rr == r)
            continue;
        for (int cc = 0; cc < xb.cols(); ++cc) {
            if (cc == c)
                continue;
            const double path[3] = {xb.cell(r, cc).conductance(), xb.cell(rr, cc).conductance(),
                                    xb.cell(rr, c).conductance()};
            worst = std::max(worst, series_current(path, v_read, t, cp));
        }
    }
    return i_sel / worst;
}

}  // namespace fenvm
