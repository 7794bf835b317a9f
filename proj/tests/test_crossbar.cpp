#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fenvm/crossbar.hpp"

using namespace fenvm;

namespace {

// Independent inverse of current() by bisection on voltage.
double bisect_voltage(double i, double g, double t, const ConductionParams& p)
{
    double lo = 0.0, hi = 10.0;
    for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        (current(mid, g, t, p) < i ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Series current through a chain of cells, bisection on current.
double brute_series(const std::vector<double>& g, double v, double t, const ConductionParams& p)
{
    double lo = 0.0, hi = current(v, *std::min_element(g.begin(), g.end()), t, p);
    for (int k = 0; k < 80; ++k) {
        const double mid = 0.5 * (lo + hi);
        double sum = 0.0;
        for (double gi : g)
            sum += bisect_voltage(mid, gi, t, p);
        (sum < v ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double brute_sneak(const Crossbar& xb, int r, int c, double v, double t)
{
    const ConductionParams& p = xb.params().conduction;
    double worst = 0.0;
    for (int r2 = 0; r2 < xb.rows(); ++r2)
        for (int c2 = 0; c2 < xb.cols(); ++c2) {
            if (r2 == r || c2 == c)
                continue;
            const std::vector<double> path{xb.cell(r, c2).conductance(),
                                           xb.cell(r2, c2).conductance(),
                                           xb.cell(r2, c).conductance()};
            worst = std::max(worst, brute_series(path, v, t, p));
        }
    return current(v, xb.cell(r, c).conductance(), t, p) / worst;
}

Crossbar random_array(int rows, int cols, std::uint64_t seed)
{
    DeviceParams p;
    Crossbar xb(rows, cols, p, VariabilityParams{}, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            xb.cell(r, c).w = u(rng);
    return xb;
}

}  // namespace

TEST_CASE("half-select immunity under random writes")
{
    DeviceParams p;
    Crossbar xb(64, 64, p, VariabilityParams{}, 3);
    BiasScheme bias;
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> rc(0, 63), dir(0, 1);
    std::size_t disturbed = 0;
    for (int k = 0; k < 10000; ++k) {
        const int r = rc(rng), c = rc(rng);
        const Crossbar before = xb;
        const auto rep = write_cell(xb, r, c, bias.pulse(dir(rng) ? Direction::Potentiate : Direction::Depress));
        disturbed += rep.disturbed;
        CHECK(rep.half_selected == 126);
        if (k % 500 == 0) {
            for (int rr = 0; rr < 64; ++rr)
                for (int cc = 0; cc < 64; ++cc)
                    if (rr != r || cc != c)
                        CHECK(xb.cell(rr, cc) == before.cell(rr, cc));
        }
    }
    CHECK(disturbed == 0);
}

TEST_CASE("over-threshold half-select disturbs the lines")
{
    DeviceParams p;
    p.v_pulse_threshold = 1.4;
    Crossbar xb(5, 7, p);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 7; ++c)
            xb.cell(r, c).w = 1.0;
    const auto rep = write_cell(xb, 2, 3, {3.0, 50e-6, Scheme::AmplitudeRamp});
    CHECK(rep.disturbed == 5 + 7 - 2);
    CHECK(rep.selected_changed);

    Crossbar one(1, 1, DeviceParams{});
    const auto r1 = write_cell(one, 0, 0, {-1.6, 50e-6, Scheme::AmplitudeRamp});
    CHECK(r1.selected_changed);
    CHECK(r1.half_selected == 0);
    CHECK_THROWS(write_cell(one, 1, 0, {-1.6, 50e-6, Scheme::AmplitudeRamp}));
}

TEST_CASE("bias validation")
{
    DeviceParams p;
    BiasScheme b;
    CHECK_NOTHROW(b.validate(p));
    b.v_write_dep = 3.0;
    CHECK_THROWS(b.validate(p));
    b = BiasScheme{};
    b.v_read = 0.5;
    CHECK_THROWS(b.validate(p));
}

TEST_CASE("open-loop programming")
{
    DeviceParams p;
    BiasScheme bias;
    Crossbar xb(2, 2, p);
    Matrix t(2, 2);
    t(0, 0) = p.g_hrs();
    t(0, 1) = p.g_lrs();
    t(1, 0) = p.g_lrs();
    t(1, 1) = 2.0 * p.g_lrs();
    const auto rep = program_open_loop(xb, t, bias);
    CHECK(rep.clipped == 1);
    CHECK(xb.cell(0, 0).conductance() == p.g_hrs());
    CHECK(xb.cell(0, 1).conductance() == p.g_lrs());
    CHECK(xb.cell(1, 1).conductance() == p.g_lrs());

    // Nearest-level bound for mid-range targets.
    const double span = p.g_lrs() - p.g_hrs();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(p.g_hrs(), p.g_lrs());
    Crossbar big(16, 16, p);
    Matrix tt(16, 16);
    for (auto& v : tt.data)
        v = u(rng);
    program_open_loop(big, tt, bias);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) {
            const double y = (tt(r, c) - p.g_hrs()) / span;
            const int k = open_loop_count(tt(r, c), p, bias.scheme);
            const double lo = update_curve(std::max(0, k - 1) / 50.0, 1.9, Direction::Potentiate);
            const double hi = update_curve(std::min(50, k + 1) / 50.0, 1.9, Direction::Potentiate);
            const double got = (big.cell(r, c).conductance() - p.g_hrs()) / span;
            CHECK(std::abs(got - y) <= 0.5 * std::max(got - lo, hi - got) + 1e-12);
        }
}

TEST_CASE("open-loop error with cycle noise stays within twice the quantization error")
{
    DeviceParams p;
    BiasScheme bias;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(p.g_hrs(), p.g_lrs());
    Matrix t(100, 100);
    for (auto& v : t.data)
        v = u(rng);
    auto mean_err = [&](const Crossbar& xb) {
        double e = 0.0;
        for (int r = 0; r < 100; ++r)
            for (int c = 0; c < 100; ++c)
                e += std::abs(xb.cell(r, c).conductance() - t(r, c));
        return e / 1e4;
    };
    Crossbar clean(100, 100, p);
    program_open_loop(clean, t, bias);
    VariabilityParams c2c = VariabilityParams::none();
    c2c.sigma_c2c = 0.1;
    Crossbar noisy(100, 100, p, c2c, 21);
    program_open_loop(noisy, t, bias);
    CHECK(mean_err(noisy) <= 2.0 * mean_err(clean));
}

TEST_CASE("write-verify programming")
{
    DeviceParams p;
    BiasScheme bias;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(p.g_hrs(), p.g_lrs());
    Matrix t(16, 16);
    for (auto& v : t.data)
        v = u(rng);
    Crossbar clean(16, 16, p);
    const auto rep = program_write_verify(clean, t, bias, 0.05, 100);
    CHECK(rep.convergence_fraction() == 1.0);
    CHECK(rep.max_iterations_used <= p.n_levels);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            CHECK(std::abs(clean.cell(r, c).conductance() / t(r, c) - 1.0) <= 0.05);

    Matrix out(1, 1, 10.0 * p.g_lrs());
    Crossbar one(1, 1, p);
    const auto r1 = program_write_verify(one, out, bias, 0.05, 100);
    CHECK(r1.clipped == 1);
    CHECK(r1.converged == 1);

    VariabilityParams vp;
    Matrix big(64, 64);
    for (auto& v : big.data)
        v = u(rng);
    Crossbar noisy(64, 64, p, vp, 77);
    CHECK(program_write_verify(noisy, big, bias, 0.05, 100).convergence_fraction() >= 0.9);

    CHECK_THROWS(program_write_verify(one, out, bias, 0.0, 10));
    CHECK_THROWS(program_write_verify(one, Matrix(2, 2), bias, 0.05, 10));
}

TEST_CASE("read_vmm matches the dense product in the Ohmic regime")
{
    const Crossbar xb = random_array(4, 4, 1);
    const Matrix g = xb.conductances();
    const std::vector<double> x{0.1, -0.05, 0.0, 0.07};
    const auto y = read_vmm(xb, x, 300.0);
    for (int c = 0; c < 4; ++c) {
        double ref = 0.0;
        for (int r = 0; r < 4; ++r)
            ref += g(r, c) * x[static_cast<std::size_t>(r)];
        CHECK(std::abs(y[static_cast<std::size_t>(c)] - ref) <= 1e-12 * std::abs(ref));
    }

    // One-hot picks out a single cell.
    const std::vector<double> hot{0.0, 0.1, 0.0, 0.0};
    CHECK(read_vmm(xb, hot, 300.0)[2] == current(0.1, xb.cell(1, 2).conductance(), 300.0, xb.params().conduction));

    // Linearity.
    std::vector<double> half(x);
    for (auto& v : half)
        v *= 0.5;
    const auto yh = read_vmm(xb, half, 300.0);
    for (int c = 0; c < 4; ++c)
        CHECK(yh[static_cast<std::size_t>(c)] == doctest::Approx(0.5 * y[static_cast<std::size_t>(c)]).epsilon(1e-13));

    CHECK_THROWS(read_vmm(xb, std::vector<double>{0.4, 0, 0, 0}, 300.0));
    CHECK_THROWS(read_vmm(xb, std::vector<double>{0.1, 0}, 300.0));
}

TEST_CASE("read_vmm brute force in the PF regime")
{
    for (int n = 1; n <= 4; ++n) {
        const Crossbar xb = random_array(n, n, 10 + static_cast<std::uint64_t>(n));
        std::vector<double> x;
        for (int r = 0; r < n; ++r)
            x.push_back(0.3 * (r % 2 ? -1.0 : 1.0) * (r + 1) / n);
        const auto y = read_vmm(xb, x, 330.0);
        const ConductionParams& p = xb.params().conduction;
        for (int c = 0; c < n; ++c) {
            double ref = 0.0;
            for (int r = 0; r < n; ++r) {
                const double v = x[static_cast<std::size_t>(r)];
                const double kt = kBoltzmannEv * 330.0;
                const double av = std::abs(v);
                const double h = av <= p.v_pf_min
                                     ? 1.0
                                     : std::exp(p.beta * (std::sqrt(av) - std::sqrt(p.v_pf_min)) / kt);
                const double act = std::exp(-p.e_a * (1.0 / kt - 1.0 / (kBoltzmannEv * p.t_ref)));
                ref += std::copysign(xb.cell(r, c).conductance() * act * av * h, v);
            }
            CHECK(std::abs(y[static_cast<std::size_t>(c)] - ref) <= 1e-12 * std::abs(ref));
        }
    }
}

TEST_CASE("sneak ratio")
{
    DeviceParams p;
    Crossbar lrs(3, 3, p);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            lrs.cell(r, c).w = 1.0;
    const double s = sneak_ratio(lrs, 0, 0, 0.5, 300.0);
    CHECK(s == doctest::Approx(167.311810352430).epsilon(1e-10));
    CHECK(s >= nonlinearity_ratio(0.5, 300.0, p.conduction));

    Crossbar one(1, 1, p);
    CHECK(std::isinf(sneak_ratio(one, 0, 0, 0.5, 300.0)));
    Crossbar row(1, 4, p);
    CHECK(std::isinf(sneak_ratio(row, 0, 1, 0.5, 300.0)));

    DeviceParams ohmic = p;
    ohmic.conduction.beta = 0.0;
    Crossbar flat(3, 3, ohmic);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            flat.cell(r, c).w = 1.0;
    CHECK(sneak_ratio(flat, 1, 1, 0.5, 300.0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("sneak ratio brute force on small arrays")
{
    for (int rows = 2; rows <= 4; ++rows)
        for (int cols = 2; cols <= 4; ++cols) {
            const Crossbar xb = random_array(rows, cols, static_cast<std::uint64_t>(rows * 10 + cols));
            for (double v : {0.2, 0.5, 0.9})
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < cols; ++c) {
                        const double got = sneak_ratio(xb, r, c, v, 300.0);
                        const double ref = brute_sneak(xb, r, c, v, 300.0);
                        CHECK(std::abs(got / ref - 1.0) < 1e-12);
                    }
        }
}

TEST_CASE("series current agrees with bisection")
{
    ConductionParams p;
    const std::vector<double> g{1e-8, 3e-9, 5e-9};
    for (double v : {0.1, 0.6, 2.0})
        CHECK(std::abs(series_current(g, v, 300.0, p) / brute_series(g, v, 300.0, p) - 1.0) < 1e-12);
    CHECK(series_current(g, -0.6, 300.0, p) == -series_current(g, 0.6, 300.0, p));
    CHECK(series_current(g, 0.0, 300.0, p) == 0.0);
}

TEST_CASE("endpoint pattern reproduces on_off per column")
{
    DeviceParams p;
    Crossbar xb(64, 2, p, VariabilityParams{}, 9);
    Matrix t(64, 2);
    for (int r = 0; r < 64; ++r) {
        t(r, 0) = p.g_lrs();
        t(r, 1) = p.g_hrs();
    }
    program_open_loop(xb, t, BiasScheme{});
    const std::vector<double> x(64, 0.1);
    const auto y = read_vmm(xb, x, 300.0);
    // d2d sigma 0.1 on 64 cells: column means wander by about 1.3%.
    CHECK(std::abs(y[0] / y[1] / p.conduction.on_off - 1.0) < 0.1);
}
