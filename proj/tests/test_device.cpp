#include <doctest.h>

#include <cmath>
#include <random>

#include "fenvm/device.hpp"
#include "fenvm/stochastic.hpp"

using namespace fenvm;

namespace {

double norm_g(const DeviceState& s)
{
    return (s.conductance() - s.g_hrs_dev) / (s.g_lrs_dev - s.g_hrs_dev);
}

std::vector<double> conductances(const std::vector<TracePoint>& pts)
{
    std::vector<double> g;
    for (const auto& p : pts)
        g.push_back(p.conductance);
    return g;
}

}  // namespace

TEST_CASE("update curve values and endpoints")
{
    CHECK(update_curve(0.5, 1.9, Direction::Potentiate) ==
          doctest::Approx(0.721115178022863).epsilon(1e-12));
    CHECK(update_curve(0.5, 4.3, Direction::Depress) ==
          doctest::Approx(0.104331223119001).epsilon(1e-12));
    for (double nu : {0.01, 0.5, 1.9, 4.3}) {
        CHECK(update_curve(0.0, nu, Direction::Potentiate) == 0.0);
        CHECK(update_curve(1.0, nu, Direction::Potentiate) == 1.0);
        CHECK(update_curve(0.0, nu, Direction::Depress) == 1.0);
        CHECK(update_curve(1.0, nu, Direction::Depress) == 0.0);
        for (double x = 0.0; x <= 1.0; x += 0.05)
            CHECK(update_curve_inverse(update_curve(x, nu, Direction::Potentiate), nu,
                                       Direction::Potentiate) == doctest::Approx(x).epsilon(1e-9));
    }
    CHECK_THROWS(update_curve(1.5, 1.0, Direction::Potentiate));
    CHECK_THROWS(update_curve(0.5, 0.0, Direction::Potentiate));
}

TEST_CASE("update curve approaches the identity as nu goes to zero")
{
    for (double nu : {1e-3, 1e-2, 0.1, 0.5}) {
        double worst = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double x = k / 1000.0;
            worst = std::max(worst, std::abs(update_curve(x, nu, Direction::Potentiate) - x));
        }
        CHECK(worst < nu / 8.0);
    }
}

TEST_CASE("apply_pulse examples")
{
    DeviceParams p;
    DeviceState s = hrs_state(p);
    for (int k = 0; k < 50; ++k)
        s = apply_pulse(s, {-1.6, 50e-6, Scheme::AmplitudeRamp}, p);
    CHECK(s.w == 1.0);
    CHECK(s.conductance() == s.g_lrs_dev);

    // Half-select level is an exact no-op.
    for (double w : {0.0, 0.37, 1.0}) {
        const DeviceState a = nominal_state(p, w);
        CHECK(apply_pulse(a, {-0.8, 50e-6, Scheme::AmplitudeRamp}, p) == a);
        CHECK(apply_pulse(a, {1.2, 50e-6, Scheme::AmplitudeRamp}, p) == a);
    }

    DeviceState l = lrs_state(p);
    for (int k = 0; k < 25; ++k)
        l = apply_pulse(l, {2.4, 50e-6, Scheme::AmplitudeRamp}, p);
    CHECK(norm_g(l) == doctest::Approx(0.104331223119001).epsilon(1e-9));

    CHECK_THROWS(apply_pulse(l, {NAN, 50e-6, Scheme::AmplitudeRamp}, p));
    CHECK_THROWS(apply_pulse(l, {2.4, 0.0, Scheme::AmplitudeRamp}, p));
}

TEST_CASE("pulse direction and bounds properties")
{
    DeviceParams p;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CycleNoise noise(0.3, 5);
    for (int i = 0; i < 2000; ++i) {
        const DeviceState s = nominal_state(p, u(rng));
        const Scheme sc = i % 3 == 0 ? Scheme::WidthRamp : Scheme::AmplitudeRamp;
        const DeviceState up = apply_pulse(s, {-1.6, 50e-6, sc}, p, noise.hook());
        const DeviceState down = apply_pulse(s, {2.4, 50e-6, sc}, p, noise.hook());
        CHECK(up.w >= s.w);
        CHECK(down.w <= s.w);
        CHECK(up.w <= 1.0);
        CHECK(down.w >= 0.0);
    }
}

TEST_CASE("full potentiation then depression closes the loop")
{
    DeviceParams p;
    for (Scheme sc : {Scheme::AmplitudeRamp, Scheme::WidthRamp, Scheme::Single}) {
        const DeviceState s0 = hrs_state(p);
        const Trace tr = run_sequence(s0, sc, p.n_levels, p.n_levels, p);
        CHECK(tr.points.size() == static_cast<std::size_t>(2 * p.n_levels + 1));
        CHECK(std::abs(tr.final_state.conductance() / s0.conductance() - 1.0) < 1e-12);
        double gmin = 1e300, gmax = 0.0;
        for (const auto& pt : tr.points) {
            gmin = std::min(gmin, pt.conductance);
            gmax = std::max(gmax, pt.conductance);
        }
        CHECK(gmax / gmin == doctest::Approx(7.0).epsilon(1e-12));
    }
}

TEST_CASE("trace reads at 0.2 V")
{
    DeviceParams p;
    const Trace tr = run_sequence(hrs_state(p), Scheme::AmplitudeRamp, 3, 2, p);
    CHECK(tr.points.front().count == 0);
    CHECK(tr.points.back().count == 5);
    CHECK(tr.points.back().direction == Direction::Depress);
    CHECK(tr.points.front().resistance == doctest::Approx(7e8).epsilon(1e-12));
    CHECK(tr.points.front().conductance * tr.points.front().resistance == doctest::Approx(1.0));
    CHECK_THROWS(run_sequence(hrs_state(p), Scheme::AmplitudeRamp, 51, 0, p));
}

TEST_CASE("fit_update_curve round trip")
{
    for (double nu : {0.5, 1.9, 4.3}) {
        DeviceParams p;
        p.amplitude_ramp = {nu, nu};
        const Trace tr = run_sequence(hrs_state(p), Scheme::AmplitudeRamp, 50, 50, p);
        const TraceSegments seg = split_trace(tr.points);
        CHECK(seg.potentiation.size() == 51);
        CHECK(seg.depression.size() == 51);
        const UpdateFit fp = fit_update_curve(seg.potentiation);
        const UpdateFit fd = fit_update_curve(seg.depression);
        CHECK(std::abs(fp.nu / nu - 1.0) < 1e-6);
        CHECK(std::abs(fd.nu / nu - 1.0) < 1e-6);
        CHECK(fp.sigma0 == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(fp.monotone);
    }
}

TEST_CASE("fit_update_curve linear limit and noise")
{
    DeviceParams p;
    p.amplitude_ramp = {0.01, 0.01};
    const auto g = conductances(run_sequence(hrs_state(p), Scheme::AmplitudeRamp, 50, 0, p).points);
    const UpdateFit f = fit_update_curve(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double y = (g[k] - g.front()) / (g.back() - g.front());
        CHECK(std::abs(y - static_cast<double>(k) / 50.0) < 0.01);
    }
    CHECK(f.nu < 0.05);

    DeviceParams d;
    int within = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        CycleNoise noise(0.10, derive_seed(99, SeedStream::CycleToCycle, s));
        const auto tr = run_sequence(hrs_state(d), Scheme::AmplitudeRamp, 50, 0, d, noise.hook());
        const UpdateFit n = fit_update_curve(conductances(tr.points));
        if (std::abs(n.nu / 1.9 - 1.0) < 0.25)
            ++within;
    }
    CHECK(within == 100);

    CHECK_THROWS(fit_update_curve(std::vector<double>{1, 2, 3, 4}));
    CHECK_THROWS_AS(fit_update_curve(std::vector<double>{1, 1, 1, 1, 1}), FitError);
    const UpdateFit bumpy = fit_update_curve(std::vector<double>{0, 0.5, 0.4, 0.8, 0.9, 1.0});
    CHECK_FALSE(bumpy.monotone);
}

TEST_CASE("dc_write examples")
{
    DeviceParams p;
    CHECK(dc_write(hrs_state(p), -1.6, p).w == 1.0);
    CHECK(dc_write(lrs_state(p), 0.5, p).w == 1.0);
    CHECK(dc_write(lrs_state(p), 2.4, p).w == 0.0);
    CHECK(p.v_c_reset == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(p.memory_window() == doctest::Approx(1.4).epsilon(1e-15));
    // One-sided: a weaker SET never lowers the state.
    CHECK(dc_write(lrs_state(p), -1.0, p).w == 1.0);
    CHECK(dc_write(hrs_state(p), -1.1, p).w == doctest::Approx(0.5));
    CHECK(dc_write(lrs_state(p), 1.6, p).w == doctest::Approx(0.5));
}

TEST_CASE("hysteresis loop")
{
    DeviceParams p;
    const auto loop = hysteresis_loop(p, -2.0, 3.0, 501);
    CHECK(loop.size() == 1002);
    const LoopWindow lw = extract_window(loop);
    CHECK(std::abs(lw.window - 1.4) <= 0.01 + 1e-12);
    CHECK(std::abs(lw.v_set - (-0.6)) <= 0.01 + 1e-12);

    // Branch ratio at v_write = 0 equals on_off.
    double r_up = 0.0, r_down = 0.0;
    for (const auto& pt : loop) {
        if (std::abs(pt.v_write) < 1e-9)
            (pt.branch == Branch::Up ? r_up : r_down) = pt.resistance;
    }
    CHECK(r_down / r_up == doctest::Approx(7.0).epsilon(1e-12));

    const DeviceState l = lrs_state(p);
    for (const auto& pt : hysteresis_loop(p, -2.0, 0.7, 55, &l))
        CHECK(pt.w == 1.0);
    CHECK_THROWS(hysteresis_loop(p, 1.0, -1.0, 10));
}

TEST_CASE("read resistance, energy and area scaling")
{
    DeviceParams p;
    CHECK(read_resistance(lrs_state(p), 0.1, 300.0, p) == doctest::Approx(1e8).epsilon(1e-14));
    CHECK(read_resistance(hrs_state(p), 0.1, 300.0, p) == doctest::Approx(7e8).epsilon(1e-14));
    CHECK(read_resistance(lrs_state(p), 0.3, 300.0, p) ==
          doctest::Approx(21115895.3573244).epsilon(1e-12));

    CHECK(write_energy(hrs_state(p), {2.4, 50e-6, Scheme::AmplitudeRamp}) ==
          doctest::Approx(4.11428571428571e-13).epsilon(1e-12));
    CHECK(write_energy(lrs_state(p), {-1.6, 50e-6, Scheme::AmplitudeRamp}) ==
          doctest::Approx(1.28e-12).epsilon(1e-12));
    CHECK(write_energy(lrs_state(p), {-1.6, 0.0, Scheme::AmplitudeRamp}) == 0.0);

    const DeviceParams small = scale_area(p, 1.0);
    CHECK(current(0.1, lrs_state(small).conductance(), 300.0, small.conduction) ==
          doctest::Approx(6.94444444444444e-14).epsilon(1e-12));
    const DeviceParams same = scale_area(p, p.area);
    CHECK(same.g_lrs() == p.g_lrs());
    const DeviceParams twice = scale_area(p, 2.0 * p.area);
    for (double v : {0.05, 0.25, 0.9})
        for (double t : {300.0, 340.0})
            for (double w : {0.0, 0.3, 1.0})
                CHECK(current(v, nominal_state(twice, w).conductance(), t, p.conduction) ==
                      doctest::Approx(2.0 * current(v, nominal_state(p, w).conductance(), t,
                                                    p.conduction)).epsilon(1e-14));
    CHECK_THROWS(scale_area(p, 0.0));
    CHECK(p.field_mv_per_cm(-1.6) == doctest::Approx(1.6));
}

TEST_CASE("scheme parsing and parameter validation")
{
    CHECK(parse_scheme("amplitude_ramp") == Scheme::AmplitudeRamp);
    CHECK(parse_scheme("width_ramp") == Scheme::WidthRamp);
    CHECK(parse_scheme("single") == Scheme::Single);
    CHECK_THROWS(parse_scheme("staircase"));
    DeviceParams p;
    CHECK_NOTHROW(p.validate());
    p.v_pulse_threshold = 0.7;
    CHECK_THROWS(p.validate());
    p = DeviceParams{};
    p.n_levels = 1;
    CHECK_THROWS(p.validate());
}
