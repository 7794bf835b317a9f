#include "fenvm/commands.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "fenvm/io.hpp"

namespace fenvm {

namespace {

std::string fixed(double x, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

// Voltages in window with at least one sample, ignoring sign.
bool has_samples(const SweepRecord& rec, double lo, double hi)
{
    for (const auto& s : rec.samples) {
        const double v = std::abs(s.voltage);
        if (v > 0.0 && v >= lo - 1e-12 && v <= hi + 1e-12)
            return true;
    }
    return false;
}

}  // namespace

std::vector<IvRow> cmd_iv(const SimConfig& cfg, const IvOptions& opt, const fs::path& out_dir)
{
    if (opt.step_mv <= 0 || opt.v_max_mv < opt.v_min_mv)
        throw std::invalid_argument("iv: need step > 0 and v_max >= v_min");
    if (opt.temperatures.empty())
        throw std::invalid_argument("iv: need at least one temperature");
    const DeviceParams& p = cfg.device;
    std::vector<double> volts;
    for (int mv = opt.v_min_mv; mv <= opt.v_max_mv; mv += opt.step_mv)
        volts.push_back(mv / 1000.0);

    std::vector<IvRow> rows;
    CsvWriter iv(out_dir / "iv.csv",
                 "state,temperature_K,voltage_V,current_A,current_density_A_per_um2,resistance_ohm");
    for (const char* state : {"lrs", "hrs"}) {
        const DeviceState s = std::string_view(state) == "lrs" ? lrs_state(p) : hrs_state(p);
        SweepRecord sweep;
        for (double t : opt.temperatures) {
            for (double v : volts) {
                const double i = current(v, s.conductance(), t, p.conduction);
                const double j = i / p.area;
                const double r = v == 0.0 ? 1.0 / (s.conductance() * activation_factor(t, p.conduction))
                                          : v / i;
                rows.push_back({state, t, v, i, j, r});
                iv.row(std::string_view(state), t, v, i, j, r);
                sweep.samples.push_back({v, j, t});
            }
        }
        write_sweep_csv(out_dir / (std::string("sweep_") + state + ".csv"), sweep);
    }
    return rows;
}

Trace cmd_pulse(const SimConfig& cfg, const PulseOptions& opt, const fs::path& out_dir)
{
    const DeviceParams& p = cfg.device;
    const int n_pot = opt.n_pot < 0 ? p.n_levels : opt.n_pot;
    const int n_dep = opt.n_dep < 0 ? p.n_levels : opt.n_dep;
    std::optional<CycleNoise> noise;
    if (opt.noise && cfg.variability.sigma_c2c > 0.0)
        noise.emplace(cfg.variability.sigma_c2c,
                      derive_seed(cfg.seed, SeedStream::CycleToCycle, 0));
    const Trace tr = run_sequence(hrs_state(p), opt.scheme, n_pot, n_dep, p,
                                  noise ? noise->hook() : StepNoise{});
    write_trace_csv(out_dir / "trace.csv", tr);
    return tr;
}

std::vector<FitReportRow> cmd_fit(const SimConfig& cfg, const FitInputs& in, const fs::path& out_dir)
{
    if (in.sweeps.empty() && !in.trace)
        throw FitError("no sweep or trace files given");
    const ConductionParams& cp = cfg.device.conduction;
    std::vector<FitReportRow> rows;

    for (const auto& path : in.sweeps) {
        const SweepRecord rec = read_sweep_csv(path);
        const std::string tag = path.stem().string();
        bool fitted = false;
        if (has_samples(rec, 0.0, cp.v_ohmic_max)) {
            OhmicFitOptions o;
            o.v_max = cp.v_ohmic_max;
            const OhmicFit f = fit_ohmic(rec, o);
            rows.push_back({tag + ".ohmic.e_a", f.e_a, "eV"});
            rows.push_back({tag + ".ohmic.ln_prefactor", f.ln_prefactor, "ln(A/(um^2 V))"});
            rows.push_back({tag + ".ohmic.arrhenius_r2", f.arrhenius_r2, "1"});
            rows.push_back({tag + ".ohmic.max_residual", f.max_residual, "1"});
            rows.push_back({tag + ".ohmic.regime_violation", f.regime_violation ? 1.0 : 0.0, "flag"});
            fitted = true;
        }
        if (has_samples(rec, cp.v_pf_min, 0.3)) {
            PooleFrenkelFitOptions o;
            o.v_min = cp.v_pf_min;
            o.v_max = 0.3;
            const PooleFrenkelFit f = fit_poole_frenkel(rec, o);
            rows.push_back({tag + ".pf.phi_b", f.phi_b, "eV"});
            rows.push_back({tag + ".pf.beta", f.beta, "eV/V^0.5"});
            // For sweeps from the anchored forward model phi_b carries the
            // extra beta*sqrt(v_pf_min); this is the activation it implies.
            rows.push_back({tag + ".pf.phi_b_minus_anchor", f.phi_b - f.beta * std::sqrt(cp.v_pf_min), "eV"});
            rows.push_back({tag + ".pf.ln_prefactor", f.ln_prefactor, "ln(A/(um^2 V))"});
            rows.push_back({tag + ".pf.arrhenius_r2", f.arrhenius_r2, "1"});
            rows.push_back({tag + ".pf.min_r2", f.min_r2, "1"});
            fitted = true;
        }
        if (!fitted)
            throw FitError(path.string() + " has no samples in the Ohmic or PF windows");
    }

    if (in.trace) {
        const auto trace = read_trace_csv(*in.trace);
        const TraceSegments seg = split_trace(trace);
        auto add = [&](const std::vector<double>& g, const char* name) {
            if (g.size() < 5)
                return;
            const UpdateFit f = fit_update_curve(g);
            const std::string tag = std::string("trace.") + name;
            rows.push_back({tag + ".nu", f.nu, "1"});
            rows.push_back({tag + ".sigma0", f.sigma0, "1"});
            rows.push_back({tag + ".rms", f.rms, "1"});
            rows.push_back({tag + ".monotone", f.monotone ? 1.0 : 0.0, "flag"});
        };
        add(seg.potentiation, "pot");
        add(seg.depression, "dep");
        if (seg.potentiation.size() < 5 && seg.depression.size() < 5)
            throw FitError("trace has no segment with at least 5 points");
    }

    CsvWriter w(out_dir / "fit_report.csv", "quantity,value,unit");
    for (const auto& r : rows)
        w.row(r.quantity, r.value, r.unit);
    return rows;
}

XbarReport cmd_xbar(const SimConfig& cfg, const fs::path& out_dir)
{
    const DeviceParams& p = cfg.device;
    const CrossbarConfig& xc = cfg.crossbar;
    Rng rng(derive_seed(cfg.seed, SeedStream::Workload, 0));
    std::uniform_int_distribution<int> row_d(0, xc.rows - 1), col_d(0, xc.cols - 1), dir_d(0, 1);
    std::uniform_real_distribution<double> target_d(p.g_hrs(), p.g_lrs());
    XbarReport rep;

    // Half-select workload.
    Crossbar xb(xc.rows, xc.cols, p, cfg.variability, derive_seed(cfg.seed, SeedStream::Workload, 1));
    for (int k = 0; k < xc.random_writes; ++k) {
        const Direction d = dir_d(rng) ? Direction::Potentiate : Direction::Depress;
        const int r = row_d(rng);
        const int c = col_d(rng);
        rep.disturbed_cells += write_cell(xb, r, c, xc.bias.pulse(d)).disturbed;
        ++rep.random_writes;
    }

    Matrix target(xc.rows, xc.cols);
    for (auto& t : target.data)
        t = target_d(rng);

    Crossbar open(xc.rows, xc.cols, p, cfg.variability, derive_seed(cfg.seed, SeedStream::Workload, 2));
    program_open_loop(open, target, xc.bias);
    double err = 0.0;
    for (int r = 0; r < xc.rows; ++r)
        for (int c = 0; c < xc.cols; ++c)
            err += std::abs(open.cell(r, c).conductance() - target(r, c));
    rep.open_loop_mean_abs_error = err / static_cast<double>(target.data.size()) / (p.g_lrs() - p.g_hrs());

    Crossbar verified(xc.rows, xc.cols, p, cfg.variability, derive_seed(cfg.seed, SeedStream::Workload, 3));
    const WriteVerifyReport wv =
        program_write_verify(verified, target, xc.bias, xc.verify_tol, xc.verify_max_iters);
    rep.write_verify_convergence = wv.convergence_fraction();
    rep.write_verify_max_iterations = wv.max_iterations_used;
    rep.write_verify_pulses = wv.pulses;

    std::uniform_real_distribution<double> in_d(0.0, p.conduction.v_ohmic_max);
    std::vector<double> x(static_cast<std::size_t>(xc.rows));
    for (auto& v : x)
        v = in_d(rng);
    rep.column_currents = read_vmm(verified, x, p.conduction.t_ref);

    constexpr double kSneakRead = 0.5;
    rep.sneak_ratio_programmed = sneak_ratio(verified, 0, 0, kSneakRead, p.conduction.t_ref);
    Crossbar lrs(xc.rows, xc.cols, p, VariabilityParams::none(), 0);
    for (int r = 0; r < xc.rows; ++r)
        for (int c = 0; c < xc.cols; ++c)
            lrs.cell(r, c).w = 1.0;
    rep.sneak_ratio_all_lrs = sneak_ratio(lrs, 0, 0, kSneakRead, p.conduction.t_ref);

    CsvWriter w(out_dir / "xbar_report.csv", "metric,value");
    w.row("rows", xc.rows);
    w.row("cols", xc.cols);
    w.row("random_writes", rep.random_writes);
    w.row("disturbed_cells", rep.disturbed_cells);
    w.row("open_loop_mean_abs_error_frac_span", rep.open_loop_mean_abs_error);
    w.row("write_verify_convergence", rep.write_verify_convergence);
    w.row("write_verify_max_iterations", rep.write_verify_max_iterations);
    w.row("write_verify_pulses", rep.write_verify_pulses);
    w.row("sneak_ratio_programmed_0.5V", rep.sneak_ratio_programmed);
    w.row("sneak_ratio_all_lrs_0.5V", rep.sneak_ratio_all_lrs);

    CsvWriter rd(out_dir / "xbar_read.csv", "col,current_A");
    for (std::size_t c = 0; c < rep.column_currents.size(); ++c)
        rd.row(c, rep.column_currents[c]);
    write_snapshot_csv(out_dir / "xbar_state.csv", verified);
    return rep;
}

InferResult cmd_infer(const SimConfig& cfg, const std::optional<fs::path>& dataset,
                      const fs::path& out_dir)
{
    const Dataset data = dataset ? read_dataset_csv(*dataset) : make_toy_dataset();
    MlpSpec spec;
    spec.sizes.push_back(data.n_features);
    for (int h : cfg.inference.hidden)
        spec.sizes.push_back(h);
    spec.sizes.push_back(data.n_classes);
    const Mlp baseline = train_mlp(spec, data, cfg.inference.training);

    AnalogOptions opt;
    opt.method = cfg.inference.method;
    opt.v_read = cfg.inference.v_read;
    opt.verify_tol = cfg.crossbar.verify_tol;
    opt.verify_max_iters = cfg.crossbar.verify_max_iters;
    opt.bias = cfg.crossbar.bias;

    InferResult res;
    res.per_seed = monte_carlo_evaluate(baseline, data, cfg.device, cfg.variability, cfg.seed,
                                        cfg.inference.seeds, opt);
    for (const auto& r : res.per_seed)
        res.mean_degradation += r.degradation;
    res.mean_degradation /= static_cast<double>(res.per_seed.size());

    CsvWriter w(out_dir / "infer_report.csv", "seed,baseline_accuracy,analog_accuracy,degradation");
    CsvWriter pc(out_dir / "infer_per_class.csv", "seed,class,baseline_accuracy,analog_accuracy");
    for (std::size_t s = 0; s < res.per_seed.size(); ++s) {
        const auto& r = res.per_seed[s];
        w.row(s, r.baseline_accuracy, r.analog_accuracy, r.degradation);
        for (std::size_t k = 0; k < r.per_class_analog.size(); ++k)
            pc.row(s, k, r.per_class_baseline[k], r.per_class_analog[k]);
    }
    return res;
}

std::vector<BenchRow> cmd_bench(const SimConfig& cfg, const fs::path& out_dir)
{
    const DeviceParams& p = cfg.device;
    const ConductionParams& cp = p.conduction;
    const double t = cp.t_ref;
    const DeviceState lrs = lrs_state(p);
    const DeviceState hrs = hrs_state(p);
    std::vector<BenchRow> rows;
    auto add = [&](std::string m, std::string v, std::string u) {
        rows.push_back({std::move(m), std::move(v), std::move(u)});
    };

    const double r_on = read_resistance(lrs, 0.1, t, p);
    add("RON at 0.1 V", format_number(r_on), "Ohm");
    add("ON/OFF at 0.1 V", format_number(read_resistance(hrs, 0.1, t, p) / r_on), "1");

    const Trace amp = run_sequence(hrs, Scheme::AmplitudeRamp, p.n_levels, p.n_levels, p);
    double g_min = amp.points.front().conductance, g_max = g_min;
    for (const auto& pt : amp.points) {
        g_min = std::min(g_min, pt.conductance);
        g_max = std::max(g_max, pt.conductance);
    }
    add("ON/OFF of pulse staircase", format_number(g_max / g_min), "1");

    const TraceSegments seg = split_trace(amp.points);
    const UpdateFit fp = fit_update_curve(seg.potentiation);
    const UpdateFit fd = fit_update_curve(seg.depression);
    add("Non-linearity (amplitude ramp)", fixed(fp.nu, 1) + "/-" + fixed(fd.nu, 1), "nu_p/nu_d");
    const Trace wid = run_sequence(hrs, Scheme::WidthRamp, p.n_levels, p.n_levels, p);
    const TraceSegments wseg = split_trace(wid.points);
    add("Non-linearity (width ramp)",
        fixed(fit_update_curve(wseg.potentiation).nu, 1) + "/-" +
            fixed(fit_update_curve(wseg.depression).nu, 1),
        "nu_p/nu_d");

    const double width_us = p.t_width_ref * 1e6;
    add("Depression", fixed(p.v_reset_full, 1) + "V/ " + format_number(width_us) + " us", "");
    add("Potentiation", fixed(p.v_set_full, 1) + "V/ " + format_number(width_us) + " us", "");
    add("Write energy, depression from HRS",
        format_number(write_energy(hrs, {p.v_reset_full, p.t_width_ref})), "J");
    add("Write energy, potentiation at LRS",
        format_number(write_energy(lrs, {p.v_set_full, p.t_width_ref})), "J");

    // Empirical variability from the configured laws.
    constexpr int kDraws = 10000;
    {
        Rng rng(derive_seed(cfg.seed, SeedStream::CycleToCycle, 1));
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < kDraws; ++i) {
            const double e = perturb_step(1.0, cfg.variability, rng) - 1.0;
            s1 += e;
            s2 += e * e;
        }
        const double m = s1 / kDraws;
        add("Cycle-to-cycle var.", format_number(std::sqrt(s2 / kDraws - m * m)), "rel. std");
    }
    {
        const auto pop = sample_population(kDraws, p, cfg.variability,
                                           derive_seed(cfg.seed, SeedStream::DeviceToDevice, 0));
        double s1 = 0.0, s2 = 0.0;
        for (const auto& d : pop) {
            const double l = std::log(d.g_hrs_dev);
            s1 += l;
            s2 += l * l;
        }
        const double m = s1 / kDraws;
        add("Device-to-device sigma (ln G, HRS)", format_number(std::sqrt(s2 / kDraws - m * m)), "1");
    }

    add("Area", format_number(p.area), "um^2");
    add("I(0.5 V)/I(0.25 V)", format_number(nonlinearity_ratio(0.5, t, cp)), "1");
    const auto loop = hysteresis_loop(p, -2.0, 3.0, 501);
    add("Memory window (DC loop)", format_number(extract_window(loop).window), "V");
    add("Coercive field at potentiation write", format_number(p.field_mv_per_cm(p.v_set_full)), "MV/cm");
    const DeviceParams small = scale_area(p, 1.0);
    add("LRS read current at 1 um^2, 0.1 V",
        format_number(current(0.1, lrs_state(small).conductance(), t, cp)), "A");

    CsvWriter w(out_dir / "bench.csv", "metric,value,unit");
    for (const auto& r : rows)
        w.row(r.metric, r.value, r.unit);
    return rows;
}

}  // namespace fenvm
