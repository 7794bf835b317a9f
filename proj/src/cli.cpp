#include "fenvm/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "fenvm/commands.hpp"
#include "fenvm/io.hpp"

namespace fenvm {

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFit = 3;

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<double> temps;
};

SimConfig resolve(const GlobalOptions& g)
{
    SimConfig cfg = g.config.empty() ? SimConfig{} : load_config(g.config);
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.variability.seed = *g.seed;
    }
    if (!g.out.empty())
        cfg.output_dir = g.out;
    for (double t : g.temps)
        if (!(t > 0.0))
            throw ConfigError("--temps", "temperatures must be > 0 K");
    return cfg;
}

fs::path prepare_out(const SimConfig& cfg)
{
    fs::path out(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw IoError("cannot create output directory '" + out.string() + "': " + ec.message());
    return out;
}

}  // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Ferroelectric HZO synapse and crossbar simulator"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config, "JSON config file (defaults when omitted)");
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--temps", g.temps, "Temperatures in K, comma separated")->delimiter(',');

    IvOptions iv;
    auto* c_iv = app.add_subcommand("iv", "I(V) sweeps of LRS and HRS across temperatures");
    c_iv->add_option("--vmin-mv", iv.v_min_mv, "Lowest voltage in mV");
    c_iv->add_option("--vmax-mv", iv.v_max_mv, "Highest voltage in mV");
    c_iv->add_option("--step-mv", iv.step_mv, "Voltage step in mV");

    PulseOptions pulse;
    std::string scheme_name;
    auto* c_pulse = app.add_subcommand("pulse", "Potentiation then depression staircase");
    c_pulse->add_option("--scheme", scheme_name, "amplitude_ramp, width_ramp or single");
    c_pulse->add_option("--n-pot", pulse.n_pot, "Potentiation pulses (default n_levels)");
    c_pulse->add_option("--n-dep", pulse.n_dep, "Depression pulses (default n_levels)");
    c_pulse->add_flag("--noise", pulse.noise, "Apply cycle-to-cycle noise");

    std::vector<std::string> sweep_files;
    std::string trace_file;
    auto* c_fit = app.add_subcommand("fit", "Extract conduction and update-curve parameters");
    c_fit->add_option("sweeps", sweep_files, "Sweep CSV files");
    c_fit->add_option("--trace", trace_file, "Pulse trace CSV");

    auto* c_xbar = app.add_subcommand("xbar", "Crossbar programming, disturb and read workload");

    std::string dataset_file;
    std::optional<int> seeds;
    auto* c_infer = app.add_subcommand("infer", "Analog inference accuracy over seeds");
    c_infer->add_option("--dataset", dataset_file, "Dataset CSV (bundled toy set when omitted)");
    c_infer->add_option("--seeds", seeds, "Monte-Carlo replicas");

    auto* c_bench = app.add_subcommand("bench", "Benchmark summary from simulation");

    // All subcommands accept the global flags after the subcommand name too.
    for (auto* sub : app.get_subcommands({}))
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitOther;
    }

    try {
        SimConfig cfg = resolve(g);
        if (c_pulse->parsed() && !scheme_name.empty()) {
            try {
                cfg.scheme = parse_scheme(scheme_name);
            } catch (const std::invalid_argument& e) {
                throw ConfigError("--scheme", e.what());
            }
        }
        if (seeds) {
            if (*seeds < 1)
                throw ConfigError("--seeds", "must be >= 1");
            cfg.inference.seeds = *seeds;
        }
        const fs::path out = prepare_out(cfg);

        if (c_iv->parsed()) {
            if (!g.temps.empty())
                iv.temperatures = g.temps;
            if (iv.step_mv <= 0 || iv.v_max_mv < iv.v_min_mv)
                throw ConfigError("--step-mv", "need step > 0 and vmax >= vmin");
            cmd_iv(cfg, iv, out);
        } else if (c_pulse->parsed()) {
            pulse.scheme = cfg.scheme;
            cmd_pulse(cfg, pulse, out);
        } else if (c_fit->parsed()) {
            FitInputs in;
            for (const auto& f : sweep_files)
                in.sweeps.emplace_back(f);
            if (!trace_file.empty())
                in.trace = trace_file;
            for (const auto& r : cmd_fit(cfg, in, out))
                std::cout << r.quantity << " = " << format_number(r.value) << ' ' << r.unit << '\n';
        } else if (c_xbar->parsed()) {
            const XbarReport r = cmd_xbar(cfg, out);
            std::cout << "disturbed cells: " << r.disturbed_cells << '\n'
                      << "write-verify convergence: " << format_number(r.write_verify_convergence) << '\n'
                      << "sneak ratio (all LRS, 0.5 V): " << format_number(r.sneak_ratio_all_lrs) << '\n';
        } else if (c_infer->parsed()) {
            std::optional<fs::path> ds;
            if (!dataset_file.empty())
                ds = dataset_file;
            const InferResult r = cmd_infer(cfg, ds, out);
            std::cout << "mean degradation: " << format_number(r.mean_degradation) << " points\n";
        } else if (c_bench->parsed()) {
            for (const auto& r : cmd_bench(cfg, out))
                std::cout << r.metric << ": " << r.value << (r.unit.empty() ? "" : " ") << r.unit << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FitError& e) {
        std::cerr << "error: fit: " << e.what() << '\n';
        return kExitFit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return 0;
}

}  // namespace fenvm
