#include "fenvm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace fenvm {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    void get(const char* key, double& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number())
                throw ConfigError(where(key), "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out))
                throw ConfigError(where(key), "must be finite");
        }
    }

    void get(const char* key, int& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_integer())
                throw ConfigError(where(key), "expected an integer");
            out = v->get<int>();
        }
    }

    void get(const char* key, std::uint64_t& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
                throw ConfigError(where(key), "expected a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void get(const char* key, std::string& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_string())
                throw ConfigError(where(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void get(const char* key, std::vector<int>& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_array())
                throw ConfigError(where(key), "expected an array of integers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number_integer())
                    throw ConfigError(where(key), "expected an array of integers");
                out.push_back(e.get<int>());
            }
        }
    }

    template <typename Fn>
    void nested(const char* key, Fn&& fn)
    {
        if (const json* v = take(key)) {
            Section s(*v, where(key));
            fn(s);
            s.finish();
        }
    }

    void finish() const
    {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k))
                throw ConfigError(where(k.c_str()), "unknown key");
    }

    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* take(const char* key)
    {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& key, Fn&& fn)
{
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, e.what());
    }
}

}  // namespace

void SimConfig::validate() const
{
    if (schema_version != kConfigSchemaVersion)
        throw ConfigError("schema_version", "unsupported version " + std::to_string(schema_version));
    checked("device", [&] { device.validate(); });
    checked("variability", [&] { variability.validate(); });
    checked("crossbar", [&] { crossbar.bias.validate(device); });
    if (crossbar.rows < 1 || crossbar.cols < 1)
        throw ConfigError("crossbar.rows", "dimensions must be >= 1");
    if (!(crossbar.verify_tol > 0.0))
        throw ConfigError("crossbar.verify_tol", "must be > 0");
    if (crossbar.verify_max_iters < 0)
        throw ConfigError("crossbar.verify_max_iters", "must be >= 0");
    if (crossbar.random_writes < 0)
        throw ConfigError("crossbar.random_writes", "must be >= 0");
    for (int h : inference.hidden)
        if (h < 1)
            throw ConfigError("inference.hidden", "layer sizes must be >= 1");
    if (!(inference.v_read > 0.0) || inference.v_read > device.conduction.v_ohmic_max)
        throw ConfigError("inference.v_read", "must lie in (0, v_ohmic_max] for linear compute");
    if (inference.seeds < 1)
        throw ConfigError("inference.seeds", "must be >= 1");
    if (inference.training.epochs < 0 || inference.training.batch < 1)
        throw ConfigError("inference.epochs", "need epochs >= 0 and batch >= 1");
}

SimConfig parse_config(const json& doc)
{
    SimConfig cfg;
    Section root(doc, "");
    root.get("schema_version", cfg.schema_version);
    if (cfg.schema_version != kConfigSchemaVersion)
        throw ConfigError("schema_version",
                          "unsupported version " + std::to_string(cfg.schema_version));

    std::string scheme = std::string(to_string(cfg.scheme));
    root.get("scheme", scheme);
    checked("scheme", [&] { cfg.scheme = parse_scheme(scheme); });
    root.get("seed", cfg.seed);
    root.get("output_dir", cfg.output_dir);

    DeviceParams& d = cfg.device;
    root.nested("conduction", [&](Section& s) {
        ConductionParams& c = d.conduction;
        s.get("g_lrs_ref", c.g_lrs_ref);
        s.get("on_off", c.on_off);
        s.get("area_ref", c.area_ref);
        s.get("e_a", c.e_a);
        s.get("beta", c.beta);
        s.get("v_ohmic_max", c.v_ohmic_max);
        s.get("v_pf_min", c.v_pf_min);
        s.get("v_clamp", c.v_clamp);
        s.get("t_ref", c.t_ref);
    });
    root.nested("device", [&](Section& s) {
        s.get("area", d.area);
        s.get("n_levels", d.n_levels);
        s.nested("amplitude_ramp", [&](Section& u) {
            u.get("nu_p", d.amplitude_ramp.nu_p);
            u.get("nu_d", d.amplitude_ramp.nu_d);
        });
        s.nested("width_ramp", [&](Section& u) {
            u.get("nu_p", d.width_ramp.nu_p);
            u.get("nu_d", d.width_ramp.nu_d);
        });
        s.get("v_set_full", d.v_set_full);
        s.get("v_reset_full", d.v_reset_full);
        s.get("v_c_set", d.v_c_set);
        const bool explicit_reset = s.has("v_c_reset");
        s.get("v_c_reset", d.v_c_reset);
        if (s.has("memory_window")) {
            double window = 0.0;
            s.get("memory_window", window);
            if (explicit_reset) {
                if (std::abs(d.v_c_reset - d.v_c_set - window) > 1e-9)
                    throw ConfigError(s.where("memory_window"),
                                      "inconsistent with v_c_reset - v_c_set");
            } else {
                d.v_c_reset = d.v_c_set + window;
            }
        }
        s.get("v_pulse_threshold", d.v_pulse_threshold);
        s.get("t_width_ref", d.t_width_ref);
        s.get("hzo_thickness_nm", d.hzo_thickness_nm);
    });
    root.nested("variability", [&](Section& s) {
        s.get("sigma_c2c", cfg.variability.sigma_c2c);
        s.get("sigma_d2d_hrs", cfg.variability.sigma_d2d_hrs);
        s.get("sigma_d2d_lrs", cfg.variability.sigma_d2d_lrs);
        s.get("drift_per_decade", cfg.variability.drift_per_decade);
    });
    root.nested("crossbar", [&](Section& s) {
        s.get("rows", cfg.crossbar.rows);
        s.get("cols", cfg.crossbar.cols);
        s.get("v_write_pot", cfg.crossbar.bias.v_write_pot);
        s.get("v_write_dep", cfg.crossbar.bias.v_write_dep);
        s.get("width", cfg.crossbar.bias.width);
        s.get("v_read", cfg.crossbar.bias.v_read);
        s.get("verify_tol", cfg.crossbar.verify_tol);
        s.get("verify_max_iters", cfg.crossbar.verify_max_iters);
        s.get("random_writes", cfg.crossbar.random_writes);
    });
    root.nested("inference", [&](Section& s) {
        s.get("hidden", cfg.inference.hidden);
        std::string method = std::string(to_string(cfg.inference.method));
        s.get("method", method);
        checked(s.where("method"), [&] { cfg.inference.method = parse_program_method(method); });
        s.get("v_read", cfg.inference.v_read);
        s.get("seeds", cfg.inference.seeds);
        s.get("epochs", cfg.inference.training.epochs);
        s.get("batch", cfg.inference.training.batch);
        s.get("learning_rate", cfg.inference.training.learning_rate);
        s.get("momentum", cfg.inference.training.momentum);
        s.get("train_seed", cfg.inference.training.seed);
    });
    root.finish();

    cfg.crossbar.bias.scheme = cfg.scheme;
    cfg.variability.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("--config", "cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const SimConfig& cfg)
{
    const DeviceParams& d = cfg.device;
    const ConductionParams& c = d.conduction;
    json j;
    j["schema_version"] = cfg.schema_version;
    j["scheme"] = std::string(to_string(cfg.scheme));
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["conduction"] = {{"g_lrs_ref", c.g_lrs_ref}, {"on_off", c.on_off},
                       {"area_ref", c.area_ref},   {"e_a", c.e_a},
                       {"beta", c.beta},           {"v_ohmic_max", c.v_ohmic_max},
                       {"v_pf_min", c.v_pf_min},   {"v_clamp", c.v_clamp},
                       {"t_ref", c.t_ref}};
    j["device"] = {{"area", d.area},
                   {"n_levels", d.n_levels},
                   {"amplitude_ramp", {{"nu_p", d.amplitude_ramp.nu_p}, {"nu_d", d.amplitude_ramp.nu_d}}},
                   {"width_ramp", {{"nu_p", d.width_ramp.nu_p}, {"nu_d", d.width_ramp.nu_d}}},
                   {"v_set_full", d.v_set_full},
                   {"v_reset_full", d.v_reset_full},
                   {"v_c_set", d.v_c_set},
                   {"v_c_reset", d.v_c_reset},
                   {"v_pulse_threshold", d.v_pulse_threshold},
                   {"t_width_ref", d.t_width_ref},
                   {"hzo_thickness_nm", d.hzo_thickness_nm}};
    j["variability"] = {{"sigma_c2c", cfg.variability.sigma_c2c},
                        {"sigma_d2d_hrs", cfg.variability.sigma_d2d_hrs},
                        {"sigma_d2d_lrs", cfg.variability.sigma_d2d_lrs},
                        {"drift_per_decade", cfg.variability.drift_per_decade}};
    j["crossbar"] = {{"rows", cfg.crossbar.rows},
                     {"cols", cfg.crossbar.cols},
                     {"v_write_pot", cfg.crossbar.bias.v_write_pot},
                     {"v_write_dep", cfg.crossbar.bias.v_write_dep},
                     {"width", cfg.crossbar.bias.width},
                     {"v_read", cfg.crossbar.bias.v_read},
                     {"verify_tol", cfg.crossbar.verify_tol},
                     {"verify_max_iters", cfg.crossbar.verify_max_iters},
                     {"random_writes", cfg.crossbar.random_writes}};
    j["inference"] = {{"hidden", cfg.inference.hidden},
                      {"method", std::string(to_string(cfg.inference.method))},
                      {"v_read", cfg.inference.v_read},
                      {"seeds", cfg.inference.seeds},
                      {"epochs", cfg.inference.training.epochs},
                      {"batch", cfg.inference.training.batch},
                      {"learning_rate", cfg.inference.training.learning_rate},
                      {"momentum", cfg.inference.training.momentum},
                      {"train_seed", cfg.inference.training.seed}};
    return j;
}

}  // namespace fenvm
