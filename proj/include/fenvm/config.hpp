#ifndef FENVM_CONFIG_HPP
#define FENVM_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fenvm/crossbar.hpp"
#include "fenvm/device.hpp"
#include "fenvm/inference.hpp"
#include "fenvm/stochastic.hpp"

namespace fenvm {

inline constexpr int kConfigSchemaVersion = 1;

/// Validation failure; key is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& msg)
        : std::runtime_error(key + ": " + msg), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct CrossbarConfig {
    int rows = 64;
    int cols = 64;
    BiasScheme bias;
    double verify_tol = 0.05;
    int verify_max_iters = 100;
    int random_writes = 10000;
};

struct InferenceConfig {
    std::vector<int> hidden{16};
    ProgramMethod method = ProgramMethod::OpenLoop;
    double v_read = 0.1;
    int seeds = 10;
    TrainOptions training;
};

struct SimConfig {
    int schema_version = kConfigSchemaVersion;
    DeviceParams device;
    VariabilityParams variability;
    CrossbarConfig crossbar;
    InferenceConfig inference;
    Scheme scheme = Scheme::AmplitudeRamp;
    std::uint64_t seed = 20210601;
    std::string output_dir = "out";

    /// Cross-module invariants; throws ConfigError.
    void validate() const;
};

/// Parses a config document. Missing keys keep their defaults, unknown keys
/// are rejected. The result is validated.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig load_config(const std::string& path);
nlohmann::json to_json(const SimConfig& cfg);

}  // namespace fenvm

#endif  // FENVM_CONFIG_HPP
