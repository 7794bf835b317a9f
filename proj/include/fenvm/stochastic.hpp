#ifndef FENVM_STOCHASTIC_HPP
#define FENVM_STOCHASTIC_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "fenvm/device.hpp"

namespace fenvm {

using Rng = std::mt19937_64;

struct VariabilityParams {
    double sigma_c2c = 0.10;      // relative std of one update step
    double sigma_d2d_hrs = 0.10;  // std of ln(g_hrs) across devices
    double sigma_d2d_lrs = 0.10;  // std of ln(g_lrs) across devices
    double drift_per_decade = 0.0;
    std::uint64_t seed = 20210601;

    /// All spreads and drift switched off.
    static VariabilityParams none();
    void validate() const;
};

/// Stream tags for derive_seed().
enum class SeedStream : std::uint64_t {
    DeviceToDevice = 1,
    CycleToCycle = 2,
    Workload = 3,
    Dataset = 4,
    Training = 5,
};

/// Sub-seed splitting rule: splitmix64 of
/// master + golden * (stream << 32 | index) + golden. Independent of any
/// parallel schedule since it depends only on (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index);

/// Normal(0, sigma) rejected outside +-bound*sigma.
double truncated_normal(Rng& rng, double sigma, double bound = 3.0);

/// delta_w (1 + eps), eps ~ N(0, sigma_c2c) truncated at +-3 sigma.
double perturb_step(double delta_w, const VariabilityParams& vp, Rng& rng);

/// Owns an RNG stream and perturbs update steps; hook() adapts it to the
/// device StepNoise callback without copying the stream.
class CycleNoise {
public:
    CycleNoise(double sigma_c2c, std::uint64_t seed);

    double operator()(double delta_w);
    StepNoise hook();
    double sigma() const { return sigma_; }

private:
    VariabilityParams vp_;
    double sigma_;
    Rng rng_;
};

/// n devices at HRS with lognormal endpoint spread. Device i draws from its
/// own sub-seed derive_seed(seed, DeviceToDevice, i). If a draw inverts the
/// endpoints they are swapped; the number of swaps goes to *reordered.
std::vector<DeviceState> sample_population(std::size_t n, const DeviceParams& p,
                                           const VariabilityParams& vp, std::uint64_t seed,
                                           std::size_t* reordered = nullptr);

/// Conductance scaled by 1 - drift * log10(elapsed / 1 s), clamped to the
/// endpoints. Identity for zero drift or elapsed <= 1 s.
DeviceState apply_retention(const DeviceState& s, double elapsed_s, const VariabilityParams& vp);

}  // namespace fenvm

#endif  // FENVM_STOCHASTIC_HPP
