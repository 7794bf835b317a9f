#include "fenvm/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace fenvm {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

VariabilityParams VariabilityParams::none()
{
    VariabilityParams vp;
    vp.sigma_c2c = 0.0;
    vp.sigma_d2d_hrs = 0.0;
    vp.sigma_d2d_lrs = 0.0;
    vp.drift_per_decade = 0.0;
    return vp;
}

void VariabilityParams::validate() const
{
    for (double s : {sigma_c2c, sigma_d2d_hrs, sigma_d2d_lrs, drift_per_decade})
        if (!std::isfinite(s))
            throw std::invalid_argument("variability parameters must be finite");
    if (sigma_c2c < 0.0 || sigma_d2d_hrs < 0.0 || sigma_d2d_lrs < 0.0)
        throw std::invalid_argument("variability sigmas must be >= 0");
    if (drift_per_decade < 0.0)
        throw std::invalid_argument("drift_per_decade must be >= 0");
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index)
{
    const std::uint64_t key = (static_cast<std::uint64_t>(stream) << 32) | (index & 0xFFFFFFFFULL);
    return splitmix64(master + kGolden * key + kGolden);
}

double truncated_normal(Rng& rng, double sigma, double bound)
{
    if (sigma == 0.0)
        return 0.0;
    std::normal_distribution<double> nd(0.0, sigma);
    for (;;) {
        const double e = nd(rng);
        if (std::abs(e) <= bound * sigma)
            return e;
    }
}

double perturb_step(double delta_w, const VariabilityParams& vp, Rng& rng)
{
    if (vp.sigma_c2c == 0.0)
        return delta_w;
    return delta_w * (1.0 + truncated_normal(rng, vp.sigma_c2c));
}

CycleNoise::CycleNoise(double sigma_c2c, std::uint64_t seed)
    : vp_(VariabilityParams::none()), sigma_(sigma_c2c), rng_(seed)
{
    vp_.sigma_c2c = sigma_c2c;
    vp_.validate();
}

double CycleNoise::operator()(double delta_w)
{
    return perturb_step(delta_w, vp_, rng_);
}

StepNoise CycleNoise::hook()
{
    return [this](double dw) { return (*this)(dw); };
}

std::vector<DeviceState> sample_population(std::size_t n, const DeviceParams& p,
                                           const VariabilityParams& vp, std::uint64_t seed,
                                           std::size_t* reordered)
{
    vp.validate();
    std::vector<DeviceState> out;
    out.reserve(n);
    std::size_t swaps = 0;
    const double g_hrs = p.g_hrs();
    const double g_lrs = p.g_lrs();
    for (std::size_t i = 0; i < n; ++i) {
        DeviceState s{0.0, g_hrs, g_lrs};
        if (vp.sigma_d2d_hrs > 0.0 || vp.sigma_d2d_lrs > 0.0) {
            Rng rng(derive_seed(seed, SeedStream::DeviceToDevice, i));
            std::normal_distribution<double> nd(0.0, 1.0);
            s.g_hrs_dev = g_hrs * std::exp(vp.sigma_d2d_hrs * nd(rng));
            s.g_lrs_dev = g_lrs * std::exp(vp.sigma_d2d_lrs * nd(rng));
            if (s.g_hrs_dev > s.g_lrs_dev) {
                std::swap(s.g_hrs_dev, s.g_lrs_dev);
                ++swaps;
            }
        }
        out.push_back(s);
    }
    if (reordered)
        *reordered = swaps;
    return out;
}

DeviceState apply_retention(const DeviceState& s, double elapsed_s, const VariabilityParams& vp)
{
    if (!std::isfinite(elapsed_s) || elapsed_s < 0.0)
        throw std::invalid_argument("elapsed time must be finite and >= 0");
    if (vp.drift_per_decade == 0.0 || elapsed_s <= 1.0)
        return s;
    const double g = s.conductance() * (1.0 - vp.drift_per_decade * std::log10(elapsed_s));
    const double clamped = std::clamp(g, s.g_hrs_dev, s.g_lrs_dev);
    DeviceState out = s;
    out.w = (clamped - s.g_hrs_dev) / (s.g_lrs_dev - s.g_hrs_dev);
    return out;
}

}  // namespace fenvm
