#ifndef FENVM_INFERENCE_HPP
#define FENVM_INFERENCE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "fenvm/crossbar.hpp"

namespace fenvm {

struct Dataset {
    int n_features = 0;
    int n_classes = 0;
    std::vector<std::vector<double>> x;
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
};

inline constexpr std::uint64_t kToyDatasetSeed = 0x5EEDB10B5ULL;

/// Gaussian blobs: 4 classes, 16 features, 512 samples (128 per class),
/// unit-variance class centers with within-class std 1.5.
Dataset make_toy_dataset(std::uint64_t seed = kToyDatasetSeed);

/// Fully connected layer, y = W x + b with W of shape out x in.
struct DenseLayer {
    Matrix weight;
    std::vector<double> bias;
};

/// Layer sizes from input to output; rectifier between layers, argmax
/// readout.
struct MlpSpec {
    std::vector<int> sizes;
};

struct Mlp {
    std::vector<DenseLayer> layers;
};

struct TrainOptions {
    int epochs = 60;
    int batch = 32;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::uint64_t seed = 7;
};

/// Float reference training (softmax cross-entropy, minibatch SGD).
Mlp train_mlp(const MlpSpec& spec, const Dataset& data, const TrainOptions& opt = {});

std::vector<double> float_forward(const Mlp& net, std::span<const double> x);

int argmax(std::span<const double> scores);

/// Differential-pair mapping. scale is siemens per unit weight.
struct WeightMapping {
    double scale = 0.0;
    double g_hrs = 0.0;
    double g_lrs = 0.0;
    double v_read = 0.1;
};

/// Crossbar-oriented targets: rows are inputs, columns outputs.
struct MappedWeights {
    Matrix g_plus;
    Matrix g_minus;
    WeightMapping mapping;
};

/// W (out x in) to conductance pairs. Positive weights raise G+ above
/// g_hrs, negative weights raise G-, the partner stays at g_hrs.
MappedWeights map_weights(const Matrix& w, const DeviceParams& p, double v_read);

/// Inverse of map_weights given (possibly programmed) conductances.
Matrix unmap_weights(const Matrix& g_plus, const Matrix& g_minus, const WeightMapping& m);

enum class ProgramMethod { Exact, OpenLoop, WriteVerify };

ProgramMethod parse_program_method(std::string_view name);
std::string_view to_string(ProgramMethod m);

struct AnalogOptions {
    ProgramMethod method = ProgramMethod::OpenLoop;
    double v_read = 0.1;
    double verify_tol = 0.05;
    int verify_max_iters = 100;
    BiasScheme bias;
};

/// One layer on a single array of in rows and 2*out columns; column 2j holds
/// G+ of output j and column 2j+1 its G- partner. Bias is added digitally.
struct AnalogLayer {
    Crossbar array;
    WeightMapping mapping;
    std::vector<double> bias;
};

struct AnalogNetwork {
    std::vector<AnalogLayer> layers;
    double temperature = 300.0;
};

AnalogNetwork program_network(const Mlp& net, const DeviceParams& p, const VariabilityParams& vp,
                              std::uint64_t seed, const AnalogOptions& opt);

/// Each layer rescales its input so the largest |a_i| maps to v_read, reads
/// the array, and undoes the scaling digitally.
std::vector<double> forward(const AnalogNetwork& net, std::span<const double> x);

struct AccuracyReport {
    double analog_accuracy = 0.0;    // percent
    double baseline_accuracy = 0.0;  // percent
    double degradation = 0.0;        // baseline - analog, points
    std::vector<double> per_class_analog;
    std::vector<double> per_class_baseline;
};

AccuracyReport evaluate(const AnalogNetwork& net, const Dataset& data, const Mlp& baseline);

/// Baseline against itself; degradation is zero by construction.
AccuracyReport evaluate_baseline(const Mlp& baseline, const Dataset& data);

/// Programs and evaluates one replica per seed index; replicas run
/// concurrently, results come back in seed order.
std::vector<AccuracyReport> monte_carlo_evaluate(const Mlp& baseline, const Dataset& data,
                                                 const DeviceParams& p,
                                                 const VariabilityParams& vp,
                                                 std::uint64_t master_seed, int n_seeds,
                                                 const AnalogOptions& opt);

}  // namespace fenvm

#endif  // FENVM_INFERENCE_HPP
