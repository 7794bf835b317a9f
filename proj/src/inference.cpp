#include "fenvm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace fenvm {

Dataset make_toy_dataset(std::uint64_t seed)
{
    constexpr int kClasses = 4;
    constexpr int kFeatures = 16;
    constexpr int kPerClass = 128;
    constexpr double kSpread = 1.5;

    Rng rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<std::vector<double>> centers(kClasses, std::vector<double>(kFeatures));
    for (auto& c : centers)
        for (auto& v : c)
            v = nd(rng);

    Dataset d;
    d.n_features = kFeatures;
    d.n_classes = kClasses;
    for (int i = 0; i < kPerClass; ++i) {
        for (int k = 0; k < kClasses; ++k) {
            std::vector<double> x(kFeatures);
            for (int f = 0; f < kFeatures; ++f)
                x[static_cast<std::size_t>(f)] = centers[static_cast<std::size_t>(k)][static_cast<std::size_t>(f)] + kSpread * nd(rng);
            d.x.push_back(std::move(x));
            d.y.push_back(k);
        }
    }
    return d;
}

namespace {

std::vector<double> dense(const DenseLayer& l, std::span<const double> x)
{
    std::vector<double> y(l.bias);
    for (int o = 0; o < l.weight.rows; ++o) {
        double s = 0.0;
        for (int i = 0; i < l.weight.cols; ++i)
            s += l.weight(o, i) * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] += s;
    }
    return y;
}

void relu(std::vector<double>& v)
{
    for (auto& x : v)
        x = std::max(0.0, x);
}

}  // namespace

std::vector<double> float_forward(const Mlp& net, std::span<const double> x)
{
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        a = dense(net.layers[l], a);
        if (l + 1 < net.layers.size())
            relu(a);
    }
    return a;
}

int argmax(std::span<const double> scores)
{
    if (scores.empty())
        throw std::invalid_argument("argmax of empty scores");
    return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

Mlp train_mlp(const MlpSpec& spec, const Dataset& data, const TrainOptions& opt)
{
    if (spec.sizes.size() < 2)
        throw std::invalid_argument("MLP needs at least one layer");
    if (spec.sizes.front() != data.n_features || spec.sizes.back() != data.n_classes)
        throw std::invalid_argument("MLP input/output sizes do not match the dataset");
    if (data.size() == 0)
        throw std::invalid_argument("cannot train on an empty dataset");

    Rng rng(opt.seed);
    Mlp net;
    for (std::size_t l = 0; l + 1 < spec.sizes.size(); ++l) {
        const int in = spec.sizes[l];
        const int out = spec.sizes[l + 1];
        DenseLayer layer{Matrix(out, in), std::vector<double>(static_cast<std::size_t>(out), 0.0)};
        std::normal_distribution<double> init(0.0, std::sqrt(2.0 / in));
        for (auto& w : layer.weight.data)
            w = init(rng);
        net.layers.push_back(std::move(layer));
    }

    const std::size_t n_layers = net.layers.size();
    std::vector<Matrix> vel_w;
    std::vector<std::vector<double>> vel_b;
    for (const auto& l : net.layers) {
        vel_w.emplace_back(l.weight.rows, l.weight.cols);
        vel_b.emplace_back(l.bias.size(), 0.0);
    }

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
            std::vector<Matrix> grad_w;
            std::vector<std::vector<double>> grad_b;
            for (const auto& l : net.layers) {
                grad_w.emplace_back(l.weight.rows, l.weight.cols);
                grad_b.emplace_back(l.bias.size(), 0.0);
            }
            for (std::size_t s = start; s < stop; ++s) {
                const auto& x = data.x[order[s]];
                // Forward, keeping activations.
                std::vector<std::vector<double>> acts{x};
                for (std::size_t l = 0; l < n_layers; ++l) {
                    auto z = dense(net.layers[l], acts.back());
                    if (l + 1 < n_layers)
                        relu(z);
                    acts.push_back(std::move(z));
                }
                // Softmax cross-entropy gradient.
                std::vector<double> delta = acts.back();
                const double mx = *std::max_element(delta.begin(), delta.end());
                double sum = 0.0;
                for (auto& v : delta) {
                    v = std::exp(v - mx);
                    sum += v;
                }
                for (auto& v : delta)
                    v /= sum;
                delta[static_cast<std::size_t>(data.y[order[s]])] -= 1.0;

                for (std::size_t l = n_layers; l-- > 0;) {
                    const auto& in = acts[l];
                    const Matrix& w = net.layers[l].weight;
                    for (int o = 0; o < w.rows; ++o) {
                        grad_b[l][static_cast<std::size_t>(o)] += delta[static_cast<std::size_t>(o)];
                        for (int i = 0; i < w.cols; ++i)
                            grad_w[l](o, i) += delta[static_cast<std::size_t>(o)] * in[static_cast<std::size_t>(i)];
                    }
                    if (l == 0)
                        break;
                    std::vector<double> prev(static_cast<std::size_t>(w.cols), 0.0);
                    for (int o = 0; o < w.rows; ++o)
                        for (int i = 0; i < w.cols; ++i)
                            prev[static_cast<std::size_t>(i)] += w(o, i) * delta[static_cast<std::size_t>(o)];
                    for (std::size_t i = 0; i < prev.size(); ++i)
                        if (in[i] <= 0.0)
                            prev[i] = 0.0;
                    delta = std::move(prev);
                }
            }
            const double scale = opt.learning_rate / static_cast<double>(stop - start);
            for (std::size_t l = 0; l < n_layers; ++l) {
                auto& layer = net.layers[l];
                for (std::size_t k = 0; k < layer.weight.data.size(); ++k) {
                    vel_w[l].data[k] = opt.momentum * vel_w[l].data[k] - scale * grad_w[l].data[k];
                    layer.weight.data[k] += vel_w[l].data[k];
                }
                for (std::size_t k = 0; k < layer.bias.size(); ++k) {
                    vel_b[l][k] = opt.momentum * vel_b[l][k] - scale * grad_b[l][k];
                    layer.bias[k] += vel_b[l][k];
                }
            }
        }
    }
    return net;
}

MappedWeights map_weights(const Matrix& w, const DeviceParams& p, double v_read)
{
    double wmax = 0.0;
    for (double x : w.data) {
        if (!std::isfinite(x))
            throw std::invalid_argument("map_weights: weights must be finite");
        wmax = std::max(wmax, std::abs(x));
    }
    MappedWeights m;
    m.mapping.g_hrs = p.g_hrs();
    m.mapping.g_lrs = p.g_lrs();
    m.mapping.v_read = v_read;
    const double span = m.mapping.g_lrs - m.mapping.g_hrs;
    // An all-zero matrix maps to HRS everywhere; any scale works.
    m.mapping.scale = wmax > 0.0 ? span / wmax : span;

    m.g_plus = Matrix(w.cols, w.rows, m.mapping.g_hrs);
    m.g_minus = Matrix(w.cols, w.rows, m.mapping.g_hrs);
    for (int o = 0; o < w.rows; ++o) {
        for (int i = 0; i < w.cols; ++i) {
            const double x = w(o, i);
            if (x > 0.0)
                m.g_plus(i, o) = x == wmax ? m.mapping.g_lrs : m.mapping.g_hrs + x * m.mapping.scale;
            else if (x < 0.0)
                m.g_minus(i, o) = -x == wmax ? m.mapping.g_lrs : m.mapping.g_hrs - x * m.mapping.scale;
        }
    }
    return m;
}

Matrix unmap_weights(const Matrix& g_plus, const Matrix& g_minus, const WeightMapping& m)
{
    if (g_plus.rows != g_minus.rows || g_plus.cols != g_minus.cols)
        throw std::invalid_argument("unmap_weights: pair shapes differ");
    Matrix w(g_plus.cols, g_plus.rows);
    for (int i = 0; i < g_plus.rows; ++i)
        for (int o = 0; o < g_plus.cols; ++o)
            w(o, i) = (g_plus(i, o) - g_minus(i, o)) / m.scale;
    return w;
}

ProgramMethod parse_program_method(std::string_view name)
{
    if (name == "exact")
        return ProgramMethod::Exact;
    if (name == "open_loop")
        return ProgramMethod::OpenLoop;
    if (name == "write_verify")
        return ProgramMethod::WriteVerify;
    throw std::invalid_argument("unknown programming method '" + std::string(name) + "'");
}

std::string_view to_string(ProgramMethod m)
{
    switch (m) {
    case ProgramMethod::Exact: return "exact";
    case ProgramMethod::OpenLoop: return "open_loop";
    case ProgramMethod::WriteVerify: return "write_verify";
    }
    return "?";
}

AnalogNetwork program_network(const Mlp& net, const DeviceParams& p, const VariabilityParams& vp,
                              std::uint64_t seed, const AnalogOptions& opt)
{
    if (!(opt.v_read > 0.0) || opt.v_read > 0.3)
        throw std::invalid_argument("inference v_read must lie in (0, 0.3] V");
    AnalogNetwork out;
    out.temperature = p.conduction.t_ref;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const DenseLayer& layer = net.layers[l];
        const MappedWeights mw = map_weights(layer.weight, p, opt.v_read);
        const int in = layer.weight.cols;
        const int n_out = layer.weight.rows;
        Matrix target(in, 2 * n_out);
        for (int i = 0; i < in; ++i) {
            for (int o = 0; o < n_out; ++o) {
                target(i, 2 * o) = mw.g_plus(i, o);
                target(i, 2 * o + 1) = mw.g_minus(i, o);
            }
        }
        Crossbar xb(in, 2 * n_out, p, vp, derive_seed(seed, SeedStream::Workload, l));
        switch (opt.method) {
        case ProgramMethod::Exact:
            program_exact(xb, target);
            break;
        case ProgramMethod::OpenLoop:
            program_open_loop(xb, target, opt.bias);
            break;
        case ProgramMethod::WriteVerify:
            erase(xb);
            program_write_verify(xb, target, opt.bias, opt.verify_tol, opt.verify_max_iters);
            break;
        }
        out.layers.push_back(AnalogLayer{std::move(xb), mw.mapping, layer.bias});
    }
    return out;
}

std::vector<double> forward(const AnalogNetwork& net, std::span<const double> x)
{
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const AnalogLayer& layer = net.layers[l];
        const double v_read = layer.mapping.v_read;
        double amax = 0.0;
        for (double v : a)
            amax = std::max(amax, std::abs(v));
        std::vector<double> y(layer.bias);
        if (amax > 0.0) {
            std::vector<double> volts(a.size());
            for (std::size_t i = 0; i < a.size(); ++i)
                volts[i] = a[i] / amax * v_read;
            const auto cur = read_vmm(layer.array, volts, net.temperature);
            const double k = amax / (layer.mapping.scale * v_read);
            for (std::size_t o = 0; o < y.size(); ++o)
                y[o] += (cur[2 * o] - cur[2 * o + 1]) * k;
        }
        if (l + 1 < net.layers.size())
            relu(y);
        a = std::move(y);
    }
    return a;
}

namespace {

template <typename Scorer>
void score_dataset(const Dataset& data, Scorer&& scorer, double& accuracy,
                   std::vector<double>& per_class)
{
    std::vector<double> hits(static_cast<std::size_t>(data.n_classes), 0.0);
    std::vector<double> totals(static_cast<std::size_t>(data.n_classes), 0.0);
    double correct = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const auto cls = static_cast<std::size_t>(data.y[s]);
        totals[cls] += 1.0;
        if (argmax(scorer(data.x[s])) == data.y[s]) {
            hits[cls] += 1.0;
            correct += 1.0;
        }
    }
    accuracy = 100.0 * correct / static_cast<double>(data.size());
    per_class.resize(hits.size());
    for (std::size_t k = 0; k < hits.size(); ++k)
        per_class[k] = totals[k] > 0.0 ? 100.0 * hits[k] / totals[k] : 0.0;
}

}  // namespace

AccuracyReport evaluate(const AnalogNetwork& net, const Dataset& data, const Mlp& baseline)
{
    AccuracyReport rep;
    score_dataset(data, [&](const std::vector<double>& x) { return forward(net, x); },
                  rep.analog_accuracy, rep.per_class_analog);
    score_dataset(data, [&](const std::vector<double>& x) { return float_forward(baseline, x); },
                  rep.baseline_accuracy, rep.per_class_baseline);
    rep.degradation = rep.baseline_accuracy - rep.analog_accuracy;
    return rep;
}

AccuracyReport evaluate_baseline(const Mlp& baseline, const Dataset& data)
{
    AccuracyReport rep;
    score_dataset(data, [&](const std::vector<double>& x) { return float_forward(baseline, x); },
                  rep.baseline_accuracy, rep.per_class_baseline);
    rep.analog_accuracy = rep.baseline_accuracy;
    rep.per_class_analog = rep.per_class_baseline;
    rep.degradation = rep.baseline_accuracy - rep.analog_accuracy;
    return rep;
}

std::vector<AccuracyReport> monte_carlo_evaluate(const Mlp& baseline, const Dataset& data,
                                                 const DeviceParams& p,
                                                 const VariabilityParams& vp,
                                                 std::uint64_t master_seed, int n_seeds,
                                                 const AnalogOptions& opt)
{
    if (n_seeds < 1)
        throw std::invalid_argument("need at least one seed");
    std::vector<std::future<AccuracyReport>> jobs;
    jobs.reserve(static_cast<std::size_t>(n_seeds));
    for (int s = 0; s < n_seeds; ++s) {
        const std::uint64_t seed = derive_seed(master_seed, SeedStream::Workload, 1000u + static_cast<std::uint64_t>(s));
        jobs.push_back(std::async(std::launch::async, [&, seed] {
            const AnalogNetwork net = program_network(baseline, p, vp, seed, opt);
            return evaluate(net, data, baseline);
        }));
    }
    std::vector<AccuracyReport> out;
    out.reserve(jobs.size());
    for (auto& j : jobs)
        out.push_back(j.get());
    return out;
}

}  // namespace fenvm
