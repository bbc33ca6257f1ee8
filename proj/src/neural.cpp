#include "xcsf/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace xcsf {

double selu(double z) {
    return z > 0.0 ? kSeluLambda * z : kSeluLambda * kSeluAlpha * std::expm1(z);
}

double selu_derivative(double z) {
    return z > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(z);
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

double activate(Activation a, double z) { return a == Activation::Selu ? selu(z) : logistic(z); }

// Four partial sums keep the dependency chain short.
double dot(const double* w, const double* x, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += w[i] * x[i];
        s1 += w[i + 1] * x[i + 1];
        s2 += w[i + 2] * x[i + 2];
        s3 += w[i + 3] * x[i + 3];
    }
    for (; i < n; ++i) s0 += w[i] * x[i];
    return (s0 + s1) + (s2 + s3);
}

void layer_forward(const Layer& l, const double* in, double* pre, double* out) {
    for (std::size_t j = 0; j < l.n_out; ++j) {
        const double z = l.biases[j] + dot(&l.weights[j * l.n_in], in, l.n_in);
        if (pre) pre[j] = z;
        out[j] = activate(l.activation, z);
    }
}

void check_input(const Network& net, std::span<const double> x) {
    if (net.layers.size() != 2) throw std::logic_error("network must have exactly two layers");
    if (x.size() != net.n_inputs())
        throw std::invalid_argument("input size " + std::to_string(x.size()) +
                                    " does not match network inputs " +
                                    std::to_string(net.n_inputs()));
}

// Local gradients dE/dz for both layers, given a completed forward trace.
void backprop_deltas(const Network& net, const ForwardTrace& tr, std::span<const double> target,
                     std::vector<double>& out_delta, std::vector<double>& hid_delta) {
    const Layer& hid = net.hidden();
    const Layer& out = net.output();
    out_delta.resize(out.n_out);
    for (std::size_t k = 0; k < out.n_out; ++k) {
        const double o = tr.output[k];
        out_delta[k] = (o - target[k]) * o * (1.0 - o);
    }
    hid_delta.assign(hid.n_out, 0.0);
    for (std::size_t k = 0; k < out.n_out; ++k) {
        const double d = out_delta[k];
        const double* w = &out.weights[k * out.n_in];
        for (std::size_t j = 0; j < out.n_in; ++j) hid_delta[j] += w[j] * d;
    }
    for (std::size_t j = 0; j < hid.n_out; ++j) hid_delta[j] *= selu_derivative(tr.hidden_pre[j]);
}

void apply_step(Layer& l, const double* in, const std::vector<double>& delta, double momentum) {
    for (std::size_t j = 0; j < l.n_out; ++j) {
        const double d = delta[j];
        const std::size_t row = j * l.n_in;
        for (std::size_t i = 0; i < l.n_in; ++i) {
            const std::size_t idx = row + i;
            if (!l.mask[idx]) continue;
            const double step = -l.eta * d * in[i] + momentum * l.weight_momentum[idx];
            l.weights[idx] += step;
            l.weight_momentum[idx] = step;
        }
        const double step = -l.eta * d + momentum * l.bias_momentum[j];
        l.biases[j] += step;
        l.bias_momentum[j] = step;
    }
}

}  // namespace

Layer::Layer(std::size_t inputs, std::size_t outputs, Activation act)
    : n_in(inputs),
      n_out(outputs),
      weights(inputs * outputs, 0.0),
      biases(outputs, 0.0),
      mask(inputs * outputs, 1),
      activation(act),
      weight_momentum(inputs * outputs, 0.0),
      bias_momentum(outputs, 0.0) {}

std::size_t Layer::active_connections() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

void Layer::reset_momentum() {
    std::fill(weight_momentum.begin(), weight_momentum.end(), 0.0);
    std::fill(bias_momentum.begin(), bias_momentum.end(), 0.0);
}

std::size_t Network::active_weights() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.active_connections();
    return n;
}

void Network::reset_momentum() {
    for (auto& l : layers) l.reset_momentum();
}

void init_weights(Layer& layer, double sigma, Rng& rng) {
    if (!(sigma > 0.0)) throw std::invalid_argument("init_weights: sigma must be positive");
    for (auto& w : layer.weights) w = rng.normal(0.0, sigma);
    std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
    std::fill(layer.mask.begin(), layer.mask.end(), std::uint8_t{1});
    layer.reset_momentum();
}

Network make_network(std::size_t n_inputs, std::size_t n_hidden, std::size_t n_outputs,
                     double sigma, double mu_min, Rng& rng) {
    if (n_inputs == 0 || n_hidden == 0 || n_outputs == 0)
        throw std::invalid_argument("make_network: zero-sized layer");
    Network net;
    net.layers.emplace_back(n_inputs, n_hidden, Activation::Selu);
    net.layers.emplace_back(n_hidden, n_outputs, Activation::Logistic);
    for (auto& l : net.layers) {
        init_weights(l, sigma, rng);
        l.eta = rng.uniform(kEtaMin, kEtaMax);
        for (auto& m : l.mu) m = rng.uniform(mu_min, 1.0);
    }
    return net;
}

void forward(const Network& net, std::span<const double> x, ForwardTrace& tr) {
    check_input(net, x);
    const Layer& hid = net.hidden();
    const Layer& out = net.output();
    tr.hidden_pre.resize(hid.n_out);
    tr.hidden_out.resize(hid.n_out);
    tr.output.resize(out.n_out);
    layer_forward(hid, x.data(), tr.hidden_pre.data(), tr.hidden_out.data());
    layer_forward(out, tr.hidden_out.data(), nullptr, tr.output.data());
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
    ForwardTrace tr;
    forward(net, x, tr);
    return std::move(tr.output);
}

double half_sse(const Network& net, std::span<const double> x, std::span<const double> target) {
    const auto o = forward(net, x);
    if (o.size() != target.size()) throw std::invalid_argument("target size mismatch");
    double e = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) e += (target[k] - o[k]) * (target[k] - o[k]);
    return 0.5 * e;
}

Gradients gradients(const Network& net, std::span<const double> x, std::span<const double> target) {
    ForwardTrace tr;
    forward(net, x, tr);
    if (target.size() != net.n_outputs()) throw std::invalid_argument("target size mismatch");
    std::vector<double> out_delta, hid_delta;
    backprop_deltas(net, tr, target, out_delta, hid_delta);

    Gradients g;
    const std::vector<double>* deltas[2] = {&hid_delta, &out_delta};
    const double* inputs[2] = {x.data(), tr.hidden_out.data()};
    for (std::size_t li = 0; li < 2; ++li) {
        const Layer& l = net.layers[li];
        std::vector<double> gw(l.weights.size(), 0.0);
        for (std::size_t j = 0; j < l.n_out; ++j)
            for (std::size_t i = 0; i < l.n_in; ++i)
                if (l.active(j, i)) gw[j * l.n_in + i] = (*deltas[li])[j] * inputs[li][i];
        g.weights.push_back(std::move(gw));
        g.biases.push_back(*deltas[li]);
    }
    return g;
}

void sgd_update(Network& net, std::span<const double> x, std::span<const double> target,
                double momentum, const ForwardTrace& tr) {
    if (target.size() != net.n_outputs()) throw std::invalid_argument("target size mismatch");
    std::vector<double> out_delta, hid_delta;
    backprop_deltas(net, tr, target, out_delta, hid_delta);
    apply_step(net.output(), tr.hidden_out.data(), out_delta, momentum);
    apply_step(net.hidden(), x.data(), hid_delta, momentum);
}

std::vector<double> sgd_update(Network& net, std::span<const double> x,
                               std::span<const double> target, double momentum) {
    ForwardTrace tr;
    forward(net, x, tr);
    sgd_update(net, x, target, momentum, tr);
    return std::move(tr.output);
}

void self_adapt(Layer& layer, double mu_min, Rng& rng) {
    for (auto& m : layer.mu) m = std::clamp(m * std::exp(rng.normal()), mu_min, 1.0);
}

void mutate_weights(Layer& layer, Rng& rng) {
    const double sd = layer.mu[kRateWeights];
    for (std::size_t idx = 0; idx < layer.weights.size(); ++idx)
        if (layer.mask[idx]) layer.weights[idx] += rng.normal(0.0, sd);
    for (auto& b : layer.biases) b += rng.normal(0.0, sd);
}

void mutate_eta(Layer& layer, Rng& rng) {
    layer.eta = std::clamp(layer.eta + rng.normal(0.0, layer.mu[kRateEta]), kEtaMin, kEtaMax);
}

std::size_t mutate_connections(Layer& layer, Rng& rng) {
    const double p = layer.mu[kRateConnections];
    std::size_t flips = 0;
    for (std::size_t idx = 0; idx < layer.mask.size(); ++idx) {
        if (!rng.bernoulli(p)) continue;
        ++flips;
        if (layer.mask[idx]) {
            layer.mask[idx] = 0;
            layer.weights[idx] = 0.0;
        } else {
            layer.mask[idx] = 1;
            layer.weights[idx] = rng.normal(0.0, kInitSigma);
        }
        layer.weight_momentum[idx] = 0.0;
    }
    return flips;
}

long neuron_change(double g, double rate, std::size_t max_change) {
    const auto m = static_cast<double>(max_change);
    return static_cast<long>(std::clamp(std::round(g * rate * m), -m, m));
}

void add_neurons(Network& net, std::size_t count, Rng& rng, bool sparse_new_connections) {
    if (count == 0) return;
    Layer& hid = net.hidden();
    Layer& out = net.output();
    auto draw = [&](double& w, std::uint8_t& m) {
        m = sparse_new_connections ? (rng.bernoulli(0.5) ? 1 : 0) : 1;
        w = m ? rng.normal(0.0, kInitSigma) : 0.0;
    };

    // Hidden layer: new rows.
    for (std::size_t c = 0; c < count; ++c) {
        for (std::size_t i = 0; i < hid.n_in; ++i) {
            double w;
            std::uint8_t m;
            draw(w, m);
            hid.weights.push_back(w);
            hid.mask.push_back(m);
            hid.weight_momentum.push_back(0.0);
        }
        hid.biases.push_back(0.0);
        hid.bias_momentum.push_back(0.0);
    }
    hid.n_out += count;

    // Output layer: new columns appended to every row.
    const std::size_t new_in = out.n_in + count;
    std::vector<double> w(out.n_out * new_in), mom(out.n_out * new_in, 0.0);
    std::vector<std::uint8_t> mask(out.n_out * new_in);
    for (std::size_t k = 0; k < out.n_out; ++k) {
        for (std::size_t j = 0; j < out.n_in; ++j) {
            w[k * new_in + j] = out.weights[k * out.n_in + j];
            mask[k * new_in + j] = out.mask[k * out.n_in + j];
            mom[k * new_in + j] = out.weight_momentum[k * out.n_in + j];
        }
        for (std::size_t j = out.n_in; j < new_in; ++j) draw(w[k * new_in + j], mask[k * new_in + j]);
    }
    out.weights = std::move(w);
    out.mask = std::move(mask);
    out.weight_momentum = std::move(mom);
    out.n_in = new_in;
}

void remove_neuron(Network& net, std::size_t index) {
    Layer& hid = net.hidden();
    Layer& out = net.output();
    if (index >= hid.n_out) throw std::out_of_range("remove_neuron: index out of range");
    if (hid.n_out == 1) throw std::logic_error("remove_neuron: hidden layer cannot be empty");

    const auto row = static_cast<std::ptrdiff_t>(index * hid.n_in);
    const auto len = static_cast<std::ptrdiff_t>(hid.n_in);
    hid.weights.erase(hid.weights.begin() + row, hid.weights.begin() + row + len);
    hid.mask.erase(hid.mask.begin() + row, hid.mask.begin() + row + len);
    hid.weight_momentum.erase(hid.weight_momentum.begin() + row,
                              hid.weight_momentum.begin() + row + len);
    hid.biases.erase(hid.biases.begin() + static_cast<std::ptrdiff_t>(index));
    hid.bias_momentum.erase(hid.bias_momentum.begin() + static_cast<std::ptrdiff_t>(index));
    --hid.n_out;

    const std::size_t new_in = out.n_in - 1;
    std::vector<double> w, mom;
    std::vector<std::uint8_t> mask;
    w.reserve(out.n_out * new_in);
    mom.reserve(out.n_out * new_in);
    mask.reserve(out.n_out * new_in);
    for (std::size_t k = 0; k < out.n_out; ++k) {
        for (std::size_t j = 0; j < out.n_in; ++j) {
            if (j == index) continue;
            w.push_back(out.weights[k * out.n_in + j]);
            mask.push_back(out.mask[k * out.n_in + j]);
            mom.push_back(out.weight_momentum[k * out.n_in + j]);
        }
    }
    out.weights = std::move(w);
    out.mask = std::move(mask);
    out.weight_momentum = std::move(mom);
    out.n_in = new_in;
}

long mutate_neurons(Network& net, Rng& rng, std::size_t max_change, std::size_t h_max,
                    bool sparse_new_connections) {
    if (max_change == 0) return 0;
    const long h = static_cast<long>(net.hidden_size());
    const long requested = neuron_change(rng.normal(), net.hidden().mu[kRateNeurons], max_change);
    const long upper = static_cast<long>(std::min<std::size_t>(h_max, std::numeric_limits<long>::max()));
    const long target = std::clamp(h + requested, 1L, upper);
    if (target > h) {
        add_neurons(net, static_cast<std::size_t>(target - h), rng, sparse_new_connections);
    } else {
        for (long n = h; n > target; --n) remove_neuron(net, rng.uniform_index(net.hidden_size()));
    }
    return target - h;
}

void write_network(BinaryWriter& out, const Network& net) {
    out.u64(net.layers.size());
    for (const auto& l : net.layers) {
        out.u64(l.n_in);
        out.u64(l.n_out);
        out.u8(static_cast<std::uint8_t>(l.activation));
        out.f64(l.eta);
        for (double m : l.mu) out.f64(m);
        out.u8s(l.mask);
        out.f64s(l.weights);
        out.f64s(l.biases);
        out.f64s(l.weight_momentum);
        out.f64s(l.bias_momentum);
    }
}

Network read_network(BinaryReader& in) {
    Network net;
    const auto n_layers = in.u64();
    if (n_layers != 2) throw FormatError("network record must have two layers");
    for (std::uint64_t li = 0; li < n_layers; ++li) {
        Layer l;
        l.n_in = in.u64();
        l.n_out = in.u64();
        const auto act = in.u8();
        if (act > 1) throw FormatError("unknown activation");
        l.activation = static_cast<Activation>(act);
        l.eta = in.f64();
        for (auto& m : l.mu) m = in.f64();
        l.mask = in.u8s();
        l.weights = in.f64s();
        l.biases = in.f64s();
        l.weight_momentum = in.f64s();
        l.bias_momentum = in.f64s();
        const std::size_t nw = l.n_in * l.n_out;
        if (l.mask.size() != nw || l.weights.size() != nw || l.weight_momentum.size() != nw ||
            l.biases.size() != l.n_out || l.bias_momentum.size() != l.n_out)
            throw FormatError("layer record has inconsistent dimensions");
        net.layers.push_back(std::move(l));
    }
    if (net.layers[0].n_out != net.layers[1].n_in)
        throw FormatError("network layers are not dimension-compatible");
    return net;
}

}  // namespace xcsf
