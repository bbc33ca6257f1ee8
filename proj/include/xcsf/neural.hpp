#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xcsf/binary_io.hpp"
#include "xcsf/rng.hpp"

namespace xcsf {

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

inline constexpr double kEtaMin = 1e-4;
inline constexpr double kEtaMax = 0.01;

/// Standard deviation for freshly created weights (initialisation, new
/// neurons, re-enabled connections).
inline constexpr double kInitSigma = 0.1;

enum class Activation : std::uint8_t { Selu = 0, Logistic = 1 };

double selu(double z);
double selu_derivative(double z);
double logistic(double z);

/// Index into Layer::mu.
enum MutationRate : std::size_t {
    kRateWeights = 0,
    kRateNeurons = 1,
    kRateEta = 2,
    kRateConnections = 3,
};

/// One fully-connected layer. Weights are row-major [n_out x n_in].
/// A zero mask entry disables the connection and forces its weight to 0.
struct Layer {
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::vector<double> weights;
    std::vector<double> biases;
    std::vector<std::uint8_t> mask;
    Activation activation = Activation::Selu;
    double eta = kEtaMin;
    std::vector<double> weight_momentum;
    std::vector<double> bias_momentum;
    std::array<double, 4> mu{};

    Layer() = default;
    Layer(std::size_t inputs, std::size_t outputs, Activation act);

    double& weight(std::size_t out, std::size_t in) { return weights[out * n_in + in]; }
    double weight(std::size_t out, std::size_t in) const { return weights[out * n_in + in]; }
    bool active(std::size_t out, std::size_t in) const { return mask[out * n_in + in] != 0; }

    std::size_t active_connections() const;
    void reset_momentum();

    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Feed-forward net with exactly one SELU hidden layer and a logistic output layer.
struct Network {
    std::vector<Layer> layers;

    std::size_t n_inputs() const { return layers.front().n_in; }
    std::size_t n_outputs() const { return layers.back().n_out; }
    std::size_t hidden_size() const { return layers.front().n_out; }
    Layer& hidden() { return layers.front(); }
    const Layer& hidden() const { return layers.front(); }
    Layer& output() { return layers.back(); }
    const Layer& output() const { return layers.back(); }

    /// Active (mask = 1) weights across all layers; biases excluded.
    std::size_t active_weights() const;
    void reset_momentum();

    friend bool operator==(const Network&, const Network&) = default;
};

/// Builds a fully-connected n_inputs -> n_hidden -> n_outputs network with
/// weights ~ N(0, sigma^2), zero biases, eta ~ U[kEtaMin, kEtaMax] and
/// mutation rates ~ U[mu_min, 1] per layer.
Network make_network(std::size_t n_inputs, std::size_t n_hidden, std::size_t n_outputs,
                     double sigma, double mu_min, Rng& rng);

/// Resets weights to N(0, sigma^2), biases to 0, mask to all-active and
/// momentum to 0.
void init_weights(Layer& layer, double sigma, Rng& rng);

std::vector<double> forward(const Network& net, std::span<const double> x);

/// Activations retained from a forward pass, reused for backpropagation.
struct ForwardTrace {
    std::vector<double> hidden_pre;
    std::vector<double> hidden_out;
    std::vector<double> output;
};

void forward(const Network& net, std::span<const double> x, ForwardTrace& trace);

/// Gradients of E = 1/2 * sum_k (target_k - O_k)^2, laid out like the
/// weights and biases of each layer. Masked connections have zero gradient.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

Gradients gradients(const Network& net, std::span<const double> x, std::span<const double> target);

/// Squared-error loss that gradients() differentiates.
double half_sse(const Network& net, std::span<const double> x, std::span<const double> target);

/// One step of gradient descent with momentum: dw = -eta * dE/dw + momentum * dw_prev,
/// using each layer's own eta. Returns the network output computed before the update.
std::vector<double> sgd_update(Network& net, std::span<const double> x,
                               std::span<const double> target, double momentum);

/// As above, reusing a trace from forward(net, x, trace) on the unmodified net.
void sgd_update(Network& net, std::span<const double> x, std::span<const double> target,
                double momentum, const ForwardTrace& trace);

// Self-adaptive mutation operators.

/// mu_k <- clamp(mu_k * exp(N(0,1)), mu_min, 1) for each rate independently.
void self_adapt(Layer& layer, double mu_min, Rng& rng);

/// Adds N(0, mu[kRateWeights]^2) to every active weight and every bias.
void mutate_weights(Layer& layer, Rng& rng);

/// Adds N(0, mu[kRateEta]^2) to eta, clamped to [kEtaMin, kEtaMax].
void mutate_eta(Layer& layer, Rng& rng);

/// Flips each mask bit with probability mu[kRateConnections]. Disabled
/// weights become 0; re-enabled weights are drawn from N(0, kInitSigma^2).
/// Returns the number of flipped connections.
std::size_t mutate_connections(Layer& layer, Rng& rng);

/// Number of neurons to add (positive) or remove (negative) for a given rate:
/// clamp(round(g * rate * max_change), -max_change, max_change).
long neuron_change(double g, double rate, std::size_t max_change);

/// Grows or shrinks the hidden layer by a draw from neuron_change() using
/// the hidden layer's kRateNeurons rate, keeping the size within [1, h_max].
/// Returns the applied change.
long mutate_neurons(Network& net, Rng& rng, std::size_t max_change, std::size_t h_max,
                    bool sparse_new_connections);

/// Appends hidden neurons with N(0, kInitSigma^2) incoming/outgoing weights and
/// zero bias. With sparse_new_connections each new connection is active with
/// probability 0.5.
void add_neurons(Network& net, std::size_t count, Rng& rng, bool sparse_new_connections);

/// Removes hidden neuron `index` together with its outgoing connections.
void remove_neuron(Network& net, std::size_t index);

void write_network(BinaryWriter& out, const Network& net);
Network read_network(BinaryReader& in);

}  // namespace xcsf
