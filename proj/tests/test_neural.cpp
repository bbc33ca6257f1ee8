#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "xcsf/neural.hpp"
#include "test_util.hpp"

using namespace xcsf;

namespace {

Network hand_net(std::size_t n_in, std::size_t h, std::size_t n_out) {
    Network net;
    net.layers.emplace_back(n_in, h, Activation::Selu);
    net.layers.emplace_back(h, n_out, Activation::Logistic);
    for (auto& l : net.layers) {
        l.eta = 0.005;
        l.mu = {0.1, 0.1, 0.1, 0.1};
    }
    return net;
}

bool mask_zero_implies_weight_zero(const Network& net) {
    for (const auto& l : net.layers)
        for (std::size_t i = 0; i < l.weights.size(); ++i)
            if (!l.mask[i] && l.weights[i] != 0.0) return false;
    return true;
}

}  // namespace

TEST_CASE("selu closed-form values") {
    CHECK(selu(0.0) == 0.0);
    CHECK(selu(1.0) == doctest::Approx(1.0507009873554805).epsilon(1e-12));
    CHECK(selu(-1000.0) == doctest::Approx(-1.7580993408473766).epsilon(1e-12));
    CHECK(selu(-1.0) == doctest::Approx(-1.1113307378125625).epsilon(1e-12));
    double prev = selu(-10.0);
    for (double z = -9.9; z < 10.0; z += 0.1) {
        CHECK(selu(z) > prev);
        prev = selu(z);
    }
}

TEST_CASE("logistic identities") {
    CHECK(logistic(0.0) == 0.5);
    CHECK(logistic(40.0) == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double z = rng.uniform(-30.0, 30.0);
        CHECK(std::abs(logistic(z) + logistic(-z) - 1.0) < 1e-12);
    }
}

TEST_CASE("forward pass") {
    SUBCASE("zero weights give 0.5 everywhere") {
        const Network net = hand_net(4, 3, 5);
        const std::vector<double> x = {0.1, 0.9, 0.4, 0.0};
        for (double o : forward(net, x)) CHECK(o == 0.5);
    }
    SUBCASE("fully masked net ignores its input") {
        Rng rng(11);
        Network net = make_network(6, 3, 6, 0.1, 1e-4, rng);
        for (auto& l : net.layers) {
            std::fill(l.mask.begin(), l.mask.end(), std::uint8_t{0});
            std::fill(l.weights.begin(), l.weights.end(), 0.0);
            for (auto& b : l.biases) b = rng.normal();
        }
        const auto a = forward(net, std::vector<double>{0, 0, 0, 0, 0, 0});
        const auto b = forward(net, std::vector<double>{1, 0.3, 0.2, 1, 0.9, 0.5});
        CHECK(a == b);
    }
    SUBCASE("single hidden neuron, hand-set weights") {
        Network net = hand_net(2, 1, 1);
        net.hidden().weight(0, 0) = 0.5;
        net.hidden().weight(0, 1) = -0.25;
        net.hidden().biases[0] = 0.1;
        net.output().weight(0, 0) = 2.0;
        net.output().biases[0] = -0.3;
        const auto o = forward(net, std::vector<double>{0.8, 0.4});
        CHECK(o[0] == doctest::Approx(0.6319428621100526).epsilon(1e-12));
    }
    SUBCASE("two hidden neurons, one on the negative SELU branch") {
        Network net = hand_net(2, 2, 2);
        net.hidden().weights = {0.3, -0.7, -0.5, 0.1};
        net.hidden().biases = {0.05, -0.2};
        net.output().weights = {1.2, -0.4, -0.8, 0.6};
        net.output().biases = {0.1, 0.0};
        const auto o = forward(net, std::vector<double>{0.2, 0.9});
        CHECK(o[0] == doctest::Approx(0.349271464524154).epsilon(1e-12));
        CHECK(o[1] == doctest::Approx(0.5915777364548487).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch is an error") {
        const Network net = hand_net(3, 1, 3);
        CHECK_THROWS_AS(forward(net, std::vector<double>{0.1, 0.2}), std::invalid_argument);
    }
}

TEST_CASE("analytic gradients agree with central finite differences") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const Network net = test::random_small_net(rng);
        const auto x = test::random_unit_vector(net.n_inputs(), rng);
        const auto target = test::random_unit_vector(net.n_outputs(), rng);
        const auto report = test::gradient_check(net, x, target);
        CHECK(report.max_rel_error < 1e-4);
        CHECK(report.masked_nonzero == 0);
    }
}

TEST_CASE("sgd_update") {
    Rng rng(5);
    SUBCASE("zero rate and zero momentum leave the net unchanged") {
        Network net = make_network(4, 2, 4, 0.1, 1e-4, rng);
        for (auto& l : net.layers) l.eta = 0.0;
        const Network before = net;
        const std::vector<double> x = {0.1, 0.5, 0.9, 0.3};
        sgd_update(net, x, x, 0.0);
        CHECK(net == before);
    }
    SUBCASE("second step carries momentum times the first step") {
        Network net = make_network(3, 2, 3, 0.5, 1e-4, rng);
        const std::vector<double> x = {0.2, 0.7, 0.4};
        const double omega = 0.9;
        const Network w0 = net;
        const Gradients g1 = gradients(w0, x, x);
        sgd_update(net, x, x, omega);
        const Network w1 = net;
        const Gradients g2 = gradients(w1, x, x);
        sgd_update(net, x, x, omega);
        for (std::size_t li = 0; li < 2; ++li) {
            const double eta = w0.layers[li].eta;
            for (std::size_t i = 0; i < w0.layers[li].weights.size(); ++i) {
                const double d1 = -eta * g1.weights[li][i];
                CHECK(w1.layers[li].weights[i] - w0.layers[li].weights[i] == doctest::Approx(d1).epsilon(1e-9));
                const double expected = w1.layers[li].weights[i] - eta * g2.weights[li][i] + omega * d1;
                CHECK(std::abs(net.layers[li].weights[i] - expected) < 1e-12);
            }
        }
    }
    SUBCASE("masked weights stay zero") {
        Network net = make_network(5, 3, 5, 0.1, 1e-4, rng);
        net.hidden().mask[2] = 0;
        net.hidden().weights[2] = 0.0;
        net.output().mask[4] = 0;
        net.output().weights[4] = 0.0;
        const std::vector<double> x = {0.9, 0.1, 0.8, 0.2, 0.7};
        for (int i = 0; i < 20; ++i) sgd_update(net, x, x, 0.9);
        CHECK(net.hidden().weights[2] == 0.0);
        CHECK(net.output().weights[4] == 0.0);
    }
    SUBCASE("repeated steps reduce reconstruction error") {
        Network net = make_network(4, 3, 4, 0.1, 1e-4, rng);
        for (auto& l : net.layers) l.eta = kEtaMax;
        const std::vector<double> x = {0.9, 0.1, 0.8, 0.2};
        const double before = half_sse(net, x, x);
        for (int i = 0; i < 500; ++i) sgd_update(net, x, x, 0.9);
        CHECK(half_sse(net, x, x) < 0.1 * before);
    }
    SUBCASE("cloning isolates the original from updates") {
        const Network original = make_network(4, 2, 4, 0.1, 1e-4, rng);
        const Network snapshot = original;
        Network clone = original;
        const std::vector<double> x = {0.3, 0.3, 0.6, 0.1};
        sgd_update(clone, x, x, 0.9);
        CHECK(original == snapshot);
        CHECK_FALSE(clone == original);
    }
}

TEST_CASE("init_weights") {
    Rng rng(99);
    Layer l(1000, 100, Activation::Selu);
    l.mask[5] = 0;
    l.biases[3] = 7.0;
    init_weights(l, 0.1, rng);
    const double mean = std::accumulate(l.weights.begin(), l.weights.end(), 0.0) / 1e5;
    double var = 0.0;
    for (double w : l.weights) var += (w - mean) * (w - mean);
    CHECK(std::sqrt(var / (1e5 - 1)) == doctest::Approx(0.1).epsilon(0.02));
    CHECK(std::all_of(l.biases.begin(), l.biases.end(), [](double b) { return b == 0.0; }));
    CHECK(l.active_connections() == l.mask.size());
    CHECK_THROWS_AS(init_weights(l, 0.0, rng), std::invalid_argument);
}

TEST_CASE("self_adapt") {
    Rng rng(17);
    const double mu_min = 1e-4;
    SUBCASE("log-ratio is standard normal away from the clamps") {
        std::vector<double> logs;
        for (int i = 0; i < 25000; ++i) {
            Layer l(1, 1, Activation::Selu);
            l.mu = {0.01, 0.01, 0.01, 0.01};
            self_adapt(l, mu_min, rng);
            for (double m : l.mu) logs.push_back(std::log(m / 0.01));
        }
        const auto [mean, sd] = test::mean_sd(logs);
        CHECK(std::abs(mean) < 0.02);
        CHECK(sd == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("floor and ceiling clamps") {
        int floor_hits = 0, ceil_hits = 0;
        for (int i = 0; i < 10000; ++i) {
            Layer lo(1, 1, Activation::Selu);
            lo.mu = {mu_min, mu_min, mu_min, mu_min};
            self_adapt(lo, mu_min, rng);
            Layer hi(1, 1, Activation::Selu);
            hi.mu = {1.0, 1.0, 1.0, 1.0};
            self_adapt(hi, mu_min, rng);
            for (int k = 0; k < 4; ++k) {
                CHECK(lo.mu[k] >= mu_min);
                CHECK(hi.mu[k] <= 1.0);
                floor_hits += lo.mu[k] == mu_min;
                ceil_hits += hi.mu[k] == 1.0;
            }
        }
        // Exactly the non-positive draws stay on the clamp: about half.
        CHECK(floor_hits / 40000.0 == doctest::Approx(0.5).epsilon(0.03));
        CHECK(ceil_hits / 40000.0 == doctest::Approx(0.5).epsilon(0.03));
    }
}

TEST_CASE("mutate_weights") {
    Rng rng(23);
    SUBCASE("minimal rate gives tiny perturbations") {
        Layer l(200, 50, Activation::Selu);
        l.mu[kRateWeights] = 1e-4;
        const Layer before = l;
        mutate_weights(l, rng);
        double max_delta = 0.0;
        for (std::size_t i = 0; i < l.weights.size(); ++i)
            max_delta = std::max(max_delta, std::abs(l.weights[i] - before.weights[i]));
        CHECK(max_delta < 1e-3);
        CHECK(max_delta > 0.0);
    }
    SUBCASE("masked weights are excluded, biases included") {
        Layer l(10, 10, Activation::Selu);
        l.mu[kRateWeights] = 0.5;
        l.mask[3] = 0;
        mutate_weights(l, rng);
        CHECK(l.weights[3] == 0.0);
        CHECK(std::any_of(l.biases.begin(), l.biases.end(), [](double b) { return b != 0.0; }));
    }
    SUBCASE("delta spread matches the rate") {
        Layer l(1000, 100, Activation::Selu);
        l.mu[kRateWeights] = 0.5;
        mutate_weights(l, rng);
        const auto [mean, sd] = test::mean_sd(l.weights);
        CHECK(std::abs(mean) < 0.01);
        CHECK(sd == doctest::Approx(0.5).epsilon(0.02));
    }
}

TEST_CASE("mutate_eta") {
    Rng rng(29);
    int low = 0, high = 0;
    for (int i = 0; i < 2000; ++i) {
        Layer a(1, 1, Activation::Selu);
        a.eta = kEtaMin;
        a.mu[kRateEta] = 0.5;
        mutate_eta(a, rng);
        CHECK(a.eta >= kEtaMin);
        CHECK(a.eta <= kEtaMax);
        low += a.eta == kEtaMin;
        Layer b(1, 1, Activation::Selu);
        b.eta = kEtaMax;
        b.mu[kRateEta] = 0.5;
        mutate_eta(b, rng);
        high += b.eta == kEtaMax;
    }
    CHECK(low / 2000.0 == doctest::Approx(0.5).epsilon(0.1));
    CHECK(high / 2000.0 == doctest::Approx(0.5).epsilon(0.1));

    std::vector<double> deltas;
    for (int i = 0; i < 50000; ++i) {
        Layer l(1, 1, Activation::Selu);
        l.eta = 0.005;
        l.mu[kRateEta] = 5e-4;
        mutate_eta(l, rng);
        deltas.push_back(l.eta - 0.005);
    }
    CHECK(test::mean_sd(deltas).second == doctest::Approx(5e-4).epsilon(0.02));
}

TEST_CASE("mutate_connections") {
    Rng rng(31);
    SUBCASE("zero probability keeps the mask") {
        Layer l(20, 20, Activation::Selu);
        l.mu[kRateConnections] = 0.0;
        const Layer before = l;
        CHECK(mutate_connections(l, rng) == 0);
        CHECK(l == before);
    }
    SUBCASE("enable then disable leaves an exact zero") {
        Layer l(5, 5, Activation::Selu);
        std::fill(l.mask.begin(), l.mask.end(), std::uint8_t{0});
        l.mu[kRateConnections] = 1.0;
        mutate_connections(l, rng);
        CHECK(l.active_connections() == 25);
        CHECK(std::any_of(l.weights.begin(), l.weights.end(), [](double w) { return w != 0.0; }));
        mutate_connections(l, rng);
        CHECK(l.active_connections() == 0);
        CHECK(std::all_of(l.weights.begin(), l.weights.end(), [](double w) { return w == 0.0; }));
    }
    SUBCASE("flip frequency matches the rate") {
        Layer l(1000, 100, Activation::Selu);
        l.mu[kRateConnections] = 0.5;
        const double frac = static_cast<double>(mutate_connections(l, rng)) / 1e5;
        CHECK(frac == doctest::Approx(0.5).epsilon(0.02));
    }
}

TEST_CASE("neuron growth and pruning") {
    Rng rng(37);
    CHECK(neuron_change(0.0, 1.0, 5) == 0);
    CHECK(neuron_change(10.0, 1.0, 5) == 5);
    CHECK(neuron_change(-10.0, 1.0, 5) == -5);
    CHECK(neuron_change(1.0, 0.3, 5) == 2);     // round(1.5)
    CHECK(neuron_change(-1.0, 0.1, 1) == 0);

    SUBCASE("size is clamped to [1, h_max]") {
        Network small = make_network(4, 1, 4, 0.1, 1e-4, rng);
        small.hidden().mu[kRateNeurons] = 1.0;
        Network full = make_network(4, 3, 4, 0.1, 1e-4, rng);
        full.hidden().mu[kRateNeurons] = 1.0;
        for (int i = 0; i < 200; ++i) {
            mutate_neurons(small, rng, 5, 3, false);
            mutate_neurons(full, rng, 5, 3, false);
            CHECK(small.hidden_size() >= 1);
            CHECK(small.hidden_size() <= 3);
            CHECK(full.hidden_size() >= 1);
            CHECK(full.hidden_size() <= 3);
            CHECK(small.output().n_in == small.hidden_size());
        }
    }
    SUBCASE("adding then removing a neuron restores outputs exactly") {
        Network net = make_network(6, 2, 6, 0.1, 1e-4, rng);
        const Network original = net;
        const std::vector<double> x = {0.1, 0.2, 0.9, 0.4, 0.0, 1.0};
        const auto before = forward(net, x);
        add_neurons(net, 1, rng, false);
        CHECK(net.hidden_size() == 3);
        const auto grown = forward(net, x);
        double max_change = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) max_change = std::max(max_change, std::abs(grown[k] - before[k]));
        CHECK(max_change > 0.0);
        CHECK(max_change < 0.1);
        remove_neuron(net, 2);
        CHECK(forward(net, x) == before);
        CHECK(net == original);
    }
    SUBCASE("sparse new neurons are connected with probability one half") {
        Network net = make_network(200, 1, 200, 0.1, 1e-4, rng);
        add_neurons(net, 20, rng, true);
        const std::size_t new_in = 20 * 200, new_out = 200 * 20;
        const std::size_t active = net.active_weights() - 200 - 200;
        CHECK(static_cast<double>(active) / static_cast<double>(new_in + new_out) ==
              doctest::Approx(0.5).epsilon(0.05));
        CHECK(mask_zero_implies_weight_zero(net));
    }
    SUBCASE("removing the last neuron is refused") {
        Network net = make_network(3, 1, 3, 0.1, 1e-4, rng);
        CHECK_THROWS(remove_neuron(net, 0));
    }
}

TEST_CASE("invariants hold under random operator sequences") {
    Rng rng(41);
    const double mu_min = 1e-4;
    const std::size_t h_max = 6;
    for (int run = 0; run < 20; ++run) {
        Network net = make_network(5, 1 + rng.uniform_index(3), 5, 0.1, mu_min, rng);
        const std::vector<double> x = test::random_unit_vector(5, rng);
        for (int step = 0; step < 100; ++step) {
            switch (rng.uniform_index(5)) {
                case 0: for (auto& l : net.layers) self_adapt(l, mu_min, rng); break;
                case 1: for (auto& l : net.layers) mutate_weights(l, rng); break;
                case 2: for (auto& l : net.layers) mutate_eta(l, rng); break;
                case 3: for (auto& l : net.layers) mutate_connections(l, rng); break;
                case 4: mutate_neurons(net, rng, 3, h_max, true); break;
            }
            sgd_update(net, x, x, 0.9);
            REQUIRE(mask_zero_implies_weight_zero(net));
            REQUIRE(net.hidden_size() >= 1);
            REQUIRE(net.hidden_size() <= h_max);
            REQUIRE(net.output().n_in == net.hidden_size());
            for (const auto& l : net.layers) {
                REQUIRE(l.eta >= kEtaMin);
                REQUIRE(l.eta <= kEtaMax);
                for (double m : l.mu) {
                    REQUIRE(m >= mu_min);
                    REQUIRE(m <= 1.0);
                }
            }
        }
        // Forward passes are deterministic.
        CHECK(forward(net, x) == forward(net, x));
    }
}

TEST_CASE("network serialization round-trips bit-exactly") {
    Rng rng(43);
    for (int i = 0; i < 5; ++i) {
        Network net = test::random_small_net(rng);
        const std::vector<double> x = test::random_unit_vector(net.n_inputs(), rng);
        sgd_update(net, x, std::vector<double>(net.n_outputs(), 0.3), 0.9);
        std::stringstream ss;
        BinaryWriter w(ss);
        write_network(w, net);
        BinaryReader r(ss);
        CHECK(read_network(r) == net);
    }
    std::stringstream truncated("\x02\x00\x00");
    BinaryReader r(truncated);
    CHECK_THROWS_AS(read_network(r), FormatError);
}
