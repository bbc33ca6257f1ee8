#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "xcsf/binary_io.hpp"
#include "xcsf/config.hpp"
#include "xcsf/neural.hpp"
#include "xcsf/rng.hpp"

namespace xcsf {

/// Raised when covering cannot produce a matching condition within the
/// configured number of attempts.
class CoveringError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A (macro-)classifier: a matching network, an autoencoding network and the
/// usual XCSF bookkeeping.
struct Classifier {
    Network condition;   // n_inputs -> h -> 1
    Network prediction;  // n_inputs -> h -> n_inputs
    double err = 0.0;
    double fit = 0.01;
    std::uint64_t num = 1;
    std::uint64_t exp = 0;
    double set_size = 1.0;
    std::uint64_t ts = 0;
    std::uint64_t age = 0;
    std::uint64_t mtotal = 0;

    friend bool operator==(const Classifier&, const Classifier&) = default;
};

struct Population {
    std::vector<Classifier> members;
    std::uint64_t trial = 0;

    /// Sum of numerosities.
    std::uint64_t micro_size() const;

    friend bool operator==(const Population&, const Population&) = default;
};

/// Indices into Population::members.
using MatchSet = std::vector<std::size_t>;

/// Roulette-wheel selection proportional to non-negative weights. When every
/// weight is zero the choice is uniform.
std::size_t roulette_select(std::span<const double> weights, Rng& rng);

/// Random classifier with h_I hidden neurons in both nets and init_sigma weights.
Classifier random_classifier(std::size_t n_features, const ExperimentConfig& cfg, Rng& rng);

/// Population of N random classifiers (used when P_init is set), else empty.
Population initial_population(std::size_t n_features, const ExperimentConfig& cfg, Rng& rng);

double condition_output(const Classifier& cl, std::span<const double> x);
bool matches(const Classifier& cl, std::span<const double> x, const ExperimentConfig& cfg);

/// Builds a classifier whose condition matches x, resampling the condition net
/// with cover_sigma weights until it does.
Classifier cover(std::span<const double> x, const ExperimentConfig& cfg, Rng& rng);

/// Matching classifiers for x; covers when none match. Increments mtotal of
/// every member of the returned set.
MatchSet build_match_set(Population& pop, std::span<const double> x, const ExperimentConfig& cfg,
                         Rng& rng);

/// Fitness-weighted mean of the reconstructions in the match set.
std::vector<double> system_prediction(const Population& pop, std::span<const std::size_t> match_set,
                                      std::span<const double> x);

/// Accuracy: 1 below epsilon0, else alpha * (err / epsilon0)^-nu.
double accuracy(double err, const ExperimentConfig& cfg);

/// Updates experience, error, fitness and set-size estimates of the match set
/// against x, then applies one gradient step to each prediction net.
void reinforce(Population& pop, std::span<const std::size_t> match_set, std::span<const double> x,
               const ExperimentConfig& cfg);

/// Runs the EA in the match set if the numerosity-weighted mean time stamp is
/// more than theta_EA trials old. Offspring are appended to the population and
/// the population limit is enforced. Returns true when the EA fired.
bool maybe_run_ea(Population& pop, std::span<const std::size_t> match_set,
                  const ExperimentConfig& cfg, Rng& rng);

/// Mutates an offspring in place: self-adapts every layer's rates, then
/// applies neuron, connection, weight and eta mutation at the new rates.
void mutate_offspring(Classifier& cl, const ExperimentConfig& cfg, Rng& rng);

bool is_stale(const Classifier& cl, const ExperimentConfig& cfg);

/// Deletion vote; stale classifiers get +infinity.
double deletion_vote(const Classifier& cl, double mean_fitness, const ExperimentConfig& cfg);

/// Population mean fitness per micro-classifier.
double mean_fitness(const Population& pop);

/// Removes micro-classifiers until sum(num) <= N. Each removal draws two
/// distinct candidates by deletion vote and decrements the one with more
/// prediction hidden neurons.
void enforce_population_limit(Population& pop, const ExperimentConfig& cfg, Rng& rng);

struct TrialOutcome {
    std::vector<double> output;       // system prediction, before learning
    std::uint64_t match_set_micro = 0;  // sum(num) over [M]
    std::size_t match_set_macro = 0;
    bool ea_fired = false;
};

/// One learning step on input x: match, predict, reinforce, EA, delete.
TrialOutcome run_trial(Population& pop, std::span<const double> x, const ExperimentConfig& cfg,
                       Rng& rng);

struct Prediction {
    std::vector<double> output;
    std::uint64_t match_set_micro = 0;
};

/// Read-only system prediction for x (no covering or learning). If no
/// classifier matches, the fitness-weighted mean over the whole population is
/// returned.
Prediction predict(const Population& pop, std::span<const double> x, const ExperimentConfig& cfg);

struct BestRule {
    std::size_t index = 0;
    std::size_t matched = 0;
    double mfrac = 0.0;
};

/// Selects the single best rule: the lowest-error classifier when none is
/// below epsilon0, otherwise the one below epsilon0 matching the most rows.
/// `rows` is a row-major feature matrix with `n_features` columns.
BestRule best_classifier(const Population& pop, std::span<const double> rows,
                         std::size_t n_features, const ExperimentConfig& cfg);

void write_population(BinaryWriter& out, const Population& pop);
Population read_population(BinaryReader& in);

}  // namespace xcsf
