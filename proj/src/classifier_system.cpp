#include "xcsf/classifier_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace xcsf {

std::uint64_t Population::micro_size() const {
    std::uint64_t n = 0;
    for (const auto& cl : members) n += cl.num;
    return n;
}

std::size_t roulette_select(std::span<const double> weights, Rng& rng) {
    if (weights.empty()) throw std::invalid_argument("roulette_select: no candidates");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) return rng.uniform_index(weights.size());
    const double point = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (point < acc) return i;
    }
    // Rounding can leave `point` just past the final sum.
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

namespace {

Classifier blank_classifier(const ExperimentConfig& cfg) {
    Classifier cl;
    cl.err = cfg.epsilon_I;
    cl.fit = cfg.F_I;
    cl.num = 1;
    cl.exp = 0;
    cl.set_size = 1.0;
    return cl;
}

}  // namespace

Classifier random_classifier(std::size_t n_features, const ExperimentConfig& cfg, Rng& rng) {
    Classifier cl = blank_classifier(cfg);
    cl.condition = make_network(n_features, cfg.h_I, 1, cfg.init_sigma, cfg.mu_min, rng);
    cl.prediction = make_network(n_features, cfg.h_I, n_features, cfg.init_sigma, cfg.mu_min, rng);
    return cl;
}

Population initial_population(std::size_t n_features, const ExperimentConfig& cfg, Rng& rng) {
    Population pop;
    if (!cfg.P_init) return pop;
    pop.members.reserve(cfg.N + cfg.lambda + 1);
    for (std::size_t i = 0; i < cfg.N; ++i) pop.members.push_back(random_classifier(n_features, cfg, rng));
    return pop;
}

double condition_output(const Classifier& cl, std::span<const double> x) {
    return forward(cl.condition, x)[0];
}

bool matches(const Classifier& cl, std::span<const double> x, const ExperimentConfig& cfg) {
    if (cfg.mode == Mode::GlobalEa) return true;
    return condition_output(cl, x) > cfg.match_threshold;
}

Classifier cover(std::span<const double> x, const ExperimentConfig& cfg, Rng& rng) {
    const std::size_t n = x.size();
    Classifier cl = blank_classifier(cfg);
    cl.prediction = make_network(n, cfg.h_I, n, cfg.init_sigma, cfg.mu_min, rng);
    for (std::uint64_t attempt = 0; attempt < cfg.cover_max_attempts; ++attempt) {
        cl.condition = make_network(n, cfg.h_I, 1, cfg.cover_sigma, cfg.mu_min, rng);
        // Covering draws biases at the same scale as the weights so that even
        // an all-zero input can be matched.
        for (auto& l : cl.condition.layers)
            for (auto& b : l.biases) b = rng.normal(0.0, cfg.cover_sigma);
        if (matches(cl, x, cfg)) return cl;
    }
    throw CoveringError("covering failed to match the input after " +
                        std::to_string(cfg.cover_max_attempts) + " attempts");
}

MatchSet build_match_set(Population& pop, std::span<const double> x, const ExperimentConfig& cfg,
                         Rng& rng) {
    MatchSet m;
    for (std::size_t i = 0; i < pop.members.size(); ++i)
        if (matches(pop.members[i], x, cfg)) m.push_back(i);
    if (m.empty()) {
        Classifier cl = cover(x, cfg, rng);
        cl.ts = pop.trial;
        pop.members.push_back(std::move(cl));
        m.push_back(pop.members.size() - 1);
    }
    for (auto i : m) ++pop.members[i].mtotal;
    return m;
}

namespace {

std::vector<double> weighted_mean(const Population& pop, std::span<const std::size_t> idx,
                                  const std::vector<std::vector<double>>& outputs) {
    std::vector<double> sum(outputs.front().size(), 0.0);
    double fsum = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double f = pop.members[idx[k]].fit;
        fsum += f;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += f * outputs[k][i];
    }
    for (auto& v : sum) v /= fsum;
    return sum;
}

double squared_error_mean(std::span<const double> a, std::span<const double> b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e += (a[i] - b[i]) * (a[i] - b[i]);
    return e / static_cast<double>(a.size());
}

void reinforce_traced(Population& pop, std::span<const std::size_t> m, std::span<const double> x,
                      const ExperimentConfig& cfg, const std::vector<ForwardTrace>& traces) {
    double micro = 0.0;
    for (auto i : m) micro += static_cast<double>(pop.members[i].num);

    std::vector<double> kappa(m.size());
    double kappa_sum = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        Classifier& cl = pop.members[m[k]];
        ++cl.exp;
        cl.err += cfg.beta * (squared_error_mean(x, traces[k].output) - cl.err);
        kappa[k] = accuracy(cl.err, cfg) * static_cast<double>(cl.num);
        kappa_sum += kappa[k];
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
        Classifier& cl = pop.members[m[k]];
        const double rel = kappa_sum > 0.0 ? kappa[k] / kappa_sum : 0.0;
        cl.fit += cfg.beta * (rel - cl.fit);
        cl.set_size += cfg.beta * (micro - cl.set_size);
        sgd_update(cl.prediction, x, x, cfg.omega, traces[k]);
    }
}

std::vector<ForwardTrace> trace_predictions(const Population& pop, std::span<const std::size_t> m,
                                            std::span<const double> x) {
    std::vector<ForwardTrace> traces(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) forward(pop.members[m[k]].prediction, x, traces[k]);
    return traces;
}

}  // namespace

std::vector<double> system_prediction(const Population& pop, std::span<const std::size_t> match_set,
                                      std::span<const double> x) {
    if (match_set.empty()) throw std::invalid_argument("system_prediction: empty match set");
    std::vector<std::vector<double>> outputs;
    outputs.reserve(match_set.size());
    for (auto i : match_set) outputs.push_back(forward(pop.members[i].prediction, x));
    return weighted_mean(pop, match_set, outputs);
}

double accuracy(double err, const ExperimentConfig& cfg) {
    if (err < cfg.epsilon0) return 1.0;
    return cfg.alpha * std::pow(err / cfg.epsilon0, -cfg.nu);
}

void reinforce(Population& pop, std::span<const std::size_t> match_set, std::span<const double> x,
               const ExperimentConfig& cfg) {
    reinforce_traced(pop, match_set, x, cfg, trace_predictions(pop, match_set, x));
}

void mutate_offspring(Classifier& cl, const ExperimentConfig& cfg, Rng& rng) {
    auto mutate_net = [&](Network& net) {
        for (auto& l : net.layers) self_adapt(l, cfg.mu_min, rng);
        mutate_neurons(net, rng, cfg.h_M, cfg.h_max, cfg.connection_mutation);
        for (auto& l : net.layers) {
            if (cfg.connection_mutation) mutate_connections(l, rng);
            mutate_weights(l, rng);
            mutate_eta(l, rng);
        }
    };
    // Conditions are irrelevant when every rule matches everything.
    if (cfg.mode == Mode::Xcsf) mutate_net(cl.condition);
    mutate_net(cl.prediction);
}

bool maybe_run_ea(Population& pop, std::span<const std::size_t> match_set,
                  const ExperimentConfig& cfg, Rng& rng) {
    if (match_set.empty()) return false;
    double ts_sum = 0.0, micro = 0.0;
    for (auto i : match_set) {
        const auto& cl = pop.members[i];
        ts_sum += static_cast<double>(cl.ts) * static_cast<double>(cl.num);
        micro += static_cast<double>(cl.num);
    }
    if (static_cast<double>(pop.trial) - ts_sum / micro <= static_cast<double>(cfg.theta_EA))
        return false;

    for (auto i : match_set) pop.members[i].ts = pop.trial;

    std::vector<double> fitness(match_set.size());
    for (std::size_t k = 0; k < match_set.size(); ++k) fitness[k] = pop.members[match_set[k]].fit;
    const std::size_t p1 = match_set[roulette_select(fitness, rng)];
    const std::size_t p2 = match_set[roulette_select(fitness, rng)];

    const Classifier& a = pop.members[p1];
    const Classifier& b = pop.members[p2];
    const double child_err = 0.5 * (a.err + b.err) * cfg.epsilon_R;
    const double child_fit = 0.5 * (a.fit + b.fit) * cfg.F_R;
    const double child_size = 0.5 * (a.set_size + b.set_size);

    std::vector<Classifier> offspring;
    offspring.reserve(cfg.lambda);
    for (std::size_t c = 0; c < cfg.lambda; ++c) {
        Classifier child = pop.members[c % 2 == 0 ? p1 : p2];
        child.condition.reset_momentum();
        child.prediction.reset_momentum();
        child.err = child_err;
        child.fit = child_fit;
        child.set_size = child_size;
        child.num = 1;
        child.exp = 1;
        child.ts = pop.trial;
        child.age = 0;
        child.mtotal = 0;
        mutate_offspring(child, cfg, rng);
        offspring.push_back(std::move(child));
    }
    for (auto& child : offspring) pop.members.push_back(std::move(child));
    enforce_population_limit(pop, cfg, rng);
    return true;
}

bool is_stale(const Classifier& cl, const ExperimentConfig& cfg) {
    return cl.mtotal == 0 && cl.age > cfg.stale_limit;
}

double deletion_vote(const Classifier& cl, double mean_fit, const ExperimentConfig& cfg) {
    if (is_stale(cl, cfg)) return std::numeric_limits<double>::infinity();
    double vote = cl.set_size * static_cast<double>(cl.num);
    const double micro_fit = cl.fit / static_cast<double>(cl.num);
    if (cl.exp > cfg.theta_del && micro_fit < cfg.delta * mean_fit) vote *= mean_fit / micro_fit;
    return vote;
}

double mean_fitness(const Population& pop) {
    double f = 0.0;
    for (const auto& cl : pop.members) f += cl.fit;
    const auto micro = pop.micro_size();
    return micro > 0 ? f / static_cast<double>(micro) : 0.0;
}

namespace {

// Draws one deletion candidate, excluding `skip`. Stale rules (infinite
// vote) are always drawn first.
std::size_t draw_candidate(const std::vector<double>& votes, std::size_t skip, Rng& rng) {
    std::vector<std::size_t> stale;
    for (std::size_t i = 0; i < votes.size(); ++i)
        if (i != skip && std::isinf(votes[i])) stale.push_back(i);
    if (!stale.empty()) return stale[rng.uniform_index(stale.size())];
    if (skip >= votes.size()) return roulette_select(votes, rng);
    std::vector<double> w = votes;
    w[skip] = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < w.size(); ++i) any |= (i != skip && w[i] > 0.0);
    if (!any) {
        const std::size_t r = rng.uniform_index(w.size() - 1);
        return r >= skip ? r + 1 : r;
    }
    return roulette_select(w, rng);
}

}  // namespace

void enforce_population_limit(Population& pop, const ExperimentConfig& cfg, Rng& rng) {
    while (pop.micro_size() > cfg.N) {
        const double mf = mean_fitness(pop);
        std::vector<double> votes(pop.members.size());
        for (std::size_t i = 0; i < votes.size(); ++i) votes[i] = deletion_vote(pop.members[i], mf, cfg);

        std::size_t victim;
        if (pop.members.size() == 1) {
            victim = 0;
        } else {
            const std::size_t a = draw_candidate(votes, votes.size(), rng);
            const std::size_t b = draw_candidate(votes, a, rng);
            const bool stale_a = std::isinf(votes[a]);
            const bool stale_b = std::isinf(votes[b]);
            const auto ha = pop.members[a].prediction.hidden_size();
            const auto hb = pop.members[b].prediction.hidden_size();
            if (stale_a != stale_b) victim = stale_a ? a : b;
            else if (ha != hb) victim = ha > hb ? a : b;
            else if (votes[a] != votes[b]) victim = votes[a] > votes[b] ? a : b;
            else victim = rng.bernoulli(0.5) ? a : b;
        }
        Classifier& cl = pop.members[victim];
        if (--cl.num == 0) pop.members.erase(pop.members.begin() + static_cast<std::ptrdiff_t>(victim));
    }
}

TrialOutcome run_trial(Population& pop, std::span<const double> x, const ExperimentConfig& cfg,
                       Rng& rng) {
    ++pop.trial;
    for (auto& cl : pop.members) ++cl.age;

    const MatchSet m = build_match_set(pop, x, cfg, rng);
    TrialOutcome out;
    out.match_set_macro = m.size();
    for (auto i : m) out.match_set_micro += pop.members[i].num;

    const auto traces = trace_predictions(pop, m, x);
    std::vector<std::vector<double>> outputs;
    outputs.reserve(m.size());
    for (const auto& t : traces) outputs.push_back(t.output);
    out.output = weighted_mean(pop, m, outputs);

    reinforce_traced(pop, m, x, cfg, traces);
    out.ea_fired = maybe_run_ea(pop, m, cfg, rng);
    enforce_population_limit(pop, cfg, rng);
    return out;
}

Prediction predict(const Population& pop, std::span<const double> x, const ExperimentConfig& cfg) {
    if (pop.members.empty()) throw std::invalid_argument("predict: empty population");
    MatchSet m;
    for (std::size_t i = 0; i < pop.members.size(); ++i)
        if (matches(pop.members[i], x, cfg)) m.push_back(i);
    Prediction p;
    for (auto i : m) p.match_set_micro += pop.members[i].num;
    if (m.empty()) {
        m.resize(pop.members.size());
        std::iota(m.begin(), m.end(), std::size_t{0});
    }
    p.output = system_prediction(pop, m, x);
    return p;
}

BestRule best_classifier(const Population& pop, std::span<const double> rows,
                         std::size_t n_features, const ExperimentConfig& cfg) {
    if (pop.members.empty()) throw std::invalid_argument("best_classifier: empty population");
    if (n_features == 0 || rows.empty() || rows.size() % n_features != 0)
        throw std::invalid_argument("best_classifier: malformed dataset");
    const std::size_t n_rows = rows.size() / n_features;

    auto count_matches = [&](const Classifier& cl) {
        std::size_t c = 0;
        for (std::size_t r = 0; r < n_rows; ++r)
            if (matches(cl, rows.subspan(r * n_features, n_features), cfg)) ++c;
        return c;
    };

    BestRule best;
    bool any_accurate = false;
    for (std::size_t i = 0; i < pop.members.size(); ++i) {
        const auto& cl = pop.members[i];
        if (cl.err < cfg.epsilon0) any_accurate = true;
        if (cl.err < pop.members[best.index].err) best.index = i;
    }
    if (any_accurate) {
        bool first = true;
        for (std::size_t i = 0; i < pop.members.size(); ++i) {
            const auto& cl = pop.members[i];
            if (!(cl.err < cfg.epsilon0)) continue;
            const std::size_t c = count_matches(cl);
            if (first || c > best.matched) {
                best.index = i;
                best.matched = c;
                first = false;
            }
        }
    } else {
        best.matched = count_matches(pop.members[best.index]);
    }
    best.mfrac = static_cast<double>(best.matched) / static_cast<double>(n_rows);
    return best;
}

void write_population(BinaryWriter& out, const Population& pop) {
    out.u64(pop.trial);
    out.u64(pop.members.size());
    for (const auto& cl : pop.members) {
        write_network(out, cl.condition);
        write_network(out, cl.prediction);
        out.f64(cl.err);
        out.f64(cl.fit);
        out.u64(cl.num);
        out.u64(cl.exp);
        out.f64(cl.set_size);
        out.u64(cl.ts);
        out.u64(cl.age);
        out.u64(cl.mtotal);
    }
}

Population read_population(BinaryReader& in) {
    Population pop;
    pop.trial = in.u64();
    const auto n = in.u64();
    if (n > (std::uint64_t{1} << 24)) throw FormatError("implausible population size");
    pop.members.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < n; ++i) {
        Classifier cl;
        cl.condition = read_network(in);
        cl.prediction = read_network(in);
        cl.err = in.f64();
        cl.fit = in.f64();
        cl.num = in.u64();
        cl.exp = in.u64();
        cl.set_size = in.f64();
        cl.ts = in.u64();
        cl.age = in.u64();
        cl.mtotal = in.u64();
        if (cl.num == 0) throw FormatError("classifier with zero numerosity");
        pop.members.push_back(std::move(cl));
    }
    return pop;
}

}  // namespace xcsf
