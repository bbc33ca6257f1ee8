#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace xcsf {

/// Seedable pseudo-random source shared by every stochastic operator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform and Gaussian variates are derived here rather than
/// through <random> distributions (whose algorithms are implementation
/// defined), so a given seed yields the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);

    /// Standard normal variate (Box-Muller, one value per call).
    double normal();

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Textual engine state, suitable for checkpointing.
    std::string state() const;
    void set_state(const std::string& s);

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent seed for a named sub-stream (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace xcsf
