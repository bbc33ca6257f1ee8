#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace xcsf {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Mode : std::uint8_t {
    Xcsf = 0,      // niched population, conditions evolve
    GlobalEa = 1,  // every condition matches every input
};

enum class DataFormat : std::uint8_t { Auto = 0, Csv = 1, Idx = 2 };

struct ImageShape {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;

    std::size_t size() const { return height * width * channels; }
    friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

inline constexpr std::size_t kUnboundedHidden = std::numeric_limits<std::size_t>::max();

/// Learning parameters (names follow the usual XCSF symbols) plus run settings.
struct ExperimentConfig {
    // Classifier system.
    std::size_t N = 500;
    bool P_init = true;
    double epsilon0 = 0.01;
    double beta = 0.1;
    double alpha = 1.0;
    double nu = 10.0;
    double delta = 0.1;
    std::uint64_t theta_del = 20;
    double F_I = 0.01;
    double epsilon_I = 0.0;
    double F_R = 0.1;
    double epsilon_R = 1.0;
    std::uint64_t theta_EA = 50;
    std::size_t lambda = 2;
    double chi = 0.0;
    double mu_min = 1e-4;
    double omega = 0.9;
    std::size_t h_I = 1;
    std::size_t h_M = 5;
    std::size_t h_max = kUnboundedHidden;
    bool connection_mutation = false;
    Mode mode = Mode::Xcsf;
    std::uint64_t stale_limit = 10000;
    double match_threshold = 0.5;
    double init_sigma = 0.1;
    double cover_sigma = 1.0;
    std::uint64_t cover_max_attempts = 1000000;

    // Run.
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;
    std::uint64_t checkpoint_interval = 1000;
    std::string dataset;
    DataFormat dataset_format = DataFormat::Auto;
    bool has_label_column = false;
    std::optional<ImageShape> image_shape;
    double train_ratio = 0.9;
    std::string output_dir = "out";

    /// Throws ConfigError if any value is outside its documented range.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses flat `key = value` text. Blank lines and `#` comments are ignored;
/// unknown or repeated keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& cfg);

std::string to_string(Mode m);

}  // namespace xcsf
