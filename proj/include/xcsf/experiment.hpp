#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xcsf/classifier_system.hpp"
#include "xcsf/config.hpp"
#include "xcsf/data.hpp"
#include "xcsf/metrics.hpp"
#include "xcsf/rng.hpp"

namespace xcsf {

/// Stream identifiers for derive_seed(); each consumer owns its generator.
enum RngStream : std::uint64_t {
    kStreamTraining = 0,
    kStreamSplit = 1,
    kStreamCorruption = 2,
};

/// A training run: config, split dataset, population, generator and the
/// partially filled measurement window. Fully determined by (config, dataset).
class Experiment {
public:
    /// Fresh run on an already loaded (unsplit) dataset.
    Experiment(ExperimentConfig cfg, Dataset ds);

    /// Fresh run, loading the dataset named by the config.
    static Experiment from_config(ExperimentConfig cfg);

    /// Restores a checkpoint. The dataset is reloaded from the stored config
    /// unless supplied, and must match the recorded fingerprint.
    static Experiment load(const std::filesystem::path& checkpoint,
                           std::optional<Dataset> dataset = std::nullopt);

    /// Writes the checkpoint atomically (temporary file + rename).
    void save(const std::filesystem::path& checkpoint) const;

    /// Measurement for the current state. Outside of training (empty
    /// window) the training error and match-set size come from a read-only
    /// pass over the training split.
    Checkpoint measure();

    /// Runs `trials` learning trials, calling `on_checkpoint` at every
    /// multiple of checkpoint_interval.
    void train(std::uint64_t trials, const std::function<void(const Checkpoint&)>& on_checkpoint = {});

    /// Mean system-prediction MSE over the given rows (no learning).
    double evaluate(std::span<const std::size_t> rows) const;

    const ExperimentConfig& config() const { return cfg_; }
    const Dataset& dataset() const { return ds_; }
    const Population& population() const { return pop_; }
    Population& population() { return pop_; }
    std::uint64_t trial() const { return pop_.trial; }
    const Rng& rng() const { return rng_; }

private:
    Experiment() = default;

    ExperimentConfig cfg_;
    Dataset ds_;
    Population pop_;
    Rng rng_;
    double window_mse_ = 0.0;
    double window_match_ = 0.0;
    std::uint64_t window_count_ = 0;
};

struct RunOutputs {
    std::filesystem::path metrics_csv;
    std::filesystem::path checkpoint;
    std::filesystem::path manifest;
};

RunOutputs run_outputs(const std::filesystem::path& dir);

/// Output directory: $XCSF_OUTPUT_DIR when set, else `fallback`.
std::filesystem::path output_dir(const std::filesystem::path& fallback);

/// Trains for cfg.trials, writing metrics.csv (header, the initial
/// measurement and one row per checkpoint), population.ckpt and
/// manifest.json into `dir`. Returns the measurement stream.
std::vector<Checkpoint> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);

/// Continues a checkpointed run for `extra_trials`, appending rows to the
/// metrics.csv in `dir` and overwriting the checkpoint there.
std::vector<Checkpoint> resume_experiment(const std::filesystem::path& checkpoint,
                                          std::uint64_t extra_trials,
                                          const std::filesystem::path& dir);

enum class CorruptionKind { None, SaltPepper, Cutout };

struct Corruption {
    CorruptionKind kind = CorruptionKind::None;
    double fraction = 0.0;  // salt-and-pepper only
};

struct ReconstructionReport {
    std::size_t samples = 0;
    bool used_validation_split = false;
    double reconstruction_mse = 0.0;  // reconstruction of corrupted input vs clean original
    double corrupted_mse = 0.0;       // corrupted input vs clean original
    std::vector<double> per_sample_reconstruction;
    std::vector<double> per_sample_corrupted;
    std::size_t images_written = 0;
    std::optional<std::string> image_error;  // set when images were requested but cannot be written
};

/// Reconstructs corrupted instances with a trained population. Uses the
/// run's validation split when the dataset matches the checkpoint, else every
/// row. Writes original/corrupted/reconstruction graymaps for the first
/// `max_images` samples when `image_dir` is given. A dataset without an image
/// shape still yields the numeric report, with image_error set.
ReconstructionReport reconstruct(const Experiment& exp, const Dataset& data,
                                 const Corruption& corruption,
                                 const std::optional<std::filesystem::path>& image_dir,
                                 std::size_t max_images);

/// Binary portable graymap (P5, maxval 255), value = round(v * 255).
void write_pgm(const std::filesystem::path& path, std::span<const double> pixels, std::size_t width,
               std::size_t height);

}  // namespace xcsf
