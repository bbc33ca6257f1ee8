#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xcsf/config.hpp"
#include "xcsf/rng.hpp"

namespace xcsf {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major feature matrix with every value in [0, 1].
struct Dataset {
    std::vector<double> features;
    std::size_t rows = 0;
    std::size_t n = 0;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> valid_idx;
    std::optional<ImageShape> image_shape;

    std::span<const double> row(std::size_t r) const { return {features.data() + r * n, n}; }

    /// FNV-1a over dimensions and feature bit patterns.
    std::uint64_t fingerprint() const;
};

/// Parses a numeric CSV. A non-numeric first line is treated as a header.
/// Values are scaled into [0, 1]: data already in [0, 1] is kept, data with a
/// maximum above 1 is divided by the global maximum, and data containing
/// negative values is min-max scaled.
Dataset load_csv(const std::string& path, bool has_label_column);
Dataset parse_csv(const std::string& text, bool has_label_column);

/// Reads an IDX uint8 image tensor (magic 0x00000803), scaling pixels by 1/255.
Dataset load_idx(const std::string& path);
Dataset parse_idx(std::span<const std::uint8_t> bytes);

/// Loads per the config's dataset path, format and image shape (no split).
Dataset load_dataset(const ExperimentConfig& cfg);

/// Uniformly random train/validation partition; floor(ratio * rows) rows
/// go to training.
void split(Dataset& ds, double ratio, Rng& rng);

/// Sets round(fraction * n) distinct positions to 0 or 1 with equal probability.
std::vector<double> salt_pepper(std::span<const double> x, double fraction, Rng& rng);

struct CutoutOptions {
    double min_side = 0.25;  // fraction of the image side
    double max_side = 0.5;
};

/// Zeroes a random axis-aligned rectangle across all channels. Channel
/// planes are stored one after another (channel-major).
std::vector<double> cutout(std::span<const double> x, const std::optional<ImageShape>& shape,
                           Rng& rng, const CutoutOptions& opts = {});

/// Zeroes the rectangle [top, top+h) x [left, left+w) in every channel.
std::vector<double> cutout_at(std::span<const double> x, const ImageShape& shape, std::size_t top,
                              std::size_t left, std::size_t h, std::size_t w);

}  // namespace xcsf
