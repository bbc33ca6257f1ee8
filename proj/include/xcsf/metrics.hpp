#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xcsf/classifier_system.hpp"

namespace xcsf {

/// One row of the measurement stream.
struct Checkpoint {
    std::uint64_t trial = 0;
    double train_mse = 0.0;
    double valid_mse = 0.0;
    double mfrac = 0.0;
    double C_h = 0.0;  // mean condition hidden neurons
    double P_h = 0.0;  // mean prediction hidden neurons
    double C_w = 0.0;  // mean active condition weights per classifier
    double P_w = 0.0;  // mean active prediction weights per classifier
    double C_w_total = 0.0;  // active condition weights summed over micro-classifiers
    double P_w_total = 0.0;
    double M_size = 0.0;  // mean micro match-set size
    std::uint64_t macro_count = 0;
    std::array<double, 4> mean_mu{};
    double mean_eta = 0.0;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

double mse(std::span<const double> a, std::span<const double> b);

/// Composite Simpson estimate of the area under equally spaced samples
/// (unit spacing, i.e. the x-axis is measured in checkpoints). For an even
/// number of samples Simpson covers the largest odd prefix and the last
/// interval uses the trapezoid rule. Throws for fewer than 3 samples.
double auc_simpson(std::span<const double> values);

/// Numerosity-weighted structural statistics of the population. The error,
/// match-set and mfrac fields are left for the caller.
Checkpoint population_stats(const Population& pop);

std::string checkpoint_csv_header();
std::string checkpoint_csv_row(const Checkpoint& c);
Checkpoint parse_checkpoint_csv_row(const std::string& line);

}  // namespace xcsf
