#ifndef GSAE_SYNTH_HPP
#define GSAE_SYNTH_HPP

#include "dataio.hpp"

#include <cstdint>
#include <string>
#include <vector>

/**
 * @file synth.hpp
 * @brief Synthetic expression, gene sets and survival with planted ground truth.
 *
 * Genes are split into `n_sets` disjoint blocks, one per gene set. Every set has a per-sample latent factor
 * shared by its genes, so genes of a set are correlated. Expression of gene g in sample s is
 * `base_g + loading_g * factor[set(g), s] + noise`, clamped at 0.
 *
 * Groups: group 0 is the reference; group k >= 1 has `n_planted` sets of its own (sets `(k - 1) * n_planted` onward)
 * whose genes are shifted up by `effect` within-group standard deviations.
 *
 * Survival: exponential event times with log-hazard `hazard_strength * h_s`, where `h_s` is the latent factor of the
 * hazard set (`hazard_link == single`) or a shared factor driving `n_hazard_sets` correlated sets (`distributed`).
 * Censoring times are uniform on [0, censor_max_days].
 */

namespace gsae {

enum class HazardLink { none, single, distributed };

const char* hazard_link_name(HazardLink link);
HazardLink parse_hazard_link(const std::string& name);

struct SynthConfig {
    std::size_t n_samples = 200;
    std::size_t n_genes = 300;
    std::size_t n_sets = 30;
    /// Relative group sizes; the number of entries is the number of groups.
    std::vector<double> group_proportions{0.7, 0.3};
    std::size_t n_planted = 5;
    double effect = 2.0;
    HazardLink hazard_link = HazardLink::none;
    std::size_t n_hazard_sets = 5;
    double hazard_strength = 1.0;
    /// Correlation of each hazard set's factor with the shared factor (distributed link only).
    double hazard_correlation = 0.5;
    double baseline_median_days = 900;
    double censor_max_days = 3000;
    double noise_sd = 0.5;
    double loading = 0.8;
    std::uint64_t seed = 17;
};

struct SynthData {
    ExpressionMatrix expression;
    GeneSetCollection collection;
    /// Columns `group` (class name) plus survival; capped at the default 1825 days.
    ClinicalTable clinical;
    std::vector<int> groups;
    std::vector<std::string> group_names;
    /// Planted sets of each group (empty for group 0).
    std::vector<std::vector<std::string> > planted_sets;
    std::vector<std::string> hazard_sets;
};

SynthData synthesize(const SynthConfig& config);

}

#endif
