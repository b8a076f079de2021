#ifndef GSAE_EMBED_HPP
#define GSAE_EMBED_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

/**
 * @file embed.hpp
 * @brief Exact t-SNE and DBSCAN, used to find sample groups in superset space.
 *
 * Points are rows.
 */

namespace gsae {

struct TsneOptions {
    double perplexity = 30;
    int iterations = 1000;
    /// Non-positive selects `max(n / (4 * exaggeration), 50)`.
    double learning_rate = 0;
    double exaggeration = 12;
    /// Early exaggeration and the low momentum (0.5) apply before this iteration; momentum is 0.8 after.
    int exaggeration_iterations = 250;
    /// If positive and smaller than the input dimension, project onto this many principal components first.
    int pca_dims = 0;
    std::uint64_t seed = 0;
};

struct TsneResult {
    Eigen::MatrixXd embedding;
    /// KL divergence right after early exaggeration ends.
    double kl_initial = 0;
    double kl_final = 0;
};

/**
 * Per-point Gaussian bandwidths are matched to the perplexity by binary search (entropy tolerance 1e-5, at most 50 steps),
 * affinities are symmetrized, and the 2-D embedding follows gradient descent with momentum and per-coordinate gains.
 * Throws a config error if there are fewer than `3 * perplexity` points.
 */
TsneResult tsne_exact(const Eigen::MatrixXd& points, const TsneOptions& options);

/// KL(P || Q) of an embedding given the joint affinities of the input.
double tsne_kl(const Eigen::MatrixXd& affinities, const Eigen::MatrixXd& embedding);

/// Symmetrized joint affinities `P` at the given perplexity.
Eigen::MatrixXd tsne_affinities(const Eigen::MatrixXd& points, double perplexity);

inline constexpr int noise_label = -1;

/**
 * Density clustering with Euclidean distance `<= eps`; a point with at least `min_pts` neighbours (itself included) is a core point.
 * Clusters are numbered from 0 in order of discovery; points reachable from no core point are labelled `noise_label`.
 */
std::vector<int> dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_pts);

}

#endif
