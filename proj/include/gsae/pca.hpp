#ifndef GSAE_PCA_HPP
#define GSAE_PCA_HPP

#include <Eigen/Dense>

/**
 * @file pca.hpp
 * @brief Principal components of a features x samples matrix.
 */

namespace gsae {

struct PcaResult {
    /// Feature means subtracted before decomposition.
    Eigen::VectorXd center;
    /// Orthonormal loadings, features x k, by decreasing variance.
    Eigen::MatrixXd components;
    /// `components^T * centered data`, k x samples.
    Eigen::MatrixXd scores;
    /// Variance captured by each component (n - 1 denominator).
    Eigen::VectorXd explained_variance;
    /// True when fewer than the requested number of components exist.
    bool truncated_to_rank = false;
};

/**
 * Each feature (row) is centered across samples, then decomposed by SVD.
 * When `k` exceeds the numerical rank, only rank-many components are returned and `truncated_to_rank` is set.
 */
PcaResult pca(const Eigen::MatrixXd& data, Eigen::Index k);

/// Scores of new samples (features x n) on fitted components.
Eigen::MatrixXd pca_project(const PcaResult& fit, const Eigen::MatrixXd& data);

}

#endif
