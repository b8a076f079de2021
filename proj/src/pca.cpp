#include "gsae/pca.hpp"
#include "gsae/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <limits>

namespace gsae {

PcaResult pca(const Eigen::MatrixXd& data, Eigen::Index k) {
    if (k < 1) {
        throw Error(ErrorKind::config, "number of principal components must be positive");
    }
    if (data.cols() < 2 || data.rows() < 1) {
        throw Error(ErrorKind::shape, "PCA needs at least one feature and two samples");
    }

    PcaResult output;
    output.center = data.rowwise().mean();
    const Eigen::MatrixXd centered = data.colwise() - output.center;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const auto& singular = svd.singularValues();

    const double tolerance = (singular.size() ? singular(0) : 0.0) * static_cast<double>(std::max(data.rows(), data.cols())) * std::numeric_limits<double>::epsilon();
    Eigen::Index rank = 0;
    while (rank < singular.size() && singular(rank) > tolerance) {
        ++rank;
    }

    Eigen::Index keep = k;
    if (keep > rank) {
        keep = rank;
        output.truncated_to_rank = true;
    }

    output.components = svd.matrixU().leftCols(keep);
    // Fix signs so the largest-magnitude loading of each component is positive.
    for (Eigen::Index c = 0; c < keep; ++c) {
        Eigen::Index top = 0;
        output.components.col(c).cwiseAbs().maxCoeff(&top);
        if (output.components(top, c) < 0) {
            output.components.col(c) *= -1;
        }
    }
    output.scores = output.components.transpose() * centered;
    output.explained_variance = singular.head(keep).array().square() / static_cast<double>(data.cols() - 1);
    return output;
}

Eigen::MatrixXd pca_project(const PcaResult& fit, const Eigen::MatrixXd& data) {
    if (data.rows() != fit.center.size()) {
        throw Error(ErrorKind::shape, "projected data has a different number of features");
    }
    return fit.components.transpose() * (data.colwise() - fit.center);
}

}
