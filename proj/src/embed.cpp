#include "gsae/embed.hpp"
#include "gsae/errors.hpp"
#include "gsae/pca.hpp"
#include "gsae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace gsae {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points) {
    const Eigen::VectorXd norms = points.rowwise().squaredNorm();
    Eigen::MatrixXd output = -2.0 * points * points.transpose();
    output.colwise() += norms;
    output.rowwise() += norms.transpose();
    output = output.cwiseMax(0.0);
    output.diagonal().setZero();
    return output;
}

constexpr double affinity_floor = 1e-12;

}

Eigen::MatrixXd tsne_affinities(const Eigen::MatrixXd& points, double perplexity) {
    const auto n = points.rows();
    const auto distances = squared_distances(points);
    const double target = std::log(perplexity);
    Eigen::MatrixXd conditional = Eigen::MatrixXd::Zero(n, n);

    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1, lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
        Eigen::VectorXd row(n);
        for (int step = 0; step < 50; ++step) {
            double sum = 0, weighted = 0;
            for (Eigen::Index j = 0; j < n; ++j) {
                row(j) = (j == i) ? 0.0 : std::exp(-beta * distances(i, j));
                sum += row(j);
                weighted += row(j) * distances(i, j);
            }
            if (sum <= 0) {
                sum = std::numeric_limits<double>::min();
            }
            const double entropy = std::log(sum) + beta * weighted / sum;
            row /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < 1e-5) {
                break;
            }
            if (diff > 0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = std::isinf(lo) ? beta / 2 : 0.5 * (beta + lo);
            }
        }
        conditional.row(i) = row.transpose();
    }

    Eigen::MatrixXd joint = conditional + conditional.transpose();
    joint /= joint.sum();
    return joint.cwiseMax(affinity_floor);
}

double tsne_kl(const Eigen::MatrixXd& affinities, const Eigen::MatrixXd& embedding) {
    Eigen::MatrixXd num = (1.0 + squared_distances(embedding).array()).inverse().matrix();
    num.diagonal().setZero();
    const double total = num.sum();
    double kl = 0;
    for (Eigen::Index i = 0; i < num.rows(); ++i) {
        for (Eigen::Index j = 0; j < num.cols(); ++j) {
            if (i != j) {
                const double q = std::max(num(i, j) / total, affinity_floor);
                kl += affinities(i, j) * std::log(affinities(i, j) / q);
            }
        }
    }
    return kl;
}

TsneResult tsne_exact(const Eigen::MatrixXd& points, const TsneOptions& options) {
    const auto n = points.rows();
    if (!(options.perplexity > 0) || static_cast<double>(n) < 3 * options.perplexity) {
        throw Error(ErrorKind::config, "t-SNE with perplexity " + std::to_string(options.perplexity) + " needs at least " +
            std::to_string(static_cast<long>(std::ceil(3 * options.perplexity))) + " points, got " + std::to_string(n));
    }

    Eigen::MatrixXd input = points;
    if (options.pca_dims > 0 && options.pca_dims < points.cols()) {
        input = pca(points.transpose(), options.pca_dims).scores.transpose();
    }

    const Eigen::MatrixXd affinities = tsne_affinities(input, options.perplexity);
    Eigen::MatrixXd p = affinities * options.exaggeration;

    Rng rng(options.seed);
    Eigen::MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i, 0) = rng.normal(0, 1e-4);
        y(i, 1) = rng.normal(0, 1e-4);
    }
    const double rate = options.learning_rate > 0 ? options.learning_rate : std::max(static_cast<double>(n) / (4 * options.exaggeration), 50.0);
    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);

    TsneResult output;
    for (int iter = 0; iter < options.iterations; ++iter) {
        if (iter == options.exaggeration_iterations) {
            p = affinities;
            output.kl_initial = tsne_kl(affinities, y);
        }

        Eigen::MatrixXd num = (1.0 + squared_distances(y).array()).inverse().matrix();
        num.diagonal().setZero();
        const Eigen::MatrixXd q = (num / num.sum()).cwiseMax(affinity_floor);
        const Eigen::MatrixXd stiffness = ((p - q).array() * num.array()).matrix();

        // dY_i = 4 * sum_j stiffness_ij (y_i - y_j)
        const Eigen::VectorXd row_sums = stiffness.rowwise().sum();
        const Eigen::MatrixXd gradient = 4.0 * (row_sums.asDiagonal() * y - stiffness * y);

        const double momentum = iter < options.exaggeration_iterations ? 0.5 : 0.8;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index d = 0; d < 2; ++d) {
                const bool same_sign = (gradient(i, d) > 0) == (velocity(i, d) > 0);
                gains(i, d) = same_sign ? std::max(gains(i, d) * 0.8, 0.01) : gains(i, d) + 0.2;
            }
        }
        velocity = momentum * velocity - rate * gains.cwiseProduct(gradient);
        y += velocity;
        y.rowwise() -= y.colwise().mean();
    }

    if (options.iterations <= options.exaggeration_iterations) {
        output.kl_initial = tsne_kl(affinities, y);
    }
    output.kl_final = tsne_kl(affinities, y);
    output.embedding = std::move(y);
    return output;
}

std::vector<int> dbscan(const Eigen::MatrixXd& points, double eps, std::size_t min_pts) {
    if (!(eps > 0)) {
        throw Error(ErrorKind::config, "DBSCAN eps must be positive");
    }
    if (min_pts < 1) {
        throw Error(ErrorKind::config, "DBSCAN min_pts must be at least 1");
    }

    const auto n = points.rows();
    const double eps2 = eps * eps;
    std::vector<std::vector<Eigen::Index> > neighbours(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if ((points.row(i) - points.row(j)).squaredNorm() <= eps2) {
                neighbours[static_cast<std::size_t>(i)].push_back(j);
            }
        }
    }

    constexpr int unvisited = -2;
    std::vector<int> labels(static_cast<std::size_t>(n), unvisited);
    int cluster = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        if (labels[si] != unvisited) {
            continue;
        }
        if (neighbours[si].size() < min_pts) {
            labels[si] = noise_label;
            continue;
        }

        labels[si] = cluster;
        std::deque<Eigen::Index> frontier(neighbours[si].begin(), neighbours[si].end());
        while (!frontier.empty()) {
            const auto j = static_cast<std::size_t>(frontier.front());
            frontier.pop_front();
            if (labels[j] == noise_label) {
                labels[j] = cluster;
            }
            if (labels[j] != unvisited) {
                continue;
            }
            labels[j] = cluster;
            if (neighbours[j].size() >= min_pts) {
                frontier.insert(frontier.end(), neighbours[j].begin(), neighbours[j].end());
            }
        }
        ++cluster;
    }
    return labels;
}

}
