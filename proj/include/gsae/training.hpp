#ifndef GSAE_TRAINING_HPP
#define GSAE_TRAINING_HPP

#include "dataio.hpp"
#include "model.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

/**
 * @file training.hpp
 * @brief Nesterov-momentum SGD with time-based learning-rate decay, early stopping, encoding and stratified cross-validation.
 */

namespace gsae {

struct TrainConfig {
    double learning_rate = 0.05;
    double decay = 1e-6;
    double momentum = 0.9;
    bool nesterov = true;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    double val_fraction = 0.05;
    std::size_t patience = 3;
    std::uint64_t seed = 0;
    /// Round parameters, velocities and gradients to single precision after every update.
    bool float32 = false;
    /// Fit the model's input center to the per-feature means of the training split before the first epoch.
    bool center_inputs = true;

    /// Throws a config error on out-of-range values.
    void validate() const;
};

/**
 * Velocities with the same shapes as the model's parameters.
 */
struct OptimizerState {
    std::vector<Eigen::MatrixXd> weight_velocity;
    std::vector<Eigen::VectorXd> bias_velocity;
    std::int64_t iterations = 0;

    static OptimizerState zeros_like(const Model& model);
};

/**
 * One update: `lr_t = lr / (1 + decay * iterations)`, `v = momentum * v - lr_t * g`, then
 * `p += momentum * v - lr_t * g` (Nesterov) or `p += v`.
 * Off-mask weights and velocities are re-zeroed afterwards. Throws a training error on a non-finite gradient.
 */
void sgd_step(Model& model, OptimizerState& state, const Gradients& grads, const TrainConfig& config);

/**
 * Stops after `patience` consecutive epochs whose validation loss is not strictly below the best so far.
 */
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : my_patience(patience) {}

    /// Record one epoch's validation loss; returns true when training should stop.
    bool update(double validation_loss) {
        if (validation_loss < my_best) {
            my_best = validation_loss;
            my_wait = 0;
            return false;
        }
        ++my_wait;
        return my_wait >= my_patience;
    }

    double best() const { return my_best; }
    std::size_t wait() const { return my_wait; }

private:
    std::size_t my_patience;
    double my_best = std::numeric_limits<double>::infinity();
    std::size_t my_wait = 0;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    bool stopped_early = false;

    std::size_t epochs() const { return train_loss.size(); }
};

/**
 * Train `model` in place on `inputs -> targets` (samples in columns).
 * A seeded shuffle holds out `val_fraction` of the samples; the model keeps its final-epoch parameters.
 * With `center_inputs` the input center is set from the training split, otherwise it is cleared.
 * Throws a config error when fewer than two samples would be held out.
 */
TrainHistory train(Model& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const TrainConfig& config);

/// `num_classes x labels.size()` indicator matrix.
Eigen::MatrixXd one_hot(const std::vector<int>& labels, int num_classes);

/// Index of the most probable class of each column.
std::vector<int> predict_classes(const Model& model, const Eigen::MatrixXd& inputs);

struct Encoding {
    /// Gene-set layer outputs, sets x samples.
    Eigen::MatrixXd geneset;
    /// Superset layer outputs, supersets x samples.
    Eigen::MatrixXd superset;
};

/**
 * Outputs of the first two layers.
 * Throws a consistency error if the matrix genes differ from the model's input genes.
 */
Encoding encode(const Model& model, const ExpressionMatrix& data);
Encoding encode(const Model& model, const Eigen::MatrixXd& inputs);

struct CrossValidation {
    double accuracy = 0;
    std::vector<double> fold_accuracy;
    /// Held-out prediction for every sample.
    std::vector<int> predictions;
};

using ModelFactory = std::function<Model(Rng&)>;

/**
 * Stratified k-fold cross-validation. Each fold trains a fresh model from `factory`.
 * Throws a config error if any class has fewer than `k` members.
 */
CrossValidation kfold_cv(const Eigen::MatrixXd& inputs, const std::vector<int>& labels, int num_classes, std::size_t k, const ModelFactory& factory, const TrainConfig& config);

/// Fold index of every sample; classes are shuffled separately then dealt round-robin.
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t k, Rng& rng);

}

#endif
