#include "gsae/training.hpp"
#include "gsae/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsae {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) {
        throw Error(ErrorKind::config, "learning_rate must be positive");
    }
    if (decay < 0) {
        throw Error(ErrorKind::config, "decay must be non-negative");
    }
    if (momentum < 0 || momentum >= 1) {
        throw Error(ErrorKind::config, "momentum must lie in [0, 1)");
    }
    if (batch_size < 1) {
        throw Error(ErrorKind::config, "batch_size must be at least 1");
    }
    if (!(val_fraction > 0 && val_fraction < 1)) {
        throw Error(ErrorKind::config, "val_fraction must lie strictly between 0 and 1");
    }
    if (patience < 1) {
        throw Error(ErrorKind::config, "patience must be at least 1");
    }
}

OptimizerState OptimizerState::zeros_like(const Model& model) {
    OptimizerState state;
    for (const auto& layer : model.layers) {
        state.weight_velocity.push_back(Eigen::MatrixXd::Zero(layer.out_dim(), layer.in_dim()));
        state.bias_velocity.push_back(Eigen::VectorXd::Zero(layer.out_dim()));
    }
    return state;
}

namespace {

template<class Matrix>
void round_to_float(Matrix& values) {
    values = values.template cast<float>().template cast<double>();
}

}

void sgd_step(Model& model, OptimizerState& state, const Gradients& grads, const TrainConfig& config) {
    const auto nlayers = model.layers.size();
    if (grads.weights.size() != nlayers || grads.biases.size() != nlayers || state.weight_velocity.size() != nlayers) {
        throw Error(ErrorKind::shape, "gradient or optimizer state does not match the model");
    }
    for (std::size_t l = 0; l < nlayers; ++l) {
        if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite()) {
            throw Error(ErrorKind::training, "non-finite gradient in layer " + std::to_string(l) + " at iteration " + std::to_string(state.iterations) +
                " (max |w| = " + std::to_string(model.layers[l].weights.cwiseAbs().maxCoeff()) + ")");
        }
    }

    const double rate = config.learning_rate / (1.0 + config.decay * static_cast<double>(state.iterations));
    for (std::size_t l = 0; l < nlayers; ++l) {
        auto& layer = model.layers[l];
        auto& vw = state.weight_velocity[l];
        auto& vb = state.bias_velocity[l];
        vw = config.momentum * vw - rate * grads.weights[l];
        vb = config.momentum * vb - rate * grads.biases[l];
        if (config.nesterov) {
            layer.weights += config.momentum * vw - rate * grads.weights[l];
            layer.bias += config.momentum * vb - rate * grads.biases[l];
        } else {
            layer.weights += vw;
            layer.bias += vb;
        }
        if (config.float32) {
            round_to_float(vw);
            round_to_float(vb);
            round_to_float(layer.weights);
            round_to_float(layer.bias);
        }
        apply_mask(layer, vw);
        apply_mask(layer, layer.weights);
    }
    ++state.iterations;
}

namespace {

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& values, const std::size_t* begin, const std::size_t* end) {
    Eigen::MatrixXd output(values.rows(), static_cast<Eigen::Index>(end - begin));
    for (Eigen::Index c = 0; begin != end; ++begin, ++c) {
        output.col(c) = values.col(static_cast<Eigen::Index>(*begin));
    }
    return output;
}

}

TrainHistory train(Model& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, const TrainConfig& config) {
    config.validate();
    model.validate();
    if (inputs.cols() != targets.cols()) {
        throw Error(ErrorKind::shape, "inputs and targets have different numbers of samples");
    }
    if (targets.rows() != model.output_dim()) {
        throw Error(ErrorKind::shape, "target rows differ from the model output width");
    }

    const auto nsamples = static_cast<std::size_t>(inputs.cols());
    const auto ntrain = static_cast<std::size_t>(std::floor(static_cast<double>(nsamples) * (1.0 - config.val_fraction)));
    const auto nval = nsamples - ntrain;
    if (nval < 2) {
        throw Error(ErrorKind::config, "validation split of " + std::to_string(nsamples) + " samples leaves " + std::to_string(nval) + " (need at least 2)");
    }
    if (ntrain < 1) {
        throw Error(ErrorKind::config, "validation split leaves no training samples");
    }

    Rng rng(config.seed);
    std::vector<std::size_t> order(nsamples);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nval));
    std::vector<std::size_t> training(order.begin() + static_cast<std::ptrdiff_t>(nval), order.end());
    std::sort(validation.begin(), validation.end());
    std::sort(training.begin(), training.end());

    const auto val_inputs = gather_columns(inputs, validation.data(), validation.data() + validation.size());
    const auto val_targets = gather_columns(targets, validation.data(), validation.data() + validation.size());

    if (config.center_inputs) {
        model.input_center = gather_columns(inputs, training.data(), training.data() + training.size()).rowwise().mean();
        if (config.float32) {
            model.input_center = model.input_center.cast<float>().cast<double>();
        }
    } else {
        model.input_center.resize(0);
    }

    OptimizerState state = OptimizerState::zeros_like(model);
    EarlyStopping stopper(config.patience);
    TrainHistory history;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(training));
        double epoch_loss = 0;
        for (std::size_t start = 0; start < ntrain; start += config.batch_size) {
            const auto stop = std::min(ntrain, start + config.batch_size);
            const auto* first = training.data() + start;
            const auto* last = training.data() + stop;
            const auto batch_inputs = gather_columns(inputs, first, last);
            const auto batch_targets = gather_columns(targets, first, last);

            const auto pass = forward(model, batch_inputs);
            epoch_loss += loss(model.head, pass.output(), batch_targets) * static_cast<double>(stop - start);
            const auto grads = backward(model, pass, batch_targets);
            try {
                sgd_step(model, state, grads, config);
            } catch (const Error& error) {
                throw Error(ErrorKind::training, std::string(error.what()) + " during epoch " + std::to_string(epoch + 1) +
                    ", batch starting at " + std::to_string(start));
            }
        }

        history.train_loss.push_back(epoch_loss / static_cast<double>(ntrain));
        const double val_loss = loss(model.head, forward(model, val_inputs).output(), val_targets);
        history.validation_loss.push_back(val_loss);
        if (stopper.update(val_loss)) {
            history.stopped_early = true;
            break;
        }
    }
    return history;
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int num_classes) {
    Eigen::MatrixXd output = Eigen::MatrixXd::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= num_classes) {
            throw Error(ErrorKind::domain, "class label " + std::to_string(labels[i]) + " out of range");
        }
        output(labels[i], static_cast<Eigen::Index>(i)) = 1;
    }
    return output;
}

std::vector<int> predict_classes(const Model& model, const Eigen::MatrixXd& inputs) {
    const auto pass = forward(model, inputs);
    std::vector<int> output(static_cast<std::size_t>(inputs.cols()));
    for (Eigen::Index c = 0; c < inputs.cols(); ++c) {
        Eigen::Index best = 0;
        pass.output().col(c).maxCoeff(&best);
        output[static_cast<std::size_t>(c)] = static_cast<int>(best);
    }
    return output;
}

Encoding encode(const Model& model, const Eigen::MatrixXd& inputs) {
    if (model.layers.size() < 2) {
        throw Error(ErrorKind::config, "encoding needs a model with a gene-set and a superset layer");
    }
    const auto pass = forward(model, inputs);
    return Encoding{pass.activations[1], pass.activations[2]};
}

Encoding encode(const Model& model, const ExpressionMatrix& data) {
    if (data.gene_ids != model.input_ids) {
        throw Error(ErrorKind::consistency, "expression genes do not match the model's input genes (same symbols in the same order are required)");
    }
    return encode(model, data.values);
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t k, Rng& rng) {
    if (k < 2) {
        throw Error(ErrorKind::config, "cross-validation needs at least 2 folds");
    }
    int max_label = -1;
    for (auto label : labels) {
        if (label < 0) {
            throw Error(ErrorKind::domain, "negative class label");
        }
        max_label = std::max(max_label, label);
    }

    std::vector<std::size_t> fold(labels.size());
    std::size_t next = 0;
    for (int c = 0; c <= max_label; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) {
                members.push_back(i);
            }
        }
        if (members.empty()) {
            continue;
        }
        if (members.size() < k) {
            throw Error(ErrorKind::config, "class " + std::to_string(c) + " has " + std::to_string(members.size()) + " members, fewer than the " + std::to_string(k) + " folds");
        }
        rng.shuffle(std::span<std::size_t>(members));
        for (auto m : members) {
            fold[m] = next % k;
            ++next;
        }
    }
    return fold;
}

CrossValidation kfold_cv(const Eigen::MatrixXd& inputs, const std::vector<int>& labels, int num_classes, std::size_t k, const ModelFactory& factory, const TrainConfig& config) {
    if (static_cast<Eigen::Index>(labels.size()) != inputs.cols()) {
        throw Error(ErrorKind::shape, "one label per sample is required");
    }
    Rng rng(config.seed);
    const auto folds = stratified_folds(labels, k, rng);
    const auto targets = one_hot(labels, num_classes);

    CrossValidation output;
    output.predictions.assign(labels.size(), -1);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < folds.size(); ++i) {
            (folds[i] == f ? test_idx : train_idx).push_back(i);
        }
        auto model_rng = rng.split();
        Model model = factory(model_rng);
        TrainConfig fold_config = config;
        fold_config.seed = rng.next();
        train(model, gather_columns(inputs, train_idx.data(), train_idx.data() + train_idx.size()),
              gather_columns(targets, train_idx.data(), train_idx.data() + train_idx.size()), fold_config);

        const auto predicted = predict_classes(model, gather_columns(inputs, test_idx.data(), test_idx.data() + test_idx.size()));
        std::size_t correct = 0;
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
            output.predictions[test_idx[i]] = predicted[i];
            correct += (predicted[i] == labels[test_idx[i]]);
        }
        output.fold_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(test_idx.size()));
    }
    output.accuracy = std::accumulate(output.fold_accuracy.begin(), output.fold_accuracy.end(), 0.0) / static_cast<double>(k);
    return output;
}

}
