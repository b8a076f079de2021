#include "gsae/model.hpp"
#include "gsae/errors.hpp"

#include <cmath>

namespace gsae {

const char* layer_kind_name(LayerKind kind) {
    return kind == LayerKind::masked ? "masked" : "dense";
}

const char* activation_name(Activation activation) {
    switch (activation) {
        case Activation::relu: return "relu";
        case Activation::linear: return "linear";
        case Activation::softmax: return "softmax";
    }
    return "unknown";
}

const char* head_name(Head head) {
    return head == Head::reconstruction ? "reconstruction" : "classification";
}

Layer make_masked_layer(const MembershipMask& membership, Activation activation) {
    Layer layer;
    layer.kind = LayerKind::masked;
    layer.activation = activation;
    layer.weights = Eigen::MatrixXd::Zero(membership.num_sets(), membership.num_genes());
    layer.bias = Eigen::VectorXd::Zero(membership.num_sets());
    layer.mask = membership.dense().transpose();
    return layer;
}

Layer make_dense_layer(Eigen::Index in_dim, Eigen::Index out_dim, Activation activation) {
    if (in_dim < 1 || out_dim < 1) {
        throw Error(ErrorKind::config, "layer dimensions must be positive");
    }
    Layer layer;
    layer.kind = LayerKind::dense;
    layer.activation = activation;
    layer.weights = Eigen::MatrixXd::Zero(out_dim, in_dim);
    layer.bias = Eigen::VectorXd::Zero(out_dim);
    return layer;
}

double he_uniform_bound(Eigen::Index fan_in) {
    if (fan_in < 1) {
        throw Error(ErrorKind::config, "He initialization needs a positive fan-in (is a gene set empty?)");
    }
    return std::sqrt(6.0 / static_cast<double>(fan_in));
}

void he_uniform_init(Layer& layer, Rng& rng) {
    layer.bias.setZero();
    for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
        Eigen::Index fan_in = layer.in_dim();
        if (layer.is_masked()) {
            fan_in = static_cast<Eigen::Index>((layer.mask.row(j).array() > 0).count());
        }
        const double bound = he_uniform_bound(fan_in);
        for (Eigen::Index i = 0; i < layer.in_dim(); ++i) {
            if (layer.is_masked() && layer.mask(j, i) == 0) {
                layer.weights(j, i) = 0;
            } else {
                layer.weights(j, i) = rng.uniform(-bound, bound);
            }
        }
    }
}

void Model::validate() const {
    if (layers.empty()) {
        throw Error(ErrorKind::config, "model has no layers");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.bias.size() != layer.out_dim()) {
            throw Error(ErrorKind::shape, "layer " + std::to_string(l) + " bias length differs from its output width");
        }
        if (l > 0 && layer.in_dim() != layers[l - 1].out_dim()) {
            throw Error(ErrorKind::shape, "layer " + std::to_string(l) + " input width differs from the previous layer's output width");
        }
        if (layer.is_masked() && (layer.mask.rows() != layer.out_dim() || layer.mask.cols() != layer.in_dim())) {
            throw Error(ErrorKind::shape, "layer " + std::to_string(l) + " mask shape differs from its weights");
        }
        if (layer.activation == Activation::softmax && (l + 1 != layers.size() || head != Head::classification)) {
            throw Error(ErrorKind::config, "softmax is only allowed on the final layer of a classifier");
        }
    }
    if (head == Head::classification && layers.back().activation != Activation::softmax) {
        throw Error(ErrorKind::config, "a classifier must end in a softmax layer");
    }
    if (!input_ids.empty() && static_cast<Eigen::Index>(input_ids.size()) != input_dim()) {
        throw Error(ErrorKind::shape, "number of input names differs from the input width");
    }
    if (head == Head::classification && static_cast<Eigen::Index>(class_names.size()) != output_dim()) {
        throw Error(ErrorKind::shape, "number of class names differs from the output width");
    }
    if (input_center.size() != 0) {
        if (input_center.size() != input_dim()) {
            throw Error(ErrorKind::shape, "input center length differs from the input width");
        }
        if (head == Head::reconstruction && (output_dim() != input_dim() || layers.back().activation != Activation::linear)) {
            throw Error(ErrorKind::config, "a centered reconstruction model needs a linear output as wide as its input");
        }
    }
}

Model make_autoencoder(const MembershipMask& membership, Eigen::Index superset_size, Rng& rng) {
    Model model;
    model.head = Head::reconstruction;
    model.input_ids = membership.gene_ids;
    model.set_names = membership.set_names;
    model.layers.push_back(make_masked_layer(membership, Activation::relu));
    model.layers.push_back(make_dense_layer(membership.num_sets(), superset_size, Activation::relu));
    model.layers.push_back(make_dense_layer(superset_size, membership.num_sets(), Activation::relu));
    model.layers.push_back(make_dense_layer(membership.num_sets(), membership.num_genes(), Activation::linear));
    for (auto& layer : model.layers) {
        he_uniform_init(layer, rng);
    }
    model.validate();
    return model;
}

Model make_masked_classifier(const MembershipMask& membership, std::optional<Eigen::Index> superset_size, std::vector<std::string> class_names, Rng& rng) {
    Model model;
    model.head = Head::classification;
    model.input_ids = membership.gene_ids;
    model.set_names = membership.set_names;
    model.class_names = std::move(class_names);
    const auto nclasses = static_cast<Eigen::Index>(model.class_names.size());
    model.layers.push_back(make_masked_layer(membership, Activation::relu));
    Eigen::Index width = membership.num_sets();
    if (superset_size) {
        model.layers.push_back(make_dense_layer(width, *superset_size, Activation::relu));
        width = *superset_size;
    }
    model.layers.push_back(make_dense_layer(width, nclasses, Activation::softmax));
    for (auto& layer : model.layers) {
        he_uniform_init(layer, rng);
    }
    model.validate();
    return model;
}

Model make_dense_classifier(std::vector<std::string> input_ids, const std::vector<Eigen::Index>& widths, std::vector<std::string> class_names, Rng& rng) {
    Model model;
    model.head = Head::classification;
    model.input_ids = std::move(input_ids);
    model.class_names = std::move(class_names);
    Eigen::Index width = static_cast<Eigen::Index>(model.input_ids.size());
    for (auto next : widths) {
        model.layers.push_back(make_dense_layer(width, next, Activation::relu));
        width = next;
    }
    model.layers.push_back(make_dense_layer(width, static_cast<Eigen::Index>(model.class_names.size()), Activation::softmax));
    for (auto& layer : model.layers) {
        he_uniform_init(layer, rng);
    }
    model.validate();
    return model;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd output(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double top = logits.col(c).maxCoeff();
        output.col(c) = (logits.col(c).array() - top).exp().matrix();
        output.col(c) /= output.col(c).sum();
    }
    return output;
}

namespace {

Eigen::MatrixXd activate(Activation activation, const Eigen::MatrixXd& pre) {
    switch (activation) {
        case Activation::relu: return pre.cwiseMax(0.0);
        case Activation::linear: return pre;
        case Activation::softmax: return softmax_columns(pre);
    }
    return pre;
}

constexpr double probability_floor = 1e-12;

}

ForwardPass forward(const Model& model, const Eigen::MatrixXd& input) {
    if (input.rows() != model.input_dim()) {
        throw Error(ErrorKind::shape, "input has " + std::to_string(input.rows()) + " rows but the model expects " + std::to_string(model.input_dim()));
    }
    ForwardPass pass;
    pass.activations.reserve(model.layers.size() + 1);
    pass.pre_activations.reserve(model.layers.size());
    const bool centered = model.input_center.size() != 0;
    if (centered) {
        pass.activations.push_back(input.colwise() - model.input_center);
    } else {
        pass.activations.push_back(input);
    }
    for (const auto& layer : model.layers) {
        Eigen::MatrixXd pre = layer.weights * pass.activations.back();
        pre.colwise() += layer.bias;
        pass.activations.push_back(activate(layer.activation, pre));
        pass.pre_activations.push_back(std::move(pre));
    }
    if (centered && model.head == Head::reconstruction) {
        pass.activations.back().colwise() += model.input_center;
    }
    return pass;
}

double loss(Head head, const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target) {
    if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
        throw Error(ErrorKind::shape, "prediction and target shapes differ");
    }
    if (prediction.size() == 0) {
        return 0;
    }
    if (head == Head::reconstruction) {
        return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
    }
    const double total = -(target.array() * prediction.array().max(probability_floor).log()).sum();
    return total / static_cast<double>(prediction.cols());
}

void apply_mask(const Layer& layer, Eigen::MatrixXd& values) {
    if (layer.is_masked()) {
        values = (layer.mask.array() > 0).select(values, 0.0);
    }
}

Gradients backward(const Model& model, const ForwardPass& pass, const Eigen::MatrixXd& target) {
    const auto nlayers = model.layers.size();
    const auto& output = pass.output();
    if (output.rows() != target.rows() || output.cols() != target.cols()) {
        throw Error(ErrorKind::shape, "target shape differs from the model output");
    }

    Gradients grads;
    grads.weights.resize(nlayers);
    grads.biases.resize(nlayers);

    // Gradient of the loss with respect to the final layer's output.
    Eigen::MatrixXd upstream;
    if (model.head == Head::reconstruction) {
        upstream = 2.0 * (output - target) / static_cast<double>(output.size());
    } else {
        const double n = static_cast<double>(output.cols());
        upstream = (output.array() > probability_floor).select(-target.array() / (n * output.array()), 0.0).matrix();
    }

    for (std::size_t back = 0; back < nlayers; ++back) {
        const auto l = nlayers - 1 - back;
        const auto& layer = model.layers[l];

        Eigen::MatrixXd delta;
        switch (layer.activation) {
            case Activation::relu:
                delta = (pass.pre_activations[l].array() > 0).select(upstream, 0.0);
                break;
            case Activation::linear:
                delta = upstream;
                break;
            case Activation::softmax: {
                const auto& prob = pass.activations[l + 1];
                const Eigen::RowVectorXd inner = (prob.array() * upstream.array()).colwise().sum();
                delta = (prob.array() * (upstream.rowwise() - inner).array()).matrix();
                break;
            }
        }

        grads.weights[l] = delta * pass.activations[l].transpose();
        apply_mask(layer, grads.weights[l]);
        grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            upstream = layer.weights.transpose() * delta;
        }
    }
    return grads;
}

}
