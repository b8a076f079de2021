#ifndef GSAE_MODEL_HPP
#define GSAE_MODEL_HPP

#include "genesets.hpp"
#include "rng.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

/**
 * @file model.hpp
 * @brief Layer stack of the gene superset autoencoder and its classifier variants, with forward and backward passes.
 *
 * Samples are stored as columns throughout: a layer maps an `in_dim x n` activation matrix to `out_dim x n`.
 * A masked layer connects output node `j` only to the inputs that are members of gene set `j`;
 * its off-mask weights are exactly zero at every point of a model's life.
 */

namespace gsae {

enum class LayerKind { masked, dense };
enum class Activation { relu, linear, softmax };
enum class Head { reconstruction, classification };

const char* layer_kind_name(LayerKind kind);
const char* activation_name(Activation activation);
const char* head_name(Head head);

struct Layer {
    LayerKind kind = LayerKind::dense;
    Activation activation = Activation::relu;
    /// `out_dim x in_dim`.
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
    /// `out_dim x in_dim` of 0/1, empty for dense layers.
    Eigen::MatrixXd mask;

    Eigen::Index in_dim() const { return weights.cols(); }
    Eigen::Index out_dim() const { return weights.rows(); }
    bool is_masked() const { return kind == LayerKind::masked; }
};

/**
 * A masked layer whose node `j` is wired to the member genes of column `j` of `membership`.
 */
Layer make_masked_layer(const MembershipMask& membership, Activation activation = Activation::relu);
Layer make_dense_layer(Eigen::Index in_dim, Eigen::Index out_dim, Activation activation);

/// `sqrt(6 / fan_in)`; throws a config error for `fan_in == 0`.
double he_uniform_bound(Eigen::Index fan_in);

/**
 * Draw every connected weight of `layer` from U(-b, b) with `b = he_uniform_bound(fan_in)`,
 * where a masked node's fan-in is its number of member genes. Biases are zeroed.
 */
void he_uniform_init(Layer& layer, Rng& rng);

struct Model {
    std::vector<Layer> layers;
    Head head = Head::reconstruction;
    /// Names of the input features, usually gene symbols.
    std::vector<std::string> input_ids;
    /// Gene-set node names when the first layer is masked.
    std::vector<std::string> set_names;
    std::vector<std::string> class_names;
    /// Per-feature offset subtracted from every input column; empty for none.
    /// A reconstruction model adds it back to its output.
    Eigen::VectorXd input_center;

    Eigen::Index input_dim() const { return layers.front().in_dim(); }
    Eigen::Index output_dim() const { return layers.back().out_dim(); }

    /// Throws a shape or config error if the stack is inconsistent.
    void validate() const;
};

/**
 * Input -> masked gene-set layer (ReLU) -> superset layer (ReLU) -> dense layer as wide as the gene-set layer (ReLU) -> linear output as wide as the input.
 */
Model make_autoencoder(const MembershipMask& membership, Eigen::Index superset_size, Rng& rng);

/**
 * Input -> masked gene-set layer (ReLU) -> [superset layer (ReLU)] -> softmax over classes.
 * Without `superset_size` the superset layer is omitted, giving the gene-set classifier.
 */
Model make_masked_classifier(const MembershipMask& membership, std::optional<Eigen::Index> superset_size, std::vector<std::string> class_names, Rng& rng);

/**
 * Fully connected ReLU layers of the given widths, then softmax over classes.
 */
Model make_dense_classifier(std::vector<std::string> input_ids, const std::vector<Eigen::Index>& widths, std::vector<std::string> class_names, Rng& rng);

/**
 * Stored results of a forward pass; `activations[0]` is the centered input and `activations[l + 1]` is the output of layer `l`.
 */
struct ForwardPass {
    std::vector<Eigen::MatrixXd> activations;
    std::vector<Eigen::MatrixXd> pre_activations;

    const Eigen::MatrixXd& output() const { return activations.back(); }
};

ForwardPass forward(const Model& model, const Eigen::MatrixXd& input);

/// Column-wise softmax, shifted by the column maximum.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

/**
 * Reconstruction: mean squared error over all entries.
 * Classification: mean over samples of `-sum(target * log(max(prob, 1e-12)))`.
 */
double loss(Head head, const Eigen::MatrixXd& prediction, const Eigen::MatrixXd& target);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/**
 * Exact gradients of `loss()` with respect to every parameter, given a stored forward pass.
 * Off-mask weight gradients are exactly zero.
 */
Gradients backward(const Model& model, const ForwardPass& pass, const Eigen::MatrixXd& target);

/// Set every off-mask entry of `values` to +0.0.
void apply_mask(const Layer& layer, Eigen::MatrixXd& values);

}

#endif
