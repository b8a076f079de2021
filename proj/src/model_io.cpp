#include "gsae/model_io.hpp"
#include "gsae/errors.hpp"
#include "gsae/text.hpp"

#include "json.hpp"

#include <sstream>

namespace gsae {

using nlohmann::json;

namespace {

json config_to_json(const TrainConfig& config) {
    return json{
        {"learning_rate", config.learning_rate},
        {"decay", config.decay},
        {"momentum", config.momentum},
        {"nesterov", config.nesterov},
        {"batch_size", config.batch_size},
        {"max_epochs", config.max_epochs},
        {"val_fraction", config.val_fraction},
        {"patience", config.patience},
        {"seed", config.seed},
        {"float32", config.float32},
        {"center_inputs", config.center_inputs}
    };
}

TrainConfig config_from_json(const json& doc) {
    TrainConfig config;
    config.learning_rate = doc.at("learning_rate").get<double>();
    config.decay = doc.at("decay").get<double>();
    config.momentum = doc.at("momentum").get<double>();
    config.nesterov = doc.at("nesterov").get<bool>();
    config.batch_size = doc.at("batch_size").get<std::size_t>();
    config.max_epochs = doc.at("max_epochs").get<std::size_t>();
    config.val_fraction = doc.at("val_fraction").get<double>();
    config.patience = doc.at("patience").get<std::size_t>();
    config.seed = doc.at("seed").get<std::uint64_t>();
    config.float32 = doc.at("float32").get<bool>();
    config.center_inputs = doc.at("center_inputs").get<bool>();
    return config;
}

Activation parse_activation(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "linear") return Activation::linear;
    if (name == "softmax") return Activation::softmax;
    throw Error(ErrorKind::parse, "unknown activation '" + name + "'");
}

}

std::string model_to_json(const Model& model, const std::optional<TrainConfig>& config) {
    json doc;
    doc["format"] = "gsae-model";
    doc["format_version"] = model_format_version;
    doc["head"] = head_name(model.head);
    doc["input_ids"] = model.input_ids;
    doc["set_names"] = model.set_names;
    doc["class_names"] = model.class_names;
    doc["input_center"] = std::vector<double>(model.input_center.data(), model.input_center.data() + model.input_center.size());

    json layers = json::array();
    for (const auto& layer : model.layers) {
        json entry;
        entry["kind"] = layer_kind_name(layer.kind);
        entry["activation"] = activation_name(layer.activation);
        entry["in_dim"] = layer.in_dim();
        entry["out_dim"] = layer.out_dim();
        if (layer.is_masked()) {
            json columns = json::array();
            for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
                std::vector<Eigen::Index> members;
                for (Eigen::Index i = 0; i < layer.in_dim(); ++i) {
                    if (layer.mask(j, i) > 0) {
                        members.push_back(i);
                    }
                }
                columns.push_back(members);
            }
            entry["mask"] = std::move(columns);
        }
        std::vector<double> weights;
        weights.reserve(static_cast<std::size_t>(layer.weights.size()));
        for (Eigen::Index j = 0; j < layer.out_dim(); ++j) {
            for (Eigen::Index i = 0; i < layer.in_dim(); ++i) {
                weights.push_back(layer.weights(j, i));
            }
        }
        entry["weights"] = std::move(weights);
        entry["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
        layers.push_back(std::move(entry));
    }
    doc["layers"] = std::move(layers);

    if (config) {
        doc["config"] = config_to_json(*config);
        doc["seed"] = config->seed;
    }
    return doc.dump(1) + "\n";
}

SavedModel model_from_json(const std::string& document) {
    SavedModel output;
    auto& model = output.model;
    try {
        const auto doc = json::parse(document);
        if (doc.at("format").get<std::string>() != "gsae-model") {
            throw Error(ErrorKind::parse, "not a gsae model document");
        }
        const auto version = doc.at("format_version").get<int>();
        if (version != model_format_version) {
            throw Error(ErrorKind::parse, "unsupported model format version " + std::to_string(version));
        }
        const auto head = doc.at("head").get<std::string>();
        if (head == "reconstruction") {
            model.head = Head::reconstruction;
        } else if (head == "classification") {
            model.head = Head::classification;
        } else {
            throw Error(ErrorKind::parse, "unknown head '" + head + "'");
        }
        model.input_ids = doc.at("input_ids").get<std::vector<std::string> >();
        model.set_names = doc.at("set_names").get<std::vector<std::string> >();
        model.class_names = doc.at("class_names").get<std::vector<std::string> >();
        const auto center = doc.at("input_center").get<std::vector<double> >();
        model.input_center = Eigen::Map<const Eigen::VectorXd>(center.data(), static_cast<Eigen::Index>(center.size()));

        for (const auto& entry : doc.at("layers")) {
            Layer layer;
            const auto kind = entry.at("kind").get<std::string>();
            if (kind == "masked") {
                layer.kind = LayerKind::masked;
            } else if (kind == "dense") {
                layer.kind = LayerKind::dense;
            } else {
                throw Error(ErrorKind::parse, "unknown layer kind '" + kind + "'");
            }
            layer.activation = parse_activation(entry.at("activation").get<std::string>());
            const auto in_dim = entry.at("in_dim").get<Eigen::Index>();
            const auto out_dim = entry.at("out_dim").get<Eigen::Index>();

            const auto weights = entry.at("weights").get<std::vector<double> >();
            const auto bias = entry.at("bias").get<std::vector<double> >();
            if (static_cast<Eigen::Index>(weights.size()) != in_dim * out_dim || static_cast<Eigen::Index>(bias.size()) != out_dim) {
                throw Error(ErrorKind::parse, "layer parameter arrays do not match the declared dimensions");
            }
            layer.weights.resize(out_dim, in_dim);
            for (Eigen::Index j = 0; j < out_dim; ++j) {
                for (Eigen::Index i = 0; i < in_dim; ++i) {
                    layer.weights(j, i) = weights[static_cast<std::size_t>(j * in_dim + i)];
                }
            }
            layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), out_dim);

            if (layer.is_masked()) {
                const auto columns = entry.at("mask").get<std::vector<std::vector<Eigen::Index> > >();
                if (static_cast<Eigen::Index>(columns.size()) != out_dim) {
                    throw Error(ErrorKind::parse, "mask has the wrong number of columns");
                }
                layer.mask = Eigen::MatrixXd::Zero(out_dim, in_dim);
                for (Eigen::Index j = 0; j < out_dim; ++j) {
                    for (auto i : columns[static_cast<std::size_t>(j)]) {
                        if (i < 0 || i >= in_dim) {
                            throw Error(ErrorKind::parse, "mask index out of range");
                        }
                        layer.mask(j, i) = 1;
                    }
                }
                for (Eigen::Index j = 0; j < out_dim; ++j) {
                    for (Eigen::Index i = 0; i < in_dim; ++i) {
                        if (layer.mask(j, i) == 0 && layer.weights(j, i) != 0) {
                            throw Error(ErrorKind::consistency, "nonzero weight outside the mask of a masked layer");
                        }
                    }
                }
            }
            model.layers.push_back(std::move(layer));
        }

        if (doc.contains("config")) {
            output.config = config_from_json(doc.at("config"));
        }
    } catch (const json::exception& error) {
        throw Error(ErrorKind::parse, std::string("malformed model document: ") + error.what());
    }
    model.validate();
    return output;
}

void save_model(const std::filesystem::path& path, const Model& model, const std::optional<TrainConfig>& config) {
    auto output = text::open_output(path);
    output << model_to_json(model, config);
    if (!output) {
        throw Error(ErrorKind::io, "failed writing '" + path.string() + "'");
    }
}

SavedModel load_model(const std::filesystem::path& path) {
    auto input = text::open_input(path);
    std::stringstream buffer;
    buffer << input.rdbuf();
    return model_from_json(buffer.str());
}

}
