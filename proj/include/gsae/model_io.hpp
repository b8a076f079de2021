#ifndef GSAE_MODEL_IO_HPP
#define GSAE_MODEL_IO_HPP

#include "model.hpp"
#include "training.hpp"

#include <filesystem>
#include <optional>
#include <string>

/**
 * @file model_io.hpp
 * @brief JSON persistence of models.
 *
 * Masks are stored as one sorted list of input indices per node, weights as row-major arrays.
 * Doubles are written in shortest round-trip form, so loading reproduces every parameter bit for bit.
 */

namespace gsae {

inline constexpr int model_format_version = 1;

struct SavedModel {
    Model model;
    std::optional<TrainConfig> config;
};

std::string model_to_json(const Model& model, const std::optional<TrainConfig>& config = std::nullopt);

/// Throws a parse error on malformed documents and a consistency error if an off-mask weight is nonzero.
SavedModel model_from_json(const std::string& document);

void save_model(const std::filesystem::path& path, const Model& model, const std::optional<TrainConfig>& config = std::nullopt);
SavedModel load_model(const std::filesystem::path& path);

}

#endif
