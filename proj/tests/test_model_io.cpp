#include "doctest.h"

#include "gsae/errors.hpp"
#include "gsae/model_io.hpp"
#include "net_fixtures.hpp"

#include <cstring>
#include <filesystem>

#include "json.hpp"

using namespace gsae;

namespace {

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}

TEST_CASE("JSON round trip is bit exact") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto model = testing::random_small_network(rng, trial % 2 ? Head::classification : Head::reconstruction);
        for (auto& layer : model.layers) {
            layer.weights *= 1.0 / 3.0;
        }
        if (trial % 3 == 0) {
            model.input_center = Eigen::VectorXd::LinSpaced(model.input_dim(), 0.1, 7.0 / 3.0);
        }
        TrainConfig config;
        config.center_inputs = trial % 2 == 0;
        config.seed = 12345678901234ULL;
        config.learning_rate = 0.1 / 3;
        const auto text = model_to_json(model, config);
        const auto loaded = model_from_json(text);
        REQUIRE(loaded.model.layers.size() == model.layers.size());
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            CHECK(bitwise_equal(loaded.model.layers[l].weights, model.layers[l].weights));
            CHECK(bitwise_equal(loaded.model.layers[l].bias, model.layers[l].bias));
            CHECK(loaded.model.layers[l].mask == model.layers[l].mask);
            CHECK(loaded.model.layers[l].activation == model.layers[l].activation);
        }
        CHECK(loaded.model.head == model.head);
        CHECK(loaded.model.input_ids == model.input_ids);
        CHECK(loaded.model.class_names == model.class_names);
        CHECK(bitwise_equal(loaded.model.input_center, model.input_center));
        REQUIRE(loaded.config.has_value());
        CHECK(loaded.config->center_inputs == config.center_inputs);
        CHECK(loaded.config->seed == config.seed);
        CHECK(loaded.config->learning_rate == config.learning_rate);
        CHECK(model_to_json(loaded.model, loaded.config) == text);
    }
}

TEST_CASE("masks are stored as sorted index lists") {
    Rng rng(1);
    auto model = testing::random_small_network(rng, Head::reconstruction);
    auto doc = nlohmann::json::parse(model_to_json(model));
    CHECK(doc["format_version"] == model_format_version);
    const auto& mask = doc["layers"][0]["mask"];
    REQUIRE(mask.size() == static_cast<std::size_t>(model.layers[0].out_dim()));
    for (const auto& node : mask) {
        CHECK(std::is_sorted(node.begin(), node.end()));
    }
}

TEST_CASE("malformed and inconsistent documents are rejected") {
    auto kind_of = [](const std::string& text) {
        try {
            model_from_json(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::io;
    };
    CHECK(kind_of("{not json") == ErrorKind::parse);
    CHECK(kind_of("{}") == ErrorKind::parse);

    Rng rng(2);
    auto model = testing::random_small_network(rng, Head::reconstruction);
    auto doc = nlohmann::json::parse(model_to_json(model));
    const auto in_dim = model.layers[0].in_dim();
    std::size_t off = 0;
    for (Eigen::Index i = 0; i < in_dim; ++i) {
        if (model.layers[0].mask(0, i) == 0) {
            off = static_cast<std::size_t>(i);
            break;
        }
    }
    if (model.layers[0].mask(0, static_cast<Eigen::Index>(off)) == 0) {
        doc["layers"][0]["weights"][off] = 0.5;
        CHECK(kind_of(doc.dump()) == ErrorKind::consistency);
    }

    auto versioned = nlohmann::json::parse(model_to_json(model));
    versioned["format_version"] = model_format_version + 1;
    CHECK_THROWS_AS(model_from_json(versioned.dump()), Error);
}

TEST_CASE("save and load through a file") {
    Rng rng(3);
    auto model = testing::random_small_network(rng, Head::classification);
    const auto path = std::filesystem::temp_directory_path() / "gsae_model_io_test.json";
    save_model(path, model);
    auto loaded = load_model(path);
    CHECK(!loaded.config.has_value());
    CHECK(bitwise_equal(loaded.model.layers.back().weights, model.layers.back().weights));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), Error);
}
