#include "doctest.h"

#include "gsae/errors.hpp"
#include "gsae/model.hpp"
#include "net_fixtures.hpp"

#include <cmath>

using namespace gsae;

namespace {

Model single_node(double w1, double w2) {
    Model model;
    model.head = Head::reconstruction;
    model.layers.push_back(make_dense_layer(2, 1, Activation::relu));
    model.layers[0].weights << w1, w2;
    return model;
}

MembershipMask mask_of(std::vector<std::string> genes, std::vector<std::vector<Eigen::Index> > columns) {
    MembershipMask mask;
    mask.gene_ids = std::move(genes);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        mask.set_names.push_back("set" + std::to_string(c));
    }
    mask.columns = std::move(columns);
    return mask;
}

}

TEST_CASE("He uniform bounds") {
    CHECK(he_uniform_bound(6) == doctest::Approx(1.0));
    CHECK(he_uniform_bound(24) == doctest::Approx(0.5));
    CHECK_THROWS_AS(he_uniform_bound(0), Error);
}

TEST_CASE("masked initialization respects fan-in and the mask") {
    auto mask = mask_of({"a", "b", "c", "d", "e"}, {{0, 2, 4}, {1}});
    Rng rng(1);
    Layer layer = make_masked_layer(mask);
    he_uniform_init(layer, rng);
    CHECK((layer.weights.row(0).array() != 0).count() == 3);
    CHECK((layer.weights.row(1).array() != 0).count() == 1);
    CHECK(layer.weights.row(0).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 3));
    CHECK(layer.weights.row(1).cwiseAbs().maxCoeff() <= std::sqrt(6.0));
    CHECK(layer.bias.isZero());
    for (Eigen::Index i : {1, 3}) {
        CHECK(std::signbit(layer.weights(0, i)) == false);
        CHECK(layer.weights(0, i) == 0.0);
    }
}

TEST_CASE("forward pass hand examples") {
    auto model = single_node(1, -1);
    Eigen::MatrixXd x(2, 2);
    x << 2, 3,
         3, 2;
    auto out = forward(model, x).output();
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 1.0);

    CHECK_THROWS_AS(forward(model, Eigen::MatrixXd::Ones(3, 1)), Error);
}

TEST_CASE("masked connection carries no signal") {
    auto mask = mask_of({"a", "b"}, {{0}});
    Model model;
    model.layers.push_back(make_masked_layer(mask));
    Rng rng(2);
    he_uniform_init(model.layers[0], rng);
    model.layers[0].weights(0, 0) = 0.7;
    Eigen::MatrixXd x(2, 2);
    x << 5, 5,
         100, 0;
    auto out = forward(model, x).output();
    CHECK(out(0, 0) == out(0, 1));
}

TEST_CASE("loss hand examples") {
    Eigen::MatrixXd a(2, 1), b(2, 1);
    a << 1, 3;
    b << 1, 1;
    CHECK(loss(Head::reconstruction, a, a) == 0.0);
    CHECK(loss(Head::reconstruction, a, b) == doctest::Approx(2.0));

    Eigen::MatrixXd p(2, 1), t(2, 1);
    p << 1, 0;
    t << 1, 0;
    CHECK(loss(Head::classification, p, t) == doctest::Approx(0.0));
    // Zero probability on the true class is clamped at log(1e-12).
    CHECK(loss(Head::classification, p, Eigen::MatrixXd(Eigen::Vector2d(0, 1))) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("scalar network gradient is 2(wx - t)x") {
    Model model;
    model.layers.push_back(make_dense_layer(1, 1, Activation::linear));
    model.layers[0].weights(0, 0) = 1.5;
    Eigen::MatrixXd x(1, 1), t(1, 1);
    x << 2.0;
    t << 1.0;
    auto g = backward(model, forward(model, x), t);
    CHECK(g.weights[0](0, 0) == doctest::Approx(2 * (1.5 * 2 - 1) * 2));
    CHECK(g.biases[0](0) == doctest::Approx(2 * (1.5 * 2 - 1)));
}

TEST_CASE("dead ReLU passes no gradient to its weights") {
    auto model = single_node(-1, -1);
    Eigen::MatrixXd x(2, 3);
    x << 1, 2, 3,
         1, 2, 3;
    auto g = backward(model, forward(model, x), Eigen::MatrixXd::Ones(1, 3));
    CHECK(g.weights[0].isZero());
    CHECK(g.biases[0].isZero());
}

TEST_CASE("analytic gradients match central differences on random small networks") {
    Rng rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const Head head = trial % 2 ? Head::classification : Head::reconstruction;
        auto model = testing::random_small_network(rng, head);
        CHECK(testing::parameter_count(model) <= 50);
        if (trial % 4 < 2) {
            model.input_center = testing::random_matrix(rng, model.input_dim(), 1, 0, 2).col(0);
        }
        auto x = testing::random_matrix(rng, model.input_dim(), 4, 0, 2);
        auto t = testing::random_targets(rng, model, 4);
        auto check = testing::finite_difference_check(model, x, t, 1e-5);
        CHECK(testing::relative_error(check) < 1e-5);

        auto grads = backward(model, forward(model, x), t);
        const auto& first = model.layers[0];
        CHECK(((first.mask.array() == 0) && (grads.weights[0].array() != 0)).count() == 0);
    }
}

TEST_CASE("input center shifts inputs and restores reconstructions") {
    Rng rng(31);
    auto model = testing::random_small_network(rng, Head::reconstruction);
    auto x = testing::random_matrix(rng, model.input_dim(), 5, 0, 4);
    Eigen::VectorXd center = testing::random_matrix(rng, model.input_dim(), 1, 0, 4).col(0);
    const Eigen::MatrixXd plain = forward(model, x.colwise() - center).output();
    model.input_center = center;
    const auto pass = forward(model, x);
    CHECK((pass.activations[0] - (x.colwise() - center)).norm() == doctest::Approx(0));
    CHECK((pass.output() - (plain.colwise() + center)).norm() == doctest::Approx(0).epsilon(1e-12));

    model.input_center = Eigen::VectorXd::Zero(model.input_dim() + 1);
    CHECK_THROWS_AS(model.validate(), Error);
}

TEST_CASE("softmax outputs are probability vectors and ReLU outputs are non-negative") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        auto model = testing::random_small_network(rng, Head::classification);
        auto x = testing::random_matrix(rng, model.input_dim(), 6, -50, 50);
        auto pass = forward(model, x);
        const auto& p = pass.output();
        CHECK(p.minCoeff() >= 0.0);
        CHECK(p.maxCoeff() <= 1.0);
        for (Eigen::Index c = 0; c < p.cols(); ++c) {
            CHECK(std::abs(p.col(c).sum() - 1.0) <= 1e-9);
        }
        for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
            CHECK(pass.activations[l + 1].minCoeff() >= 0.0);
        }
    }
    Eigen::MatrixXd huge(2, 1);
    huge << 1000, -1000;
    auto s = softmax_columns(huge);
    CHECK(s(0, 0) == doctest::Approx(1.0));
    CHECK(std::isfinite(s(1, 0)));
}

TEST_CASE("model layouts") {
    auto mask = mask_of({"a", "b", "c", "d"}, {{0, 1}, {2, 3}, {1, 2}});
    Rng rng(3);
    auto ae = make_autoencoder(mask, 200, rng);
    REQUIRE(ae.layers.size() == 4);
    CHECK(ae.layers[0].is_masked());
    CHECK(ae.layers[1].out_dim() == 200);
    CHECK(ae.layers[2].out_dim() == 3);
    CHECK(ae.layers[3].out_dim() == 4);
    CHECK(ae.layers[3].activation == Activation::linear);

    auto superset = make_masked_classifier(mask, 10, {"x", "y"}, rng);
    auto geneset = make_masked_classifier(mask, std::nullopt, {"x", "y"}, rng);
    CHECK(superset.layers.size() == 3);
    CHECK(geneset.layers.size() == 2);
    CHECK(geneset.layers.back().activation == Activation::softmax);

    Model bad = ae;
    bad.layers[1].activation = Activation::softmax;
    CHECK_THROWS_AS(bad.validate(), Error);
}
