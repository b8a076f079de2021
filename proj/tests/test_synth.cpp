#include "doctest.h"

#include "gsae/errors.hpp"
#include "gsae/stats.hpp"
#include "gsae/synth.hpp"

#include <cmath>

using namespace gsae;

TEST_CASE("default generator layout") {
    auto data = synthesize(SynthConfig{});
    CHECK(data.expression.num_genes() == 300);
    CHECK(data.expression.num_samples() == 200);
    CHECK(data.collection.size() == 30);
    CHECK(data.clinical.records.size() == 200);
    CHECK(data.expression.values.minCoeff() >= 0);
    CHECK(data.group_names.size() == 2);
    REQUIRE(data.planted_sets.size() == 2);
    CHECK(data.planted_sets[0].empty());
    CHECK(data.planted_sets[1].size() == 5);
    CHECK(data.hazard_sets.empty());

    std::size_t in_group1 = 0;
    for (auto g : data.groups) {
        in_group1 += g == 1;
    }
    CHECK(in_group1 == 60);

    for (const auto& set : data.collection.sets) {
        CHECK(set.members.size() == 10);
    }
    for (const auto& record : data.clinical.records) {
        CHECK(record.time_days <= 1825);
        CHECK(record.labels.at("group") == data.group_names[static_cast<std::size_t>(data.groups[std::stoul(record.sample_id.substr(1)) - 1])]);
    }
}

TEST_CASE("same seed same data, different seed different data") {
    SynthConfig config;
    auto a = synthesize(config);
    auto b = synthesize(config);
    CHECK(a.expression.values == b.expression.values);
    config.seed = 18;
    auto c = synthesize(config);
    CHECK(a.expression.values != c.expression.values);
}

TEST_CASE("planted sets are shifted up in their group") {
    SynthConfig config;
    auto data = synthesize(config);
    const auto& planted = data.planted_sets[1];
    for (std::size_t s = 0; s < data.collection.size(); ++s) {
        const auto& set = data.collection.sets[s];
        std::vector<double> g0, g1;
        for (Eigen::Index c = 0; c < data.expression.num_samples(); ++c) {
            double mean = 0;
            for (const auto& gene : set.members) {
                const auto row = std::find(data.expression.gene_ids.begin(), data.expression.gene_ids.end(), gene) - data.expression.gene_ids.begin();
                mean += data.expression.values(row, c);
            }
            mean /= static_cast<double>(set.members.size());
            (data.groups[static_cast<std::size_t>(c)] == 1 ? g1 : g0).push_back(mean);
        }
        const bool is_planted = std::find(planted.begin(), planted.end(), set.name) != planted.end();
        const double p = mww_one_tailed(g1, g0, 0).p_value;
        if (is_planted) {
            CHECK(p < 1e-6);
        }
        CHECK(mean_of(g1) - mean_of(g0) > (is_planted ? 0.5 : -0.5));
    }
}

TEST_CASE("hazard-linked data has events and shorter survival for high hazard") {
    SynthConfig config;
    config.hazard_link = HazardLink::single;
    config.hazard_strength = 1.5;
    auto data = synthesize(config);
    REQUIRE(data.hazard_sets.size() == 1);
    std::size_t events = 0;
    for (const auto& r : data.clinical.records) {
        events += r.event;
    }
    CHECK(events > 20);

    config.hazard_link = HazardLink::distributed;
    auto spread = synthesize(config);
    CHECK(spread.hazard_sets.size() == config.n_hazard_sets);

    CHECK(parse_hazard_link("distributed") == HazardLink::distributed);
    CHECK_THROWS_AS(parse_hazard_link("bogus"), Error);
}

TEST_CASE("invalid configurations") {
    SynthConfig config;
    config.n_sets = 400;
    CHECK_THROWS_AS(synthesize(config), Error);
    config = SynthConfig{};
    config.group_proportions = {1, 1, 1};
    config.n_planted = 20;
    CHECK_THROWS_AS(synthesize(config), Error);
}
