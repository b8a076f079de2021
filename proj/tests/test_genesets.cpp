#include "doctest.h"

#include "gsae/errors.hpp"
#include "gsae/genesets.hpp"
#include "gsae/rng.hpp"

#include <cmath>
#include <sstream>

using namespace gsae;

namespace {

std::vector<std::string> genes(int from, int to) {
    std::vector<std::string> output;
    for (int i = from; i <= to; ++i) {
        output.push_back("g" + std::to_string(i));
    }
    return output;
}

/// Kappa from explicit 0/1 vectors over the universe, counting agreement cell by cell.
double oracle_kappa(const std::vector<int>& a, const std::vector<int>& b) {
    double n = static_cast<double>(a.size()), agree = 0, a1 = 0, b1 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree += (a[i] == b[i]);
        a1 += a[i];
        b1 += b[i];
    }
    const double po = agree / n;
    const double pe = (a1 / n) * (b1 / n) + (1 - a1 / n) * (1 - b1 / n);
    return (po - pe) / (1 - pe);
}

std::vector<int> indicator(const std::vector<std::string>& universe, const std::vector<std::string>& members) {
    std::vector<int> output;
    for (const auto& g : universe) {
        output.push_back(std::find(members.begin(), members.end(), g) != members.end());
    }
    return output;
}

}

TEST_CASE("size filter boundaries") {
    auto c = GeneSetCollection::from_sets({
        GeneSet{"s14", "", genes(1, 14)},
        GeneSet{"s15", "", genes(1, 15)},
        GeneSet{"s500", "", genes(1, 500)},
        GeneSet{"s501", "", genes(1, 501)}
    });
    CHECK(size_filter(c).names() == std::vector<std::string>{"s15", "s500"});
}

TEST_CASE("kappa hand examples") {
    const auto universe = genes(1, 10);
    GeneSet first5{"a", "", genes(1, 5)};
    GeneSet last5{"b", "", genes(6, 10)};
    CHECK(kappa(first5, first5, universe).kappa == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kappa(first5, last5, universe).kappa == doctest::Approx(-1.0).epsilon(1e-12));
    // 2x2 table a=2, b=1, c=1, d=6: po = 0.8, pe = 0.58.
    GeneSet x{"x", "", {"g1", "g2", "g3"}};
    GeneSet y{"y", "", {"g1", "g2", "g4"}};
    CHECK(kappa(x, y, universe).kappa == doctest::Approx(0.22 / 0.42).epsilon(1e-12));
    CHECK(kappa(x, y, universe).kappa == doctest::Approx(0.5238).epsilon(1e-4));
}

TEST_CASE("kappa degenerate sets") {
    const auto universe = genes(1, 10);
    GeneSet full{"f", "", universe};
    GeneSet some{"s", "", genes(1, 3)};
    CHECK_THROWS_AS(kappa(full, some, universe), Error);
    CHECK_THROWS_AS(kappa(3, 0, 0, 10), Error);
}

TEST_CASE("kappa matches the indicator oracle, is symmetric and self-kappa is one") {
    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 10 + static_cast<int>(rng.below(40));
        const auto universe = genes(1, n);
        GeneSet a{"a", "", {}}, b{"b", "", {}};
        for (const auto& g : universe) {
            if (rng.uniform() < 0.3) a.members.push_back(g);
            if (rng.uniform() < 0.4) b.members.push_back(g);
        }
        if (a.members.empty() || b.members.empty() || a.members.size() == universe.size() || b.members.size() == universe.size()) {
            continue;
        }
        const auto ab = kappa(a, b, universe);
        const auto ba = kappa(b, a, universe);
        CHECK(ab.kappa == ba.kappa);
        CHECK(ab.p_value == ba.p_value);
        CHECK(ab.kappa == doctest::Approx(oracle_kappa(indicator(universe, a.members), indicator(universe, b.members))).epsilon(1e-12));
        CHECK(kappa(a, a, universe).kappa == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(ab.p_value >= 0.0);
        CHECK(ab.p_value <= 1.0);
    }
}

TEST_CASE("dedup merges identical sets and keeps disjoint ones") {
    auto identical = GeneSetCollection::from_sets({GeneSet{"A", "", genes(1, 20)}, GeneSet{"B", "", genes(1, 20)}, GeneSet{"C", "", genes(21, 60)}});
    auto result = dedup(identical);
    CHECK(result.collection.names() == std::vector<std::string>{"A", "C"});
    REQUIRE(result.components.size() == 2);
    CHECK(result.components[0].members == std::vector<std::string>{"A", "B"});
    CHECK(result.components[0].representative == "A");
    CHECK(result.components[0].min_p_value < 1e-7);

    auto disjoint = GeneSetCollection::from_sets({GeneSet{"A", "", genes(1, 20)}, GeneSet{"B", "", genes(21, 40)}});
    CHECK(dedup(disjoint).collection.names() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("dedup keeps the largest of a nested triple") {
    // Nested A(30) > B(20) > C(18) next to an unrelated D(100) that widens the universe to 130 genes.
    auto c = GeneSetCollection::from_sets({
        GeneSet{"C", "", genes(1, 18)},
        GeneSet{"A", "", genes(1, 30)},
        GeneSet{"D", "", genes(31, 130)},
        GeneSet{"B", "", genes(1, 20)}
    });
    const auto& universe = c.universe;
    REQUIRE(universe.size() == 130);
    for (auto [x, y] : {std::pair{0, 1}, std::pair{0, 3}, std::pair{1, 3}}) {
        CHECK(oracle_kappa(indicator(universe, c.sets[x].members), indicator(universe, c.sets[y].members)) > 0);
        CHECK(kappa(c.sets[x], c.sets[y], universe).p_value < 1e-7);
    }
    auto result = dedup(c);
    CHECK(result.collection.names() == std::vector<std::string>{"A", "D"});
    CHECK(dedup(result.collection).collection.names() == result.collection.names());

    std::ostringstream audit;
    write_dedup_audit(audit, result);
    CHECK(audit.str().find("0\tC,A,B\tA\t") != std::string::npos);
}

TEST_CASE("dedup threshold zero is the identity and representative ties use names") {
    auto c = GeneSetCollection::from_sets({GeneSet{"Z", "", genes(1, 20)}, GeneSet{"Y", "", genes(1, 20)}, GeneSet{"X", "", genes(40, 60)}});
    CHECK(dedup(c, 0.0).collection.names() == c.names());
    CHECK(dedup(c).collection.names() == std::vector<std::string>{"Y", "X"});
}

TEST_CASE("dedup output is a subset and idempotent on random collections") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<GeneSet> sets;
        for (int s = 0; s < 15; ++s) {
            GeneSet set{"S" + std::to_string(s), "", {}};
            const int start = static_cast<int>(rng.below(150));
            const int length = 15 + static_cast<int>(rng.below(40));
            set.members = genes(start, start + length);
            sets.push_back(set);
        }
        auto c = GeneSetCollection::from_sets(sets);
        auto once = dedup(c);
        for (const auto& name : once.collection.names()) {
            const auto all = c.names();
            CHECK(std::find(all.begin(), all.end(), name) != all.end());
        }
        // Re-running over the survivors' own universe must not merge anything further.
        CHECK(dedup(once.collection).collection.names() == once.collection.names());
    }
}

TEST_CASE("membership mask") {
    auto c = GeneSetCollection::from_sets({GeneSet{"S1", "", {"A", "C"}}, GeneSet{"S2", "", {"A"}}});
    auto mask = build_mask(c, {"A", "B", "C"});
    auto dense = mask.dense();
    CHECK(dense(0, 0) == 1);
    CHECK(dense(1, 0) == 0);
    CHECK(dense(2, 0) == 1);
    CHECK(dense.row(0).sum() == 2);
    CHECK(dense.col(0).sum() == 2);
    CHECK(dense.col(1).sum() == 1);

    CHECK_THROWS_AS(build_mask(c, {"A", "B"}), Error);
    CHECK_THROWS_AS(build_mask(GeneSetCollection{}, {"A"}), Error);
}
