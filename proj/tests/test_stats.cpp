#include "doctest.h"

#include "gsae/errors.hpp"
#include "gsae/stats.hpp"
#include "stat_oracles.hpp"

#include <cmath>
#include <numbers>
#include <string>

using namespace gsae;

namespace {

std::vector<double> distinct_draws(Rng& rng, std::size_t n, std::vector<double>& used) {
    std::vector<double> output;
    while (output.size() < n) {
        const double v = std::round(rng.uniform(0, 1000)) / 10;
        if (std::find(used.begin(), used.end(), v) == used.end()) {
            used.push_back(v);
            output.push_back(v);
        }
    }
    return output;
}

}

TEST_CASE("MWW hand examples") {
    const std::vector<double> x{3, 4, 5}, y{1, 2};
    auto r = mww_one_tailed(x, y, 0);
    CHECK(r.method == TestMethod::mww_exact);
    CHECK(r.statistic == 6.0);
    CHECK(r.p_value == doctest::Approx(0.1).epsilon(1e-12));

    auto same = mww_one_tailed(x, x, 0);
    CHECK(same.p_value >= 0.5);

    const std::vector<double> a{10, 11}, b{1, 2};
    CHECK(mww_one_tailed(a, b, 100).p_value > 0.8);

    CHECK_THROWS_AS(mww_one_tailed(std::vector<double>{}, y, 0), Error);
}

TEST_CASE("exact MWW matches rank enumeration for every small size pair") {
    Rng rng(101);
    for (std::size_t n = 1; n <= 9; ++n) {
        for (std::size_t m = 1; n + m <= 10; ++m) {
            for (int trial = 0; trial < 3; ++trial) {
                std::vector<double> used;
                auto x = distinct_draws(rng, n, used);
                auto y = distinct_draws(rng, m, used);
                auto r = mww_one_tailed(x, y, 0);
                CHECK(r.method == TestMethod::mww_exact);
                CHECK(std::abs(r.p_value - testing::mww_enumeration_p(x, y, 0)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("tied samples use the normal approximation close to permutation") {
    Rng rng(55);
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(static_cast<double>(rng.below(5)) + 1);
    }
    for (int i = 0; i < 25; ++i) {
        y.push_back(static_cast<double>(rng.below(5)));
    }
    auto r = mww_one_tailed(x, y, 0);
    CHECK(r.method == TestMethod::mww_normal);
    CHECK(std::abs(r.p_value - testing::mww_monte_carlo_p(x, y, 0, 200000, rng)) < 0.02);

    const std::vector<double> flat{2, 2, 2, 2, 2};
    CHECK(mww_one_tailed(flat, flat, 0).p_value == 1.0);
}

TEST_CASE("MWW properties") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x, y;
        const auto nx = 1 + rng.below(15), ny = 1 + rng.below(15);
        for (std::uint64_t i = 0; i < nx; ++i) {
            x.push_back(rng.normal(0.5, 1));
        }
        for (std::uint64_t i = 0; i < ny; ++i) {
            y.push_back(rng.normal());
        }
        const double s = rng.uniform(-1, 1);
        const auto forward_p = mww_one_tailed(x, y, s).p_value;
        const auto mirror = mww_one_tailed(y, x, -s);
        CHECK(forward_p >= 0);
        CHECK(forward_p <= 1);
        if (mirror.method == TestMethod::mww_exact) {
            CHECK(forward_p + mirror.p_value >= 1 - 1e-12);
        } else {
            // The continuity correction adds at most 2 * (0.5 / sd) * phi(0) to the sum.
            const double nxd = static_cast<double>(nx), nyd = static_cast<double>(ny);
            const double sd = std::sqrt(nxd * nyd * (nxd + nyd + 1) / 12);
            const double excess = forward_p + mirror.p_value - 1;
            CHECK(excess >= -1e-12);
            CHECK(excess <= 1 / (sd * std::sqrt(2 * std::numbers::pi)) + 1e-12);
        }
        double previous = 0;
        for (double shift = -3; shift <= 3; shift += 0.25) {
            const double p = mww_one_tailed(x, y, shift).p_value;
            CHECK(p >= previous - 1e-12);
            previous = p;
        }
    }
}

TEST_CASE("mirrored normal-approximation p-values sum to one within 0.02 at moderate sizes") {
    Rng rng(78);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x, y;
        const auto nx = 15 + rng.below(30), ny = 15 + rng.below(30);
        for (std::uint64_t i = 0; i < nx; ++i) {
            x.push_back(rng.normal(0.3, 1));
        }
        for (std::uint64_t i = 0; i < ny; ++i) {
            y.push_back(rng.normal());
        }
        const double s = rng.uniform(-0.5, 0.5);
        const double sum = mww_one_tailed(x, y, s).p_value + mww_one_tailed(y, x, -s).p_value;
        CHECK(sum >= 1 - 1e-12);
        CHECK(sum <= 1.02);
    }
}

TEST_CASE("pscore") {
    CHECK(pscore(0.01) == doctest::Approx(2.0));
    CHECK(pscore(1.0) == 0.0);
    CHECK(pscore(1.30e-4) == doctest::Approx(3.886).epsilon(1e-3));
    bool clamped = false;
    CHECK(pscore(0.0, &clamped) == doctest::Approx(300.0));
    CHECK(clamped);
    pscore(0.5, &clamped);
    CHECK_FALSE(clamped);
}

TEST_CASE("gsScore") {
    CHECK(gs_score(0.5, 0.2, 0.1) == doctest::Approx(0.03));
    CHECK(gs_score(0.5, 0.2, 0.0) == 0.0);
    CHECK(gs_score(0.2, 0.5, 0.1) == doctest::Approx(-0.03));
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.normal(), b = rng.normal(), w = rng.normal();
        CHECK(gs_score(a, b, w) == -gs_score(b, a, w));
    }
}

TEST_CASE("high-impact selection") {
    auto entries_of = [](std::vector<double> scores) {
        std::vector<GsScoreEntry> entries;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            GsScoreEntry e;
            e.set_index = i;
            e.set_name = "s" + std::to_string(i);
            e.gs_score = scores[i];
            entries.push_back(e);
        }
        return entries;
    };
    auto up = select_high_impact(entries_of({0, 0, 0, 0, 9}), Direction::up);
    CHECK(up.sd == doctest::Approx(4.0249).epsilon(1e-4));
    REQUIRE(up.entries.size() == 1);
    CHECK(up.entries[0].set_name == "s4");

    auto flat = select_high_impact(entries_of({3, 3, 3}), Direction::up);
    CHECK(flat.entries.empty());
    CHECK(flat.degenerate);

    std::vector<double> symmetric{5, -5};
    for (int i = 0; i < 20; ++i) {
        symmetric.push_back(0);
    }
    auto sym_up = select_high_impact(entries_of(symmetric), Direction::up);
    auto sym_down = select_high_impact(entries_of(symmetric), Direction::down);
    REQUIRE(sym_up.entries.size() == 1);
    CHECK(sym_up.entries[0].gs_score == 5);
    REQUIRE(sym_down.entries.size() == 1);
    CHECK(sym_down.entries[0].gs_score == -5);

    auto sorted = select_high_impact(entries_of({0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 9, 12, 0, 0}), Direction::up);
    REQUIRE(sorted.entries.size() == 2);
    CHECK(sorted.entries[0].gs_score == 12);

    CHECK_THROWS_AS(select_high_impact(entries_of({1}), Direction::up), Error);
}

TEST_CASE("median split") {
    const std::vector<double> a{1, 2, 3, 4};
    auto s = median_split(a);
    CHECK(s.median == 2.5);
    CHECK(s.low == std::vector<std::size_t>{0, 1});
    CHECK(s.high == std::vector<std::size_t>{2, 3});

    const std::vector<double> b{1, 2, 2, 9};
    s = median_split(b);
    CHECK(s.low == std::vector<std::size_t>{0, 1, 2});
    CHECK(s.high == std::vector<std::size_t>{3});

    const std::vector<double> flat{5, 5, 5, 5};
    try {
        median_split(flat);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate);
    }
    CHECK_THROWS_AS(median_split(std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("jaccard") {
    std::set<int> a, b;
    for (int i = 0; i < 24; ++i) {
        a.insert(i);
    }
    for (int i = 13; i < 32; ++i) {
        b.insert(i);
    }
    auto j = jaccard(a, b);
    CHECK(j.intersection == 11);
    CHECK(j.value == 0.34375);
    CHECK(jaccard(a, a).value == 1.0);
    CHECK(jaccard(a, std::set<int>{100, 101}).value == 0.0);
    auto empty = jaccard(std::set<int>{}, std::set<int>{});
    CHECK(empty.both_empty);
    CHECK(empty.value == 0.0);

    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        std::set<int> x, y;
        for (int i = 0; i < 10; ++i) {
            x.insert(static_cast<int>(rng.below(20)));
            y.insert(static_cast<int>(rng.below(20)));
        }
        CHECK(jaccard(x, y).value == jaccard(y, x).value);
        CHECK(jaccard(x, y).value >= 0);
        CHECK(jaccard(x, y).value <= 1);
    }
}

TEST_CASE("two-proportion z-test") {
    auto brca = two_prop_ztest(11, 24, 31, 197);
    CHECK(std::abs(brca.p_value - 2.0e-4) <= 0.5e-4);
    auto luad = two_prop_ztest(6, 12, 32, 145);
    CHECK(std::abs(luad.p_value - 0.015) <= 0.002);
    auto equal = two_prop_ztest(5, 10, 50, 100);
    CHECK(equal.statistic == doctest::Approx(0.0));
    CHECK(equal.p_value == doctest::Approx(0.5));
    CHECK_THROWS_AS(two_prop_ztest(1, 0, 1, 2), Error);
    CHECK_THROWS_AS(two_prop_ztest(3, 2, 1, 2), Error);
}

TEST_CASE("mean and sd") {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(mean_of(v) == 5.0);
    CHECK(sd_of(v) == doctest::Approx(std::sqrt(32.0 / 7)));
    CHECK(sd_of(std::vector<double>{1}) == 0.0);
}
