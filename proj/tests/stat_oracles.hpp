#ifndef GSAE_TESTS_STAT_ORACLES_HPP
#define GSAE_TESTS_STAT_ORACLES_HPP

#include "gsae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

namespace gsae::testing {

/// Mann-Whitney U of `x` against `y` by pairwise counting, ties counted as one half.
inline double pairwise_u(const std::vector<double>& x, const std::vector<double>& y) {
    double u = 0;
    for (double a : x) {
        for (double b : y) {
            u += (a > b) ? 1.0 : (a == b ? 0.5 : 0.0);
        }
    }
    return u;
}

/**
 * One-tailed permutation p of "x - shift greater than y" over every way of choosing |x| values from the pooled sample.
 */
inline double mww_enumeration_p(const std::vector<double>& x, const std::vector<double>& y, double shift) {
    std::vector<double> pooled;
    for (double a : x) {
        pooled.push_back(a - shift);
    }
    const auto nx = pooled.size();
    pooled.insert(pooled.end(), y.begin(), y.end());
    const double observed = pairwise_u(std::vector<double>(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(nx)), y);

    std::vector<bool> pick(pooled.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(nx), true);
    std::size_t total = 0, extreme = 0;
    do {
        std::vector<double> a, b;
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            (pick[i] ? a : b).push_back(pooled[i]);
        }
        ++total;
        extreme += pairwise_u(a, b) >= observed - 1e-9;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

/**
 * Monte Carlo permutation p of the same hypothesis, using midrank sums of random relabelings.
 */
inline double mww_monte_carlo_p(const std::vector<double>& x, const std::vector<double>& y, double shift, std::size_t draws, Rng& rng) {
    std::vector<double> pooled;
    for (double a : x) {
        pooled.push_back(a - shift);
    }
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto n = pooled.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) {
            ++j;
        }
        for (std::size_t k = i; k <= j; ++k) {
            rank[order[k]] = 0.5 * static_cast<double>(i + j) + 1.0;
        }
        i = j + 1;
    }

    double observed = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        observed += rank[i];
    }
    std::vector<double> shuffled = rank;
    std::size_t extreme = 0;
    for (std::size_t d = 0; d < draws; ++d) {
        // Partial Fisher-Yates: only the first |x| slots are needed.
        double sum = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(shuffled[i], shuffled[j]);
            sum += shuffled[i];
        }
        extreme += sum >= observed - 1e-9;
    }
    return static_cast<double>(extreme) / static_cast<double>(draws);
}

struct SurvivalSample {
    std::vector<double> times;
    std::vector<bool> events;
    /// True for membership in the first group.
    std::vector<bool> first;
};

/// Log-rank chi-square from the observed-minus-expected table, written out directly.
inline double logrank_chi_square(const SurvivalSample& s) {
    std::map<double, std::vector<std::size_t> > by_time;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        by_time[s.times[i]].push_back(i);
    }
    double at_risk = static_cast<double>(s.times.size());
    double at_risk_1 = static_cast<double>(std::count(s.first.begin(), s.first.end(), true));
    double o_minus_e = 0, variance = 0;
    for (const auto& [time, members] : by_time) {
        double deaths = 0, deaths_1 = 0, leaving = 0, leaving_1 = 0;
        for (auto i : members) {
            deaths += s.events[i];
            deaths_1 += s.events[i] && s.first[i];
            leaving += 1;
            leaving_1 += s.first[i];
        }
        if (deaths > 0) {
            o_minus_e += deaths_1 - deaths * at_risk_1 / at_risk;
            if (at_risk > 1) {
                variance += deaths * (at_risk_1 / at_risk) * (1 - at_risk_1 / at_risk) * (at_risk - deaths) / (at_risk - 1);
            }
        }
        at_risk -= leaving;
        at_risk_1 -= leaving_1;
    }
    return variance > 0 ? o_minus_e * o_minus_e / variance : 0.0;
}

/// Exact permutation p of the log-rank statistic over every relabeling with the same group sizes.
inline double logrank_permutation_p(const SurvivalSample& s) {
    const double observed = logrank_chi_square(s);
    const auto n1 = static_cast<std::size_t>(std::count(s.first.begin(), s.first.end(), true));
    SurvivalSample relabeled = s;
    std::vector<bool> pick(s.times.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n1), true);
    std::size_t total = 0, extreme = 0;
    do {
        relabeled.first = pick;
        ++total;
        extreme += logrank_chi_square(relabeled) >= observed - 1e-9;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}

#endif
