#ifndef GSAE_STATS_HPP
#define GSAE_STATS_HPP

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <set>
#include <span>
#include <string>
#include <vector>

/**
 * @file stats.hpp
 * @brief Rank tests, score helpers, median splits, Jaccard index and the two-proportion z-test.
 */

namespace gsae {

enum class TestMethod { mww_exact, mww_normal, logrank, two_proportion_z };

const char* test_method_name(TestMethod method);

struct TestResult {
    double statistic = 0;
    double p_value = 1;
    TestMethod method = TestMethod::mww_normal;
    /// Location shift, for rank tests only.
    double shift = 0;
};

/// Upper tail of the standard normal.
double normal_upper_tail(double z);

/**
 * One-tailed Mann-Whitney-Wilcoxon test of H1: `x - shift` is stochastically greater than `y`.
 *
 * The statistic is U for `x - shift`, with midranks for ties.
 * Tie-free pooled samples of at most 12 values get the exact null distribution;
 * everything else uses the normal approximation with tie-corrected variance and a 0.5 continuity correction.
 */
TestResult mww_one_tailed(std::span<const double> x, std::span<const double> y, double shift);

/// `-log10(p)`, with p clamped below at 1e-300; `clamped` reports whether that happened.
double pscore(double p, bool* clamped = nullptr);

/// Contribution of a gene set to a superset: `(mu1 - mu2) * weight`.
inline double gs_score(double mu1, double mu2, double weight) {
    return (mu1 - mu2) * weight;
}

struct GsScoreEntry {
    std::size_t set_index = 0;
    std::string set_name;
    double gs_score = 0;
    double weight = 0;
    double mu1 = 0;
    double mu2 = 0;
    /// p-value of the gene-set level test and its PScore.
    double p_value = 1;
    double p_score = 0;
};

enum class Direction { up, down };

struct HighImpact {
    std::vector<GsScoreEntry> entries;
    double sd = 0;
    /// True when all scores are equal, in which case nothing is selected.
    bool degenerate = false;
};

/**
 * Keep entries with `gs_score > 2 sd` (up) or `gs_score < -2 sd` (down), where sd is the sample standard deviation of all scores,
 * sorted by decreasing absolute score. Needs at least two entries.
 */
HighImpact select_high_impact(const std::vector<GsScoreEntry>& entries, Direction direction);

struct MedianSplit {
    double median = 0;
    std::vector<std::size_t> low;
    std::vector<std::size_t> high;
};

/**
 * Values at or below the median go to `low`, the rest to `high`.
 * Throws a domain error for fewer than 4 values and a degenerate error if either side is empty.
 */
MedianSplit median_split(std::span<const double> values);

struct JaccardResult {
    double value = 0;
    std::size_t intersection = 0;
    std::size_t union_size = 0;
    /// Both inputs empty; `value` is then 0.
    bool both_empty = false;
};

template<typename T>
JaccardResult jaccard(const std::set<T>& a, const std::set<T>& b) {
    JaccardResult output;
    std::vector<T> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    output.intersection = common.size();
    output.union_size = a.size() + b.size() - common.size();
    if (output.union_size == 0) {
        output.both_empty = true;
        return output;
    }
    output.value = static_cast<double>(output.intersection) / static_cast<double>(output.union_size);
    return output;
}

/**
 * Pooled two-proportion z-test of H1: `k1 / n1 > k2 / n2`, one-sided.
 * Throws a domain error when a count is zero or a success count exceeds its total.
 */
TestResult two_prop_ztest(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);

double mean_of(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sd_of(std::span<const double> values);

}

#endif
