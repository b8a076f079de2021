#include "gsae/stats.hpp"
#include "gsae/errors.hpp"

#include <cmath>
#include <numeric>

namespace gsae {

const char* test_method_name(TestMethod method) {
    switch (method) {
        case TestMethod::mww_exact: return "mww_exact";
        case TestMethod::mww_normal: return "mww_normal";
        case TestMethod::logrank: return "logrank";
        case TestMethod::two_proportion_z: return "two_proportion_z";
    }
    return "unknown";
}

double normal_upper_tail(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

namespace {

constexpr std::size_t exact_limit = 12;

/**
 * P(W >= observed) where W is the sum of `nx` ranks drawn without replacement from 1..n.
 * Counts subsets by dynamic programming over (subset size, rank sum).
 */
double exact_rank_sum_upper(std::size_t nx, std::size_t n, std::size_t observed) {
    const std::size_t max_sum = n * (n + 1) / 2;
    std::vector<std::vector<double> > ways(nx + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1;
    for (std::size_t rank = 1; rank <= n; ++rank) {
        for (std::size_t j = std::min(rank, nx); j >= 1; --j) {
            for (std::size_t s = max_sum; s >= rank; --s) {
                ways[j][s] += ways[j - 1][s - rank];
            }
        }
    }
    double total = 0, tail = 0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        total += ways[nx][s];
        if (s >= observed) {
            tail += ways[nx][s];
        }
    }
    return tail / total;
}

}

TestResult mww_one_tailed(std::span<const double> x, std::span<const double> y, double shift) {
    if (x.empty() || y.empty()) {
        throw Error(ErrorKind::domain, "Mann-Whitney test needs two non-empty samples");
    }

    const std::size_t nx = x.size(), ny = y.size(), n = nx + ny;
    struct Item {
        double value;
        bool from_x;
    };
    std::vector<Item> pooled;
    pooled.reserve(n);
    for (auto v : x) {
        pooled.push_back({v - shift, true});
    }
    for (auto v : y) {
        pooled.push_back({v, false});
    }
    std::sort(pooled.begin(), pooled.end(), [](const Item& a, const Item& b) { return a.value < b.value; });

    double rank_sum_x = 0;
    double tie_term = 0;
    bool has_ties = false;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && pooled[j + 1].value == pooled[i].value) {
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        const double t = static_cast<double>(j - i + 1);
        if (j > i) {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        for (std::size_t k = i; k <= j; ++k) {
            if (pooled[k].from_x) {
                rank_sum_x += midrank;
            }
        }
        i = j + 1;
    }

    const double dx = static_cast<double>(nx), dy = static_cast<double>(ny), dn = static_cast<double>(n);
    TestResult output;
    output.shift = shift;
    output.statistic = rank_sum_x - dx * (dx + 1) / 2;

    if (!has_ties && n <= exact_limit) {
        output.method = TestMethod::mww_exact;
        output.p_value = exact_rank_sum_upper(nx, n, static_cast<std::size_t>(std::llround(rank_sum_x)));
        return output;
    }

    output.method = TestMethod::mww_normal;
    const double variance = dx * dy / 12.0 * ((dn + 1) - tie_term / (dn * (dn - 1)));
    if (!(variance > 0)) {
        output.p_value = 1;
        return output;
    }
    const double z = (output.statistic - dx * dy / 2 - 0.5) / std::sqrt(variance);
    output.p_value = std::clamp(normal_upper_tail(z), 0.0, 1.0);
    return output;
}

double pscore(double p, bool* clamped) {
    constexpr double floor = 1e-300;
    const bool low = !(p >= floor);
    if (clamped) {
        *clamped = low;
    }
    return -std::log10(low ? floor : p);
}

double mean_of(std::span<const double> values) {
    if (values.empty()) {
        return 0;
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sd_of(std::span<const double> values) {
    if (values.size() < 2) {
        return 0;
    }
    const double mean = mean_of(values);
    double sum = 0;
    for (auto v : values) {
        sum += (v - mean) * (v - mean);
    }
    return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

HighImpact select_high_impact(const std::vector<GsScoreEntry>& entries, Direction direction) {
    if (entries.size() < 2) {
        throw Error(ErrorKind::domain, "high-impact selection needs at least two gene sets");
    }
    std::vector<double> scores;
    scores.reserve(entries.size());
    for (const auto& entry : entries) {
        scores.push_back(entry.gs_score);
    }

    HighImpact output;
    output.sd = sd_of(scores);
    if (output.sd == 0) {
        output.degenerate = true;
        return output;
    }

    const double cutoff = 2 * output.sd;
    for (const auto& entry : entries) {
        if ((direction == Direction::up && entry.gs_score > cutoff) || (direction == Direction::down && entry.gs_score < -cutoff)) {
            output.entries.push_back(entry);
        }
    }
    std::stable_sort(output.entries.begin(), output.entries.end(), [](const GsScoreEntry& a, const GsScoreEntry& b) {
        return std::abs(a.gs_score) > std::abs(b.gs_score);
    });
    return output;
}

MedianSplit median_split(std::span<const double> values) {
    if (values.size() < 4) {
        throw Error(ErrorKind::domain, "median split needs at least 4 samples");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = sorted.size();

    MedianSplit output;
    output.median = (n % 2) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (std::size_t i = 0; i < n; ++i) {
        (values[i] <= output.median ? output.low : output.high).push_back(i);
    }
    if (output.low.empty() || output.high.empty()) {
        throw Error(ErrorKind::degenerate, "median split leaves an empty group");
    }
    return output;
}

TestResult two_prop_ztest(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
    if (n1 == 0 || n2 == 0) {
        throw Error(ErrorKind::domain, "two-proportion test needs non-zero totals");
    }
    if (k1 > n1 || k2 > n2) {
        throw Error(ErrorKind::domain, "a success count exceeds its total");
    }

    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    const double se = std::sqrt(pooled * (1 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));

    TestResult output;
    output.method = TestMethod::two_proportion_z;
    output.statistic = (se > 0) ? (p1 - p2) / se : 0.0;
    output.p_value = normal_upper_tail(output.statistic);
    return output;
}

}
