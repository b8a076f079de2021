#include "gsae/survival.hpp"
#include "gsae/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsae {

SurvivalGroup survival_subset(const std::vector<double>& times, const std::vector<bool>& events, const std::vector<std::size_t>& indices) {
    SurvivalGroup output;
    output.times.reserve(indices.size());
    output.events.reserve(indices.size());
    for (auto i : indices) {
        output.times.push_back(times[i]);
        output.events.push_back(events[i]);
    }
    return output;
}

namespace {

void check_group(const SurvivalGroup& group) {
    if (group.times.size() != group.events.size()) {
        throw Error(ErrorKind::shape, "survival times and events differ in length");
    }
    for (auto t : group.times) {
        if (!(t >= 0)) {
            throw Error(ErrorKind::domain, "survival times must be non-negative");
        }
    }
}

}

TestResult logrank(const SurvivalGroup& g1, const SurvivalGroup& g2) {
    check_group(g1);
    check_group(g2);

    struct Subject {
        double time;
        bool event;
        bool first;
    };
    std::vector<Subject> pooled;
    pooled.reserve(g1.size() + g2.size());
    for (std::size_t i = 0; i < g1.size(); ++i) {
        pooled.push_back({g1.times[i], g1.events[i], true});
    }
    for (std::size_t i = 0; i < g2.size(); ++i) {
        pooled.push_back({g2.times[i], g2.events[i], false});
    }
    std::sort(pooled.begin(), pooled.end(), [](const Subject& a, const Subject& b) { return a.time < b.time; });

    double at_risk = static_cast<double>(pooled.size());
    double at_risk_1 = static_cast<double>(g1.size());
    double observed_1 = 0, expected_1 = 0, variance = 0;
    std::size_t total_events = 0;

    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        double deaths = 0, deaths_1 = 0, leaving = 0, leaving_1 = 0;
        while (j < pooled.size() && pooled[j].time == pooled[i].time) {
            leaving += 1;
            leaving_1 += pooled[j].first;
            if (pooled[j].event) {
                deaths += 1;
                deaths_1 += pooled[j].first;
            }
            ++j;
        }

        if (deaths > 0) {
            total_events += static_cast<std::size_t>(deaths);
            observed_1 += deaths_1;
            expected_1 += deaths * at_risk_1 / at_risk;
            if (at_risk > 1) {
                variance += deaths * (at_risk_1 / at_risk) * (1 - at_risk_1 / at_risk) * (at_risk - deaths) / (at_risk - 1);
            }
        }
        at_risk -= leaving;
        at_risk_1 -= leaving_1;
        i = j;
    }

    if (total_events == 0) {
        throw Error(ErrorKind::undefined_test, "log-rank test needs at least one event");
    }

    TestResult output;
    output.method = TestMethod::logrank;
    const double diff = observed_1 - expected_1;
    if (variance > 0) {
        output.statistic = diff * diff / variance;
        // Upper tail of chi-square with one degree of freedom.
        output.p_value = std::clamp(std::erfc(std::sqrt(output.statistic / 2)), 0.0, 1.0);
    } else {
        output.statistic = 0;
        output.p_value = 1;
    }
    return output;
}

std::vector<KmPoint> km_curve(const SurvivalGroup& group) {
    check_group(group);
    std::vector<std::size_t> order(group.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return group.times[a] < group.times[b]; });

    std::vector<KmPoint> output;
    output.push_back(KmPoint{0, 1, group.size(), 0});
    std::size_t at_risk = group.size();
    double survival = 1;
    for (std::size_t i = 0; i < order.size();) {
        const double time = group.times[order[i]];
        std::size_t j = i, deaths = 0;
        while (j < order.size() && group.times[order[j]] == time) {
            deaths += group.events[order[j]];
            ++j;
        }
        if (deaths > 0) {
            survival *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            output.push_back(KmPoint{time, survival, at_risk, deaths});
        }
        at_risk -= (j - i);
        i = j;
    }
    return output;
}

}
