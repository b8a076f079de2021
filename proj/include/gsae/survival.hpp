#ifndef GSAE_SURVIVAL_HPP
#define GSAE_SURVIVAL_HPP

#include "stats.hpp"

#include <cstddef>
#include <vector>

/**
 * @file survival.hpp
 * @brief Kaplan-Meier curves and the two-group log-rank test.
 */

namespace gsae {

struct SurvivalGroup {
    std::vector<double> times;
    /// True for an observed death, false for censoring.
    std::vector<bool> events;

    std::size_t size() const { return times.size(); }
};

/// Subset of the given (time, event) vectors.
SurvivalGroup survival_subset(const std::vector<double>& times, const std::vector<bool>& events, const std::vector<std::size_t>& indices);

/**
 * Two-sided log-rank test with one degree of freedom.
 * Throws an undefined-test error when neither group has an event.
 */
TestResult logrank(const SurvivalGroup& g1, const SurvivalGroup& g2);

struct KmPoint {
    double time = 0;
    double survival = 1;
    std::size_t at_risk = 0;
    std::size_t events = 0;
};

/**
 * Product-limit estimate. The first point is `(0, 1)`; then one point per distinct event time,
 * with the survival probability just after that time. Censored subjects leave the risk set after their time.
 */
std::vector<KmPoint> km_curve(const SurvivalGroup& group);

}

#endif
