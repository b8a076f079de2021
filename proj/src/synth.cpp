#include "gsae/synth.hpp"
#include "gsae/errors.hpp"
#include "gsae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace gsae {

const char* hazard_link_name(HazardLink link) {
    switch (link) {
        case HazardLink::none: return "none";
        case HazardLink::single: return "single";
        case HazardLink::distributed: return "distributed";
    }
    return "unknown";
}

HazardLink parse_hazard_link(const std::string& name) {
    if (name == "none") return HazardLink::none;
    if (name == "single") return HazardLink::single;
    if (name == "distributed") return HazardLink::distributed;
    throw Error(ErrorKind::config, "unknown hazard link '" + name + "' (expected none, single or distributed)");
}

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%s%0*zu", prefix, width, i);
    return buffer;
}

}

SynthData synthesize(const SynthConfig& config) {
    const auto ngroups = config.group_proportions.size();
    if (config.n_sets == 0 || config.n_genes < config.n_sets) {
        throw Error(ErrorKind::config, "need at least one gene per gene set");
    }
    if (ngroups == 0 || config.n_samples < ngroups) {
        throw Error(ErrorKind::config, "need at least one sample per group");
    }
    const std::size_t nhazard = config.hazard_link == HazardLink::none ? 0 : (config.hazard_link == HazardLink::single ? 1 : config.n_hazard_sets);
    const std::size_t first_hazard = (ngroups - 1) * config.n_planted;
    if (first_hazard + nhazard > config.n_sets) {
        throw Error(ErrorKind::config, "not enough gene sets for the planted and hazard sets");
    }

    Rng root(config.seed);
    Rng group_rng = root.split();
    Rng factor_rng = root.split();
    Rng noise_rng = root.split();
    Rng survival_rng = root.split();

    SynthData data;
    const auto n = config.n_samples;

    // Group assignment with sizes proportional to the weights, in shuffled order.
    const double total_weight = std::accumulate(config.group_proportions.begin(), config.group_proportions.end(), 0.0);
    data.groups.reserve(n);
    for (std::size_t k = 0; k < ngroups; ++k) {
        std::size_t count = (k + 1 == ngroups) ? n - data.groups.size()
            : static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.group_proportions[k] / total_weight));
        count = std::min(count, n - data.groups.size());
        data.groups.insert(data.groups.end(), count, static_cast<int>(k));
        data.group_names.push_back(numbered("group", k, 1));
    }
    group_rng.shuffle(std::span<int>(data.groups));

    // Gene-set blocks.
    const auto per_set = config.n_genes / config.n_sets;
    std::vector<std::size_t> set_of_gene(config.n_genes);
    for (std::size_t g = 0; g < config.n_genes; ++g) {
        set_of_gene[g] = std::min(g / per_set, config.n_sets - 1);
        data.expression.gene_ids.push_back(numbered("GENE", g + 1, 4));
    }
    std::vector<GeneSet> sets(config.n_sets);
    for (std::size_t s = 0; s < config.n_sets; ++s) {
        sets[s].name = numbered("SET_", s + 1, 2);
        sets[s].description = "synthetic";
    }
    for (std::size_t g = 0; g < config.n_genes; ++g) {
        sets[set_of_gene[g]].members.push_back(data.expression.gene_ids[g]);
    }

    data.planted_sets.resize(ngroups);
    std::vector<int> planted_group(config.n_sets, -1);
    for (std::size_t k = 1; k < ngroups; ++k) {
        for (std::size_t p = 0; p < config.n_planted; ++p) {
            const auto s = (k - 1) * config.n_planted + p;
            planted_group[s] = static_cast<int>(k);
            data.planted_sets[k].push_back(sets[s].name);
        }
    }
    for (std::size_t h = 0; h < nhazard; ++h) {
        data.hazard_sets.push_back(sets[first_hazard + h].name);
    }

    // Latent factors; hazard sets under the distributed link share a common component.
    Eigen::MatrixXd factor(config.n_sets, n);
    Eigen::VectorXd shared(n);
    for (std::size_t i = 0; i < n; ++i) {
        shared(i) = factor_rng.normal();
    }
    for (std::size_t s = 0; s < config.n_sets; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            factor(s, i) = factor_rng.normal();
        }
    }
    if (config.hazard_link == HazardLink::distributed) {
        const double rho = config.hazard_correlation;
        for (std::size_t h = 0; h < nhazard; ++h) {
            factor.row(first_hazard + h) = std::sqrt(rho) * shared.transpose() + std::sqrt(1 - rho) * factor.row(first_hazard + h);
        }
    }

    const double gene_sd = std::sqrt(config.loading * config.loading + config.noise_sd * config.noise_sd);
    data.expression.values.resize(config.n_genes, n);
    for (std::size_t g = 0; g < config.n_genes; ++g) {
        const double base = 4.0 + 4.0 * noise_rng.uniform();
        const auto s = set_of_gene[g];
        for (std::size_t i = 0; i < n; ++i) {
            double value = base + config.loading * factor(s, i) + config.noise_sd * noise_rng.normal();
            if (planted_group[s] >= 0 && data.groups[i] == planted_group[s]) {
                value += config.effect * gene_sd;
            }
            data.expression.values(g, i) = std::max(value, 0.0);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        data.expression.sample_ids.push_back(numbered("S", i + 1, 4));
    }
    data.collection = GeneSetCollection::from_sets(std::move(sets));

    // Survival.
    const double base_rate = std::log(2.0) / config.baseline_median_days;
    data.clinical.label_columns = {"group"};
    for (std::size_t i = 0; i < n; ++i) {
        double risk = 0;
        if (config.hazard_link == HazardLink::single) {
            risk = factor(first_hazard, i);
        } else if (config.hazard_link == HazardLink::distributed) {
            risk = shared(i);
        }
        const double rate = base_rate * std::exp(config.hazard_strength * risk);
        double u;
        do {
            u = survival_rng.uniform();
        } while (u <= 0);
        const double event_time = -std::log(u) / rate;
        const double censor_time = survival_rng.uniform(0, config.censor_max_days);

        ClinicalRecord record;
        record.sample_id = data.expression.sample_ids[i];
        record.event = event_time <= censor_time;
        record.time_days = static_cast<std::int64_t>(std::ceil(std::min(event_time, censor_time)));
        record.labels["group"] = data.group_names[static_cast<std::size_t>(data.groups[i])];
        data.clinical.records.push_back(std::move(record));
    }
    data.clinical = cap_survival(std::move(data.clinical), default_cap_days);
    return data;
}

}
