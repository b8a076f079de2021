#include "gsae/genesets.hpp"
#include "gsae/errors.hpp"
#include "gsae/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace gsae {

GeneSetCollection size_filter(const GeneSetCollection& collection, std::size_t min_size, std::size_t max_size) {
    std::vector<GeneSet> kept;
    for (const auto& set : collection.sets) {
        if (set.members.size() >= min_size && set.members.size() <= max_size) {
            kept.push_back(set);
        }
    }
    return GeneSetCollection::from_sets(std::move(kept));
}

KappaResult kappa(std::size_t size_a, std::size_t size_b, std::size_t overlap, std::size_t universe_size) {
    if (universe_size == 0) {
        throw Error(ErrorKind::degenerate, "kappa over an empty universe");
    }
    if (size_a == 0 || size_b == 0 || size_a >= universe_size || size_b >= universe_size) {
        throw Error(ErrorKind::degenerate, "kappa is undefined when a set is empty or covers the whole universe");
    }

    const double n = static_cast<double>(universe_size);
    const double pa = static_cast<double>(size_a) / n;
    const double pb = static_cast<double>(size_b) / n;
    const double both = static_cast<double>(overlap);
    const double neither = n - static_cast<double>(size_a) - static_cast<double>(size_b) + both;

    const double observed = (both + neither) / n;
    const double expected = pa * pb + (1 - pa) * (1 - pb);
    const double value = (observed - expected) / (1 - expected);

    const double se = std::sqrt(expected / (n * (1 - expected)));
    const double z = value / se;
    return KappaResult{value, 0.5 * std::erfc(z / std::sqrt(2.0))};
}

KappaResult kappa(const GeneSet& a, const GeneSet& b, const std::vector<std::string>& universe) {
    std::unordered_set<std::string> in_universe(universe.begin(), universe.end());
    std::unordered_set<std::string> in_a;
    for (const auto& gene : a.members) {
        if (!in_universe.count(gene)) {
            throw Error(ErrorKind::consistency, "gene '" + gene + "' of set '" + a.name + "' is not in the universe");
        }
        in_a.insert(gene);
    }
    std::unordered_set<std::string> in_b;
    std::size_t overlap = 0;
    for (const auto& gene : b.members) {
        if (!in_universe.count(gene)) {
            throw Error(ErrorKind::consistency, "gene '" + gene + "' of set '" + b.name + "' is not in the universe");
        }
        if (in_b.insert(gene).second && in_a.count(gene)) {
            ++overlap;
        }
    }
    return kappa(in_a.size(), in_b.size(), overlap, in_universe.size());
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    std::size_t find(std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }

    void join(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
};

}

DedupResult dedup(const GeneSetCollection& collection, double p_threshold) {
    const auto nsets = collection.sets.size();
    const auto nuniverse = collection.universe.size();

    std::unordered_map<std::string, std::size_t> gene_index;
    for (std::size_t g = 0; g < nuniverse; ++g) {
        gene_index.emplace(collection.universe[g], g);
    }
    std::vector<std::vector<std::size_t> > indices(nsets);
    for (std::size_t s = 0; s < nsets; ++s) {
        for (const auto& gene : collection.sets[s].members) {
            indices[s].push_back(gene_index.at(gene));
        }
        std::sort(indices[s].begin(), indices[s].end());
    }

    DisjointSets components(nsets);
    std::vector<double> min_p(nsets, 1.0);
    std::vector<std::pair<std::size_t, double> > edges;
    for (std::size_t a = 0; a < nsets; ++a) {
        for (std::size_t b = a + 1; b < nsets; ++b) {
            const auto& ia = indices[a];
            const auto& ib = indices[b];
            if (ia.empty() || ib.empty() || ia.size() >= nuniverse || ib.size() >= nuniverse) {
                continue;
            }
            std::size_t overlap = 0;
            auto x = ia.begin();
            auto y = ib.begin();
            while (x != ia.end() && y != ib.end()) {
                if (*x < *y) {
                    ++x;
                } else if (*y < *x) {
                    ++y;
                } else {
                    ++overlap;
                    ++x;
                    ++y;
                }
            }
            const auto result = kappa(ia.size(), ib.size(), overlap, nuniverse);
            if (result.kappa > 0 && result.p_value < p_threshold) {
                components.join(a, b);
                edges.emplace_back(a, result.p_value);
            }
        }
    }
    for (const auto& [a, p] : edges) {
        auto root = components.find(a);
        min_p[root] = std::min(min_p[root], p);
    }

    // Components keyed by root, which is the smallest member index, so iteration follows input order.
    std::map<std::size_t, std::vector<std::size_t> > grouped;
    for (std::size_t s = 0; s < nsets; ++s) {
        grouped[components.find(s)].push_back(s);
    }

    DedupResult output;
    std::vector<bool> keep(nsets, false);
    for (const auto& [root, members] : grouped) {
        std::size_t best = members.front();
        for (auto m : members) {
            const auto& candidate = collection.sets[m];
            const auto& current = collection.sets[best];
            if (candidate.members.size() > current.members.size() ||
                (candidate.members.size() == current.members.size() && candidate.name < current.name)) {
                best = m;
            }
        }
        keep[best] = true;

        DedupComponent component;
        for (auto m : members) {
            component.members.push_back(collection.sets[m].name);
        }
        component.representative = collection.sets[best].name;
        component.min_p_value = min_p[root];
        output.components.push_back(std::move(component));
    }

    std::vector<GeneSet> survivors;
    for (std::size_t s = 0; s < nsets; ++s) {
        if (keep[s]) {
            survivors.push_back(collection.sets[s]);
        }
    }
    output.collection = GeneSetCollection::from_sets(std::move(survivors));
    return output;
}

void write_dedup_audit(std::ostream& output, const DedupResult& result) {
    output << "component_id\tmember_set_names\trepresentative_name\tmin_p_value\n";
    for (std::size_t c = 0; c < result.components.size(); ++c) {
        const auto& component = result.components[c];
        output << c << '\t';
        for (std::size_t m = 0; m < component.members.size(); ++m) {
            output << (m ? "," : "") << component.members[m];
        }
        output << '\t' << component.representative << '\t' << text::format_double(component.min_p_value) << '\n';
    }
}

Eigen::MatrixXd MembershipMask::dense() const {
    Eigen::MatrixXd output = Eigen::MatrixXd::Zero(num_genes(), num_sets());
    for (Eigen::Index s = 0; s < num_sets(); ++s) {
        for (auto g : columns[s]) {
            output(g, s) = 1;
        }
    }
    return output;
}

MembershipMask build_mask(const GeneSetCollection& collection, const std::vector<std::string>& gene_ids) {
    if (collection.sets.empty()) {
        throw Error(ErrorKind::empty_result, "cannot build a membership mask from an empty gene-set collection");
    }

    std::unordered_map<std::string, Eigen::Index> row_of;
    for (std::size_t g = 0; g < gene_ids.size(); ++g) {
        if (!row_of.emplace(gene_ids[g], static_cast<Eigen::Index>(g)).second) {
            throw Error(ErrorKind::duplicate, "gene '" + gene_ids[g] + "' appears more than once in the mask rows");
        }
    }

    MembershipMask mask;
    mask.gene_ids = gene_ids;
    for (const auto& set : collection.sets) {
        std::vector<Eigen::Index> rows;
        for (const auto& gene : set.members) {
            auto it = row_of.find(gene);
            if (it == row_of.end()) {
                throw Error(ErrorKind::consistency, "gene '" + gene + "' of set '" + set.name + "' is absent from the gene list");
            }
            rows.push_back(it->second);
        }
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        if (rows.empty()) {
            throw Error(ErrorKind::consistency, "gene set '" + set.name + "' has no members");
        }
        mask.set_names.push_back(set.name);
        mask.columns.push_back(std::move(rows));
    }
    return mask;
}

}
