#ifndef GSAE_GENESETS_HPP
#define GSAE_GENESETS_HPP

#include "dataio.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

/**
 * @file genesets.hpp
 * @brief Gene-set size filtering, kappa-based de-duplication and the membership mask of the gene-set layer.
 */

namespace gsae {

/**
 * Keep sets with `min_size <= |members| <= max_size`.
 */
GeneSetCollection size_filter(const GeneSetCollection& collection, std::size_t min_size = 15, std::size_t max_size = 500);

struct KappaResult {
    double kappa;
    /// One-sided upper-tail p-value for positive association.
    double p_value;
};

/**
 * Cohen's kappa between the membership indicators of two sets over `universe_size` genes,
 * given the two set sizes and the size of their intersection.
 *
 * Under the null, kappa is approximately normal with variance `pe / (N * (1 - pe))`.
 * Throws a degenerate error if either set is empty or covers the whole universe.
 */
KappaResult kappa(std::size_t size_a, std::size_t size_b, std::size_t overlap, std::size_t universe_size);

/// Convenience overload; both sets must be subsets of `universe`.
KappaResult kappa(const GeneSet& a, const GeneSet& b, const std::vector<std::string>& universe);

/**
 * One connected component of the significance graph built by `dedup()`.
 */
struct DedupComponent {
    std::vector<std::string> members;
    std::string representative;
    /// Smallest kappa p-value over the component's edges; 1 for singletons.
    double min_p_value = 1;
};

struct DedupResult {
    GeneSetCollection collection;
    std::vector<DedupComponent> components;
};

/**
 * Link every pair of sets with positive kappa and p-value below `p_threshold`,
 * then replace each connected component by its largest set (ties broken by name).
 * Pairs where kappa is undefined are never linked.
 * Surviving sets keep their input order.
 */
DedupResult dedup(const GeneSetCollection& collection, double p_threshold = 1e-7);

/// Columns: component_id, member_set_names (comma-separated), representative_name, min_p_value.
void write_dedup_audit(std::ostream& output, const DedupResult& result);

/**
 * Binary genes x sets connectivity of the gene-set layer.
 */
struct MembershipMask {
    std::vector<std::string> gene_ids;
    std::vector<std::string> set_names;
    /// Row indices of the member genes of each set, sorted.
    std::vector<std::vector<Eigen::Index> > columns;

    Eigen::Index num_genes() const { return static_cast<Eigen::Index>(gene_ids.size()); }
    Eigen::Index num_sets() const { return static_cast<Eigen::Index>(set_names.size()); }

    /// Dense 0/1 matrix with genes in rows.
    Eigen::MatrixXd dense() const;
};

/**
 * Throws a consistency error if a member is missing from `gene_ids`, or an empty-result error for an empty collection.
 */
MembershipMask build_mask(const GeneSetCollection& collection, const std::vector<std::string>& gene_ids);

}

#endif
