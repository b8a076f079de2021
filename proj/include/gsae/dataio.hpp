#ifndef GSAE_DATAIO_HPP
#define GSAE_DATAIO_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

/**
 * @file dataio.hpp
 * @brief Loading, filtering and aligning expression matrices, gene-set files and clinical tables.
 *
 * All readers accept LF or CRLF line endings and parse numbers with `std::from_chars`,
 * so results never depend on the process locale.
 */

namespace gsae {

/**
 * Genes in rows, samples in columns, values on the log2(TPM + 1) scale.
 */
struct ExpressionMatrix {
    std::vector<std::string> gene_ids;
    std::vector<std::string> sample_ids;
    Eigen::MatrixXd values;

    Eigen::Index num_genes() const { return values.rows(); }
    Eigen::Index num_samples() const { return values.cols(); }
};

enum class ExpressionUnit { tpm, logtpm };

/**
 * A named gene set. `members` is kept sorted and free of duplicates.
 */
struct GeneSet {
    std::string name;
    std::string description;
    std::vector<std::string> members;
};

/**
 * Ordered gene sets together with the ordered union of their members.
 * Build through `from_sets()` so that the invariants hold.
 */
struct GeneSetCollection {
    std::vector<GeneSet> sets;
    /// Every member symbol, in order of first appearance across `sets`.
    std::vector<std::string> universe;

    /**
     * @param sets Gene sets; members are sorted and de-duplicated in place.
     * @return A collection with a freshly computed universe.
     * Throws a duplicate error if two sets share a name.
     */
    static GeneSetCollection from_sets(std::vector<GeneSet> sets);

    std::size_t size() const { return sets.size(); }
    std::vector<std::string> names() const;
};

struct ClinicalRecord {
    std::string sample_id;
    std::int64_t time_days = 0;
    bool event = false;
    /// Values of the extra columns, keyed by header name.
    std::map<std::string, std::string> labels;
};

struct ClinicalTable {
    std::vector<ClinicalRecord> records;
    /// Extra (label) column names in file order.
    std::vector<std::string> label_columns;

    /// Index of `sample_id` in `records`, if present.
    std::optional<std::size_t> find(const std::string& sample_id) const;
};

inline constexpr std::int64_t default_cap_days = 1825;

ExpressionMatrix read_expression(std::istream& input, ExpressionUnit unit, const std::string& source = "<stream>");
ExpressionMatrix load_expression(const std::filesystem::path& path, ExpressionUnit unit);

/// Values are written in shortest round-trip form so that reloading is exact.
void write_expression(std::ostream& output, const ExpressionMatrix& matrix);
void save_expression(const std::filesystem::path& path, const ExpressionMatrix& matrix);

/**
 * Keep genes whose row mean exceeds `mean_min` and whose sample standard deviation (n - 1 denominator) exceeds `sd_min`.
 * Gene order is preserved. Throws an empty-result error if no gene survives.
 */
ExpressionMatrix filter_genes(const ExpressionMatrix& matrix, double mean_min = 1.0, double sd_min = 0.5);

GeneSetCollection read_gmt(std::istream& input, const std::string& source = "<stream>");
GeneSetCollection load_gmt(const std::filesystem::path& path);
void write_gmt(std::ostream& output, const GeneSetCollection& collection);
void save_gmt(const std::filesystem::path& path, const GeneSetCollection& collection);

/**
 * Parse a clinical TSV with a header containing `sample_id`, `time_days` and `event` (0/1).
 * Remaining columns become labels. Survival is capped at `cap_days` via `cap_survival()`.
 */
ClinicalTable read_clinical(std::istream& input, std::int64_t cap_days = default_cap_days, const std::string& source = "<stream>");
ClinicalTable load_clinical(const std::filesystem::path& path, std::int64_t cap_days = default_cap_days);
void write_clinical(std::ostream& output, const ClinicalTable& table);
void save_clinical(const std::filesystem::path& path, const ClinicalTable& table);

/**
 * Records with a time beyond `cap_days` are truncated to `cap_days` and censored.
 */
ClinicalTable cap_survival(ClinicalTable table, std::int64_t cap_days = default_cap_days);

struct Aligned {
    ExpressionMatrix matrix;
    GeneSetCollection collection;
    /// When present, `clinical->records[i]` describes `matrix.sample_ids[i]`.
    std::optional<ClinicalTable> clinical;
};

/**
 * Restrict the expression matrix to genes in some set, restrict each set to genes in the matrix (dropping emptied sets),
 * and, when a clinical table is given, keep only samples present in both, ordered as in the matrix.
 */
Aligned align(const ExpressionMatrix& matrix, const GeneSetCollection& collection, const std::optional<ClinicalTable>& clinical = std::nullopt);

/// Column subset of an expression matrix, in the given order.
ExpressionMatrix select_samples(const ExpressionMatrix& matrix, const std::vector<std::size_t>& columns);

}

#endif
