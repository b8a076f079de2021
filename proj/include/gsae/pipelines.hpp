#ifndef GSAE_PIPELINES_HPP
#define GSAE_PIPELINES_HPP

#include "dataio.hpp"
#include "embed.hpp"
#include "genesets.hpp"
#include "model.hpp"
#include "stats.hpp"
#include "survival.hpp"
#include "training.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

/**
 * @file pipelines.hpp
 * @brief Subtype discovery, survival screening, reproducibility comparison and classification on top of a trained model.
 */

namespace gsae {

/**
 * Node outputs of a trained autoencoder for a set of samples, with the incoming weights of the superset layer.
 */
struct NodeOutputs {
    Encoding encoding;
    /// Superset layer weights, supersets x gene sets.
    Eigen::MatrixXd superset_weights;
    std::vector<std::string> set_names;
};

NodeOutputs node_outputs(const Model& model, const Eigen::MatrixXd& data);

/**
 * gsScore entries of every gene set for one superset, with group 1 and group 2 given as sample indices.
 * `p_value`/`p_score` are left at their defaults.
 */
std::vector<GsScoreEntry> gs_scores(const NodeOutputs& nodes, Eigen::Index superset, const std::vector<std::size_t>& group1, const std::vector<std::size_t>& group2);

struct ClusterOptions {
    TsneOptions tsne;
    double eps = 2.0;
    std::size_t min_pts = 5;
};

struct Clustering {
    Eigen::MatrixXd embedding;
    std::vector<int> labels;
    double kl_initial = 0;
    double kl_final = 0;
};

/// t-SNE of the samples (columns of `node_values`), then DBSCAN on the embedding.
Clustering cluster_samples(const Eigen::MatrixXd& node_values, const ClusterOptions& options);

struct SubtypeOptions {
    /// Location shift of the superset-level test; scale-dependent, so there is no default.
    double shift = 0;
    double p_threshold = 0.01;
    /// Location shift of the gene-set level PScore test.
    double geneset_shift = 0.5;
    /// Cluster used as group 1; the smallest non-noise cluster when unset.
    std::optional<int> target_cluster;
};

struct SupersetTest {
    Eigen::Index superset = 0;
    TestResult up;
    TestResult down;
};

struct SubtypeReport {
    std::vector<int> cluster_labels;
    int target_cluster = 0;
    std::vector<std::size_t> group1;
    std::vector<std::size_t> group2;
    std::vector<SupersetTest> tests;
    std::vector<Eigen::Index> up_supersets;
    std::vector<Eigen::Index> down_supersets;
    /// High-impact gene sets of every significant superset.
    std::map<Eigen::Index, HighImpact> high_impact;
};

/**
 * Compare superset outputs of the target cluster (group 1) against every other non-noise sample (group 2)
 * with the shifted one-tailed rank test in both directions, then rank the gene sets of significant supersets by gsScore.
 * Throws a config error if fewer than two non-noise clusters are present.
 */
SubtypeReport subtype_pipeline(const Model& model, const Eigen::MatrixXd& data, const std::vector<int>& cluster_labels, const SubtypeOptions& options);

struct SurvivalOptions {
    double superset_p = 0.001;
    std::size_t top_k = 20;
};

struct NodeSurvival {
    Eigen::Index node = 0;
    TestResult test;
    /// Median split or test was undefined; `test` is then meaningless.
    bool skipped = false;
    MedianSplit split;
};

struct SupersetSurvival {
    Eigen::Index superset = 0;
    TestResult test;
    /// Gene sets ranked by decreasing gsScore (group 1 = high half of the superset), `p_value` = gene-set log-rank p.
    std::vector<GsScoreEntry> top_gene_sets;
    std::vector<KmPoint> km_low;
    std::vector<KmPoint> km_high;
};

struct SurvivalReport {
    std::vector<NodeSurvival> supersets;
    std::vector<NodeSurvival> gene_sets;
    /// Significant supersets by increasing p-value.
    std::vector<SupersetSurvival> significant;
};

/// Median split of each node (row) followed by log-rank; degenerate nodes are flagged as skipped.
std::vector<NodeSurvival> screen_nodes(const Eigen::MatrixXd& node_values, const std::vector<double>& times, const std::vector<bool>& events);

SurvivalReport survival_pipeline(const Model& model, const Eigen::MatrixXd& data, const ClinicalTable& clinical, const SurvivalOptions& options);

struct ReproOptions {
    double split = 0.6;
    double sig_p = 0.05;
    Eigen::Index superset_size = 200;
    TrainConfig train;
    std::uint64_t seed = 0;
    /// Use the training samples as the test split as well.
    bool test_on_train = false;
};

struct LevelOverlap {
    std::set<std::size_t> train_significant;
    std::set<std::size_t> test_significant;
    JaccardResult jaccard;
};

struct ReproReport {
    LevelOverlap supersets;
    LevelOverlap gene_sets;
    /// Proportion test of overlap / train-significant, supersets against gene sets; absent when a level has no train-significant node.
    std::optional<TestResult> z_test;
    std::vector<std::string> flags;
    std::vector<std::size_t> train_samples;
    std::vector<std::size_t> test_samples;
};

/// Jaccard indices and the proportion test from already-determined significant sets.
ReproReport summarize_reproducibility(std::set<std::size_t> superset_train, std::set<std::size_t> superset_test, std::set<std::size_t> geneset_train, std::set<std::size_t> geneset_test);

/**
 * Train an autoencoder on a random `split` fraction of the samples, encode both halves,
 * and compare the survival-significant supersets and gene sets between them.
 */
ReproReport repro_pipeline(const ExpressionMatrix& data, const ClinicalTable& clinical, const MembershipMask& mask, const ReproOptions& options);

enum class ClassifierVariant { superset, geneset, dense, pca_dense };

const char* classifier_variant_name(ClassifierVariant variant);
ClassifierVariant parse_classifier_variant(const std::string& name);

struct ClassifyOptions {
    ClassifierVariant variant = ClassifierVariant::superset;
    Eigen::Index superset_size = 200;
    std::vector<Eigen::Index> dense_widths{200};
    Eigen::Index pca_components = 500;
    std::size_t folds = 10;
    TrainConfig train;
};

struct ClassifyReport {
    ClassifierVariant variant = ClassifierVariant::superset;
    CrossValidation cv;
    std::vector<std::string> class_names;
    std::size_t layer_count = 0;
    /// Principal components actually used (pca_dense only).
    Eigen::Index pca_components = 0;
    bool pca_truncated = false;
};

/**
 * The untrained model of a variant; `input_ids` name the features it sees (principal components for pca_dense).
 */
Model build_classifier(const ClassifyOptions& options, const MembershipMask& mask, const std::vector<std::string>& input_ids, const std::vector<std::string>& class_names, Rng& rng);

/**
 * Stratified cross-validated accuracy of the requested variant. `labels` are class names per sample (column of `data`).
 */
ClassifyReport classify_pipeline(const ExpressionMatrix& data, const std::vector<std::string>& labels, const MembershipMask& mask, const ClassifyOptions& options);

}

#endif
