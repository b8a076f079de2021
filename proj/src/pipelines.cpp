#include "gsae/pipelines.hpp"
#include "gsae/errors.hpp"
#include "gsae/pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace gsae {

NodeOutputs node_outputs(const Model& model, const Eigen::MatrixXd& data) {
    if (model.layers.size() < 2 || !model.layers[0].is_masked()) {
        throw Error(ErrorKind::config, "node outputs need a model whose first layer is the masked gene-set layer followed by a superset layer");
    }
    NodeOutputs output;
    output.encoding = encode(model, data);
    output.superset_weights = model.layers[1].weights;
    output.set_names = model.set_names;
    return output;
}

namespace {

std::vector<double> pick(const Eigen::MatrixXd& values, Eigen::Index row, const std::vector<std::size_t>& columns) {
    std::vector<double> output;
    output.reserve(columns.size());
    for (auto c : columns) {
        output.push_back(values(row, static_cast<Eigen::Index>(c)));
    }
    return output;
}

std::vector<double> row_values(const Eigen::MatrixXd& values, Eigen::Index row) {
    std::vector<double> output(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        output[static_cast<std::size_t>(c)] = values(row, c);
    }
    return output;
}

}

std::vector<GsScoreEntry> gs_scores(const NodeOutputs& nodes, Eigen::Index superset, const std::vector<std::size_t>& group1, const std::vector<std::size_t>& group2) {
    const auto& geneset = nodes.encoding.geneset;
    std::vector<GsScoreEntry> output;
    output.reserve(static_cast<std::size_t>(geneset.rows()));
    for (Eigen::Index i = 0; i < geneset.rows(); ++i) {
        GsScoreEntry entry;
        entry.set_index = static_cast<std::size_t>(i);
        entry.set_name = i < static_cast<Eigen::Index>(nodes.set_names.size()) ? nodes.set_names[static_cast<std::size_t>(i)] : std::to_string(i);
        const auto x = pick(geneset, i, group1);
        const auto y = pick(geneset, i, group2);
        entry.mu1 = mean_of(x);
        entry.mu2 = mean_of(y);
        entry.weight = nodes.superset_weights(superset, i);
        entry.gs_score = gs_score(entry.mu1, entry.mu2, entry.weight);
        output.push_back(std::move(entry));
    }
    return output;
}

Clustering cluster_samples(const Eigen::MatrixXd& node_values, const ClusterOptions& options) {
    const auto tsne = tsne_exact(node_values.transpose(), options.tsne);
    Clustering output;
    output.labels = dbscan(tsne.embedding, options.eps, options.min_pts);
    output.embedding = tsne.embedding;
    output.kl_initial = tsne.kl_initial;
    output.kl_final = tsne.kl_final;
    return output;
}

SubtypeReport subtype_pipeline(const Model& model, const Eigen::MatrixXd& data, const std::vector<int>& cluster_labels, const SubtypeOptions& options) {
    if (static_cast<Eigen::Index>(cluster_labels.size()) != data.cols()) {
        throw Error(ErrorKind::shape, "one cluster label per sample is required");
    }

    std::map<int, std::size_t> sizes;
    for (auto label : cluster_labels) {
        if (label != noise_label) {
            ++sizes[label];
        }
    }
    if (sizes.size() < 2) {
        throw Error(ErrorKind::config, "subtype analysis needs at least two clusters, found " + std::to_string(sizes.size()));
    }

    SubtypeReport report;
    report.cluster_labels = cluster_labels;
    if (options.target_cluster) {
        if (!sizes.count(*options.target_cluster)) {
            throw Error(ErrorKind::config, "target cluster " + std::to_string(*options.target_cluster) + " does not exist");
        }
        report.target_cluster = *options.target_cluster;
    } else {
        auto smallest = sizes.begin();
        for (auto it = sizes.begin(); it != sizes.end(); ++it) {
            if (it->second < smallest->second) {
                smallest = it;
            }
        }
        report.target_cluster = smallest->first;
    }
    for (std::size_t s = 0; s < cluster_labels.size(); ++s) {
        if (cluster_labels[s] == noise_label) {
            continue;
        }
        (cluster_labels[s] == report.target_cluster ? report.group1 : report.group2).push_back(s);
    }

    const auto nodes = node_outputs(model, data);
    const auto& superset = nodes.encoding.superset;
    const auto& geneset = nodes.encoding.geneset;

    std::vector<std::pair<double, double> > geneset_p;
    bool gene_level_done = false;

    for (Eigen::Index j = 0; j < superset.rows(); ++j) {
        const auto x = pick(superset, j, report.group1);
        const auto y = pick(superset, j, report.group2);
        SupersetTest test{j, mww_one_tailed(x, y, options.shift), mww_one_tailed(y, x, options.shift)};
        report.tests.push_back(test);

        const bool up = test.up.p_value < options.p_threshold;
        const bool down = test.down.p_value < options.p_threshold;
        if (!up && !down) {
            continue;
        }

        if (!gene_level_done) {
            for (Eigen::Index i = 0; i < geneset.rows(); ++i) {
                const auto gx = pick(geneset, i, report.group1);
                const auto gy = pick(geneset, i, report.group2);
                const bool higher = mean_of(gx) >= mean_of(gy);
                const auto result = higher ? mww_one_tailed(gx, gy, options.geneset_shift) : mww_one_tailed(gy, gx, options.geneset_shift);
                geneset_p.emplace_back(result.p_value, pscore(result.p_value));
            }
            gene_level_done = true;
        }

        auto entries = gs_scores(nodes, j, report.group1, report.group2);
        for (auto& entry : entries) {
            std::tie(entry.p_value, entry.p_score) = geneset_p[entry.set_index];
        }
        if (up) {
            report.up_supersets.push_back(j);
            report.high_impact[j] = select_high_impact(entries, Direction::up);
        } else {
            report.down_supersets.push_back(j);
            report.high_impact[j] = select_high_impact(entries, Direction::down);
        }
    }
    return report;
}

std::vector<NodeSurvival> screen_nodes(const Eigen::MatrixXd& node_values, const std::vector<double>& times, const std::vector<bool>& events) {
    if (static_cast<Eigen::Index>(times.size()) != node_values.cols() || times.size() != events.size()) {
        throw Error(ErrorKind::shape, "survival data must have one entry per sample");
    }
    std::vector<NodeSurvival> output;
    output.reserve(static_cast<std::size_t>(node_values.rows()));
    for (Eigen::Index r = 0; r < node_values.rows(); ++r) {
        NodeSurvival node;
        node.node = r;
        try {
            node.split = median_split(row_values(node_values, r));
            node.test = logrank(survival_subset(times, events, node.split.low), survival_subset(times, events, node.split.high));
        } catch (const Error& error) {
            if (error.kind() != ErrorKind::degenerate && error.kind() != ErrorKind::undefined_test && error.kind() != ErrorKind::domain) {
                throw;
            }
            node.skipped = true;
            node.test.method = TestMethod::logrank;
            node.test.statistic = 0;
            node.test.p_value = 1;
        }
        output.push_back(std::move(node));
    }
    return output;
}

namespace {

void survival_vectors(const ClinicalTable& clinical, std::vector<double>& times, std::vector<bool>& events) {
    times.clear();
    events.clear();
    for (const auto& record : clinical.records) {
        times.push_back(static_cast<double>(record.time_days));
        events.push_back(record.event);
    }
}

}

SurvivalReport survival_pipeline(const Model& model, const Eigen::MatrixXd& data, const ClinicalTable& clinical, const SurvivalOptions& options) {
    if (static_cast<Eigen::Index>(clinical.records.size()) != data.cols()) {
        throw Error(ErrorKind::alignment, "clinical records must align one-to-one with the expression samples");
    }
    std::vector<double> times;
    std::vector<bool> events;
    survival_vectors(clinical, times, events);
    if (std::none_of(events.begin(), events.end(), [](bool e) { return e; })) {
        throw Error(ErrorKind::undefined_test, "survival analysis needs at least one event");
    }

    const auto nodes = node_outputs(model, data);
    SurvivalReport report;
    report.supersets = screen_nodes(nodes.encoding.superset, times, events);
    report.gene_sets = screen_nodes(nodes.encoding.geneset, times, events);

    std::vector<const NodeSurvival*> hits;
    for (const auto& node : report.supersets) {
        if (!node.skipped && node.test.p_value < options.superset_p) {
            hits.push_back(&node);
        }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const NodeSurvival* a, const NodeSurvival* b) { return a->test.p_value < b->test.p_value; });

    for (const auto* node : hits) {
        SupersetSurvival entry;
        entry.superset = node->node;
        entry.test = node->test;
        auto scores = gs_scores(nodes, node->node, node->split.high, node->split.low);
        for (auto& score : scores) {
            const auto& gene_level = report.gene_sets[score.set_index];
            if (gene_level.skipped) {
                score.p_value = std::numeric_limits<double>::quiet_NaN();
                score.p_score = std::numeric_limits<double>::quiet_NaN();
            } else {
                score.p_value = gene_level.test.p_value;
                score.p_score = pscore(score.p_value);
            }
        }
        std::stable_sort(scores.begin(), scores.end(), [](const GsScoreEntry& a, const GsScoreEntry& b) { return a.gs_score > b.gs_score; });
        if (scores.size() > options.top_k) {
            scores.resize(options.top_k);
        }
        entry.top_gene_sets = std::move(scores);
        entry.km_low = km_curve(survival_subset(times, events, node->split.low));
        entry.km_high = km_curve(survival_subset(times, events, node->split.high));
        report.significant.push_back(std::move(entry));
    }
    return report;
}

ReproReport summarize_reproducibility(std::set<std::size_t> superset_train, std::set<std::size_t> superset_test, std::set<std::size_t> geneset_train, std::set<std::size_t> geneset_test) {
    ReproReport report;
    report.supersets.train_significant = std::move(superset_train);
    report.supersets.test_significant = std::move(superset_test);
    report.gene_sets.train_significant = std::move(geneset_train);
    report.gene_sets.test_significant = std::move(geneset_test);
    report.supersets.jaccard = jaccard(report.supersets.train_significant, report.supersets.test_significant);
    report.gene_sets.jaccard = jaccard(report.gene_sets.train_significant, report.gene_sets.test_significant);

    if (report.supersets.jaccard.both_empty) {
        report.flags.push_back("no significant supersets in either split");
    }
    if (report.gene_sets.jaccard.both_empty) {
        report.flags.push_back("no significant gene sets in either split");
    }
    if (report.supersets.train_significant.empty() || report.gene_sets.train_significant.empty()) {
        report.flags.push_back("no significant nodes in the training split at some level; z-test skipped");
        return report;
    }
    report.z_test = two_prop_ztest(report.supersets.jaccard.intersection, report.supersets.train_significant.size(),
                                   report.gene_sets.jaccard.intersection, report.gene_sets.train_significant.size());
    return report;
}

namespace {

std::set<std::size_t> significant_nodes(const std::vector<NodeSurvival>& nodes, double threshold) {
    std::set<std::size_t> output;
    for (const auto& node : nodes) {
        if (!node.skipped && node.test.p_value < threshold) {
            output.insert(static_cast<std::size_t>(node.node));
        }
    }
    return output;
}

}

ReproReport repro_pipeline(const ExpressionMatrix& data, const ClinicalTable& clinical, const MembershipMask& mask, const ReproOptions& options) {
    if (static_cast<Eigen::Index>(clinical.records.size()) != data.num_samples()) {
        throw Error(ErrorKind::alignment, "clinical records must align one-to-one with the expression samples");
    }
    if (!(options.split > 0 && options.split < 1)) {
        throw Error(ErrorKind::config, "split fraction must lie strictly between 0 and 1");
    }
    if (data.gene_ids != mask.gene_ids) {
        throw Error(ErrorKind::consistency, "expression genes differ from the mask genes");
    }

    const auto n = static_cast<std::size_t>(data.num_samples());
    Rng rng(options.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    const auto ntrain = static_cast<std::size_t>(std::llround(options.split * static_cast<double>(n)));
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ntrain));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(ntrain), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    if (options.test_on_train) {
        test_idx = train_idx;
    }

    std::vector<double> times;
    std::vector<bool> events;
    survival_vectors(clinical, times, events);
    auto split_survival = [&](const std::vector<std::size_t>& idx, std::vector<double>& t, std::vector<bool>& e) {
        t.clear();
        e.clear();
        for (auto i : idx) {
            t.push_back(times[i]);
            e.push_back(events[i]);
        }
        if (std::none_of(e.begin(), e.end(), [](bool x) { return x; })) {
            throw Error(ErrorKind::undefined_test, "a data split has no events");
        }
    };
    std::vector<double> train_times, test_times;
    std::vector<bool> train_events, test_events;
    split_survival(train_idx, train_times, train_events);
    split_survival(test_idx, test_times, test_events);

    const auto train_data = select_samples(data, train_idx);
    const auto test_data = select_samples(data, test_idx);

    auto model_rng = rng.split();
    Model model = make_autoencoder(mask, options.superset_size, model_rng);
    TrainConfig config = options.train;
    config.seed = rng.next();
    train(model, train_data.values, train_data.values, config);

    const auto train_nodes = encode(model, train_data);
    const auto test_nodes = encode(model, test_data);

    auto report = summarize_reproducibility(
        significant_nodes(screen_nodes(train_nodes.superset, train_times, train_events), options.sig_p),
        significant_nodes(screen_nodes(test_nodes.superset, test_times, test_events), options.sig_p),
        significant_nodes(screen_nodes(train_nodes.geneset, train_times, train_events), options.sig_p),
        significant_nodes(screen_nodes(test_nodes.geneset, test_times, test_events), options.sig_p));
    report.train_samples = std::move(train_idx);
    report.test_samples = std::move(test_idx);
    return report;
}

const char* classifier_variant_name(ClassifierVariant variant) {
    switch (variant) {
        case ClassifierVariant::superset: return "superset";
        case ClassifierVariant::geneset: return "geneset";
        case ClassifierVariant::dense: return "dense";
        case ClassifierVariant::pca_dense: return "pca_dense";
    }
    return "unknown";
}

ClassifierVariant parse_classifier_variant(const std::string& name) {
    if (name == "superset") return ClassifierVariant::superset;
    if (name == "geneset") return ClassifierVariant::geneset;
    if (name == "dense") return ClassifierVariant::dense;
    if (name == "pca_dense") return ClassifierVariant::pca_dense;
    throw Error(ErrorKind::config, "unknown classifier variant '" + name + "' (expected superset, geneset, dense or pca_dense)");
}

Model build_classifier(const ClassifyOptions& options, const MembershipMask& mask, const std::vector<std::string>& input_ids, const std::vector<std::string>& class_names, Rng& rng) {
    switch (options.variant) {
        case ClassifierVariant::superset:
            return make_masked_classifier(mask, options.superset_size, class_names, rng);
        case ClassifierVariant::geneset:
            return make_masked_classifier(mask, std::nullopt, class_names, rng);
        case ClassifierVariant::dense:
        case ClassifierVariant::pca_dense:
            return make_dense_classifier(input_ids, options.dense_widths, class_names, rng);
    }
    throw Error(ErrorKind::config, "unknown classifier variant");
}

ClassifyReport classify_pipeline(const ExpressionMatrix& data, const std::vector<std::string>& labels, const MembershipMask& mask, const ClassifyOptions& options) {
    if (static_cast<Eigen::Index>(labels.size()) != data.num_samples()) {
        throw Error(ErrorKind::shape, "one class label per sample is required");
    }

    ClassifyReport report;
    report.variant = options.variant;
    report.class_names = labels;
    std::sort(report.class_names.begin(), report.class_names.end());
    report.class_names.erase(std::unique(report.class_names.begin(), report.class_names.end()), report.class_names.end());
    if (report.class_names.size() < 2) {
        throw Error(ErrorKind::config, "classification needs at least two classes");
    }
    std::vector<int> indices;
    indices.reserve(labels.size());
    for (const auto& label : labels) {
        indices.push_back(static_cast<int>(std::lower_bound(report.class_names.begin(), report.class_names.end(), label) - report.class_names.begin()));
    }

    Eigen::MatrixXd inputs = data.values;
    std::vector<std::string> input_ids = data.gene_ids;
    if (options.variant == ClassifierVariant::superset || options.variant == ClassifierVariant::geneset) {
        if (data.gene_ids != mask.gene_ids) {
            throw Error(ErrorKind::consistency, "expression genes differ from the mask genes");
        }
    }
    if (options.variant == ClassifierVariant::pca_dense) {
        const auto fit = pca(data.values, options.pca_components);
        inputs = fit.scores;
        report.pca_truncated = fit.truncated_to_rank;
        report.pca_components = fit.components.cols();
        input_ids.clear();
        for (Eigen::Index c = 0; c < report.pca_components; ++c) {
            input_ids.push_back("PC" + std::to_string(c + 1));
        }
    }

    {
        Rng probe(options.train.seed);
        report.layer_count = build_classifier(options, mask, input_ids, report.class_names, probe).layers.size();
    }

    const auto nclasses = static_cast<int>(report.class_names.size());
    ModelFactory factory = [&](Rng& rng) { return build_classifier(options, mask, input_ids, report.class_names, rng); };
    report.cv = kfold_cv(inputs, indices, nclasses, options.folds, factory, options.train);
    return report;
}

}
