#include "commands.hpp"

#include "gsae/dataio.hpp"
#include "gsae/embed.hpp"
#include "gsae/errors.hpp"
#include "gsae/genesets.hpp"
#include "gsae/model_io.hpp"
#include "gsae/pipelines.hpp"
#include "gsae/synth.hpp"
#include "gsae/text.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gsae::cli {

namespace {

using nlohmann::json;
using text::format_double;

std::vector<KeySpec> with(std::vector<KeySpec> a, const std::vector<KeySpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

KeySpec req(std::string name, std::string help) {
    return KeySpec{std::move(name), std::nullopt, std::move(help), true};
}

KeySpec opt(std::string name, std::string help) {
    return KeySpec{std::move(name), std::nullopt, std::move(help), false};
}

KeySpec def(std::string name, std::string fallback, std::string help) {
    return KeySpec{std::move(name), std::move(fallback), std::move(help), false};
}

std::vector<KeySpec> training_keys() {
    return {
        def("learning_rate", "0.05", "SGD learning rate"),
        def("decay", "1e-06", "time-based learning-rate decay per iteration"),
        def("momentum", "0.9", "momentum coefficient"),
        def("nesterov", "true", "use Nesterov momentum"),
        def("batch_size", "32", "mini-batch size"),
        def("max_epochs", "100", "maximum number of epochs"),
        def("val_fraction", "0.05", "held-out validation fraction"),
        def("patience", "3", "early-stopping patience in epochs"),
        def("center_inputs", "true", "subtract per-gene training means from the inputs"),
    };
}

std::vector<KeySpec> expression_keys() {
    return {req("expr", "expression TSV (genes x samples)"), def("unit", "logtpm", "expression unit: logtpm or tpm")};
}

TrainConfig train_config(const Settings& s, std::uint64_t seed) {
    TrainConfig config;
    config.learning_rate = s.real("learning_rate");
    config.decay = s.real("decay");
    config.momentum = s.real("momentum");
    config.nesterov = s.flag("nesterov");
    config.batch_size = s.count("batch_size");
    config.max_epochs = s.count("max_epochs");
    config.val_fraction = s.real("val_fraction");
    config.patience = s.count("patience");
    config.center_inputs = s.flag("center_inputs");
    config.float32 = s.flag("float32");
    config.seed = seed;
    config.validate();
    return config;
}

ExpressionUnit parse_unit(const std::string& name) {
    if (name == "logtpm") return ExpressionUnit::logtpm;
    if (name == "tpm") return ExpressionUnit::tpm;
    throw Error(ErrorKind::config, "unknown expression unit '" + name + "' (expected logtpm or tpm)");
}

ExpressionMatrix read_expr(const Settings& s, RunDirectory& run) {
    run.add_input(s.path("expr"));
    return load_expression(s.path("expr"), parse_unit(s.text("unit")));
}

GeneSetCollection read_sets(const Settings& s, RunDirectory& run) {
    run.add_input(s.path("gmt"));
    return load_gmt(s.path("gmt"));
}

ClinicalTable read_survival(const Settings& s, RunDirectory& run) {
    run.add_input(s.path("clinical"));
    return load_clinical(s.path("clinical"), s.integer("cap_days"));
}

SavedModel read_model(const Settings& s, RunDirectory& run) {
    run.add_input(s.path("model"));
    return load_model(s.path("model"));
}

/// Rows of `matrix` in the order of `ids`; every id must be present.
ExpressionMatrix rows_in_order(const ExpressionMatrix& matrix, const std::vector<std::string>& ids) {
    std::unordered_map<std::string, Eigen::Index> index;
    for (std::size_t g = 0; g < matrix.gene_ids.size(); ++g) {
        index.emplace(matrix.gene_ids[g], static_cast<Eigen::Index>(g));
    }
    ExpressionMatrix output;
    output.gene_ids = ids;
    output.sample_ids = matrix.sample_ids;
    output.values.resize(static_cast<Eigen::Index>(ids.size()), matrix.num_samples());
    for (std::size_t g = 0; g < ids.size(); ++g) {
        const auto it = index.find(ids[g]);
        if (it == index.end()) {
            throw Error(ErrorKind::consistency, "model input gene '" + ids[g] + "' is missing from the expression matrix");
        }
        output.values.row(static_cast<Eigen::Index>(g)) = matrix.values.row(it->second);
    }
    return output;
}

/// Keep the expression samples that have a clinical record, and order the records like the samples.
std::pair<ExpressionMatrix, ClinicalTable> match_clinical(const ExpressionMatrix& matrix, const ClinicalTable& clinical) {
    std::vector<std::size_t> keep;
    ClinicalTable table;
    table.label_columns = clinical.label_columns;
    for (std::size_t s = 0; s < matrix.sample_ids.size(); ++s) {
        if (const auto row = clinical.find(matrix.sample_ids[s])) {
            keep.push_back(s);
            table.records.push_back(clinical.records[*row]);
        }
    }
    if (keep.empty()) {
        throw Error(ErrorKind::alignment, "the expression matrix shares no sample with the clinical table");
    }
    return {select_samples(matrix, keep), std::move(table)};
}

/// `sample_id -> value` of one column of a TSV with a header that includes `sample_id`.
std::map<std::string, std::string> read_label_column(const std::filesystem::path& path, const std::string& column) {
    auto input = text::open_input(path);
    std::string line;
    if (!text::read_line(input, line)) {
        throw Error(ErrorKind::parse, path.string() + ": missing header row");
    }
    const auto header = text::split_tabs(line);
    std::optional<std::size_t> id_col, value_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "sample_id") id_col = c;
        if (header[c] == column) value_col = c;
    }
    if (!id_col || !value_col) {
        throw Error(ErrorKind::parse, path.string() + ": header must contain sample_id and " + column);
    }
    std::map<std::string, std::string> output;
    std::size_t line_number = 1;
    while (text::read_line(input, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        const auto fields = text::split_tabs(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::parse, text::location(path.string(), line_number) + ": expected " + std::to_string(header.size()) + " fields");
        }
        const std::string id(fields[*id_col]);
        if (!output.emplace(id, std::string(fields[*value_col])).second) {
            throw Error(ErrorKind::duplicate, text::location(path.string(), line_number) + ": sample '" + id + "' appears more than once");
        }
    }
    return output;
}

void write_nodes(const std::filesystem::path& path, const std::vector<std::string>& names, const std::vector<std::string>& samples, const Eigen::MatrixXd& values) {
    auto output = text::open_output(path);
    output << "node";
    for (const auto& s : samples) {
        output << '\t' << s;
    }
    output << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        output << names[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            output << '\t' << format_double(values(r, c));
        }
        output << '\n';
    }
}

std::vector<std::string> superset_names(Eigen::Index count) {
    std::vector<std::string> output;
    for (Eigen::Index j = 0; j < count; ++j) {
        output.push_back("superset_" + std::to_string(j + 1));
    }
    return output;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    auto output = text::open_output(path);
    output << doc.dump(1) << '\n';
}

std::vector<std::string> split_commas(const std::string& value) {
    std::vector<std::string> output;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        output.push_back(item);
    }
    return output;
}

std::string gene_set_cell(const GsScoreEntry& e) {
    return e.set_name + '\t' + format_double(e.gs_score) + '\t' + format_double(e.weight) + '\t' + format_double(e.mu1) + '\t' + format_double(e.mu2) +
        '\t' + format_double(e.p_value) + '\t' + format_double(e.p_score);
}

// ---- prep

void run_prep(const Settings& s, RunDirectory& run) {
    const auto raw = read_expr(s, run);
    const auto sets = read_sets(s, run);
    std::optional<ClinicalTable> clinical;
    if (s.maybe("clinical")) {
        clinical = read_survival(s, run);
    }

    const auto first = align(raw, sets, clinical);
    const auto filtered = filter_genes(first.matrix, s.real("mean_min"), s.real("sd_min"));
    const auto second = align(filtered, first.collection);
    const auto sized = size_filter(second.collection, s.count("min_set_size"), s.count("max_set_size"));
    if (sized.size() == 0) {
        throw Error(ErrorKind::empty_result, "no gene set passes the size filter (" + s.text("min_set_size") + " to " + s.text("max_set_size") + " members)");
    }
    const auto final = align(second.matrix, sized);

    save_expression(run.artifact("expression.tsv"), final.matrix);
    save_gmt(run.artifact("genesets.gmt"), final.collection);
    if (first.clinical) {
        save_clinical(run.artifact("clinical.tsv"), *first.clinical);
    }
    json manifest;
    manifest["n_genes"] = final.matrix.num_genes();
    manifest["n_samples"] = final.matrix.num_samples();
    manifest["n_sets"] = final.collection.size();
    manifest["input_genes"] = raw.num_genes();
    manifest["input_samples"] = raw.num_samples();
    manifest["input_sets"] = sets.size();
    manifest["filters"] = {
        {"mean_min", s.real("mean_min")}, {"sd_min", s.real("sd_min")},
        {"min_set_size", s.count("min_set_size")}, {"max_set_size", s.count("max_set_size")},
        {"cap_days", s.integer("cap_days")}
    };
    write_json(run.artifact("prep_manifest.json"), manifest);
    run.note("n_genes", final.matrix.num_genes());
    run.note("n_samples", final.matrix.num_samples());
    run.note("n_sets", final.collection.size());
}

// ---- dedup

std::vector<std::string> read_universe(const std::filesystem::path& path) {
    auto input = text::open_input(path);
    std::vector<std::string> output;
    std::unordered_set<std::string> seen;
    std::string line;
    bool first = true;
    bool table = false;
    while (text::read_line(input, line)) {
        if (first) {
            first = false;
            table = line.find('\t') != std::string::npos;
            if (table) {
                continue;
            }
        }
        const std::string symbol(text::split_tabs(line).front());
        if (!symbol.empty() && seen.insert(symbol).second) {
            output.push_back(symbol);
        }
    }
    if (output.empty()) {
        throw Error(ErrorKind::empty_result, path.string() + ": universe is empty");
    }
    return output;
}

void run_dedup(const Settings& s, RunDirectory& run) {
    auto sets = read_sets(s, run);
    if (s.maybe("universe")) {
        run.add_input(s.path("universe"));
        const auto universe = read_universe(s.path("universe"));
        const std::unordered_set<std::string> in_universe(universe.begin(), universe.end());
        std::vector<GeneSet> kept;
        for (auto set : sets.sets) {
            std::erase_if(set.members, [&](const std::string& g) { return !in_universe.count(g); });
            if (!set.members.empty()) {
                kept.push_back(std::move(set));
            }
        }
        sets = GeneSetCollection::from_sets(std::move(kept));
        sets.universe = universe;
    }
    const auto result = dedup(sets, s.real("p_threshold"));
    save_gmt(run.artifact("genesets.gmt"), result.collection);
    {
        auto output = text::open_output(run.artifact("dedup_audit.tsv"));
        write_dedup_audit(output, result);
    }
    run.note("input_sets", sets.size());
    run.note("output_sets", result.collection.size());
    run.note("components", result.components.size());
}

// ---- train / encode

void run_train(const Settings& s, RunDirectory& run) {
    const auto aligned = align(read_expr(s, run), read_sets(s, run));
    const auto mask = build_mask(aligned.collection, aligned.matrix.gene_ids);
    Rng root(s.u64("seed"));
    auto init = root.split();
    auto model = make_autoencoder(mask, s.integer("superset_size"), init);
    const auto config = train_config(s, root.next());
    const auto history = train(model, aligned.matrix.values, aligned.matrix.values, config);

    save_model(run.artifact("model.json"), model, config);
    {
        auto output = text::open_output(run.artifact("history.csv"));
        output << "epoch,train_loss,validation_loss\n";
        for (std::size_t e = 0; e < history.epochs(); ++e) {
            output << e + 1 << ',' << format_double(history.train_loss[e]) << ',' << format_double(history.validation_loss[e]) << '\n';
        }
    }
    run.note("epochs", history.epochs());
    run.note("stopped_early", history.stopped_early);
    run.note("final_train_loss", history.train_loss.back());
    run.note("final_validation_loss", history.validation_loss.back());
}

void run_encode(const Settings& s, RunDirectory& run) {
    const auto saved = read_model(s, run);
    const auto data = rows_in_order(read_expr(s, run), saved.model.input_ids);
    const auto encoding = encode(saved.model, data);
    write_nodes(run.artifact("geneset.tsv"), saved.model.set_names, data.sample_ids, encoding.geneset);
    write_nodes(run.artifact("superset.tsv"), superset_names(encoding.superset.rows()), data.sample_ids, encoding.superset);
    run.note("n_samples", data.num_samples());
    run.note("n_supersets", encoding.superset.rows());
}

// ---- subtype

void run_subtype(const Settings& s, RunDirectory& run) {
    const auto saved = read_model(s, run);
    const auto data = rows_in_order(read_expr(s, run), saved.model.input_ids);
    const auto nodes = node_outputs(saved.model, data.values);

    std::vector<int> labels(data.sample_ids.size(), noise_label);
    std::vector<std::string> cluster_names;
    Eigen::MatrixXd embedding;
    SubtypeOptions options;
    options.shift = s.real("shift");
    options.p_threshold = s.real("p_threshold");
    options.geneset_shift = s.real("geneset_shift");

    if (s.maybe("labels")) {
        run.add_input(s.path("labels"));
        const auto column = read_label_column(s.path("labels"), s.text("label_column"));
        std::set<std::string> names;
        for (const auto& id : data.sample_ids) {
            const auto it = column.find(id);
            if (it != column.end() && it->second != "-1" && it->second != "noise" && !it->second.empty()) {
                names.insert(it->second);
            }
        }
        cluster_names.assign(names.begin(), names.end());
        for (std::size_t i = 0; i < data.sample_ids.size(); ++i) {
            const auto it = column.find(data.sample_ids[i]);
            if (it == column.end()) {
                continue;
            }
            const auto pos = std::lower_bound(cluster_names.begin(), cluster_names.end(), it->second);
            if (pos != cluster_names.end() && *pos == it->second) {
                labels[i] = static_cast<int>(pos - cluster_names.begin());
            }
        }
    } else {
        ClusterOptions cluster;
        cluster.tsne.perplexity = s.real("perplexity");
        cluster.tsne.iterations = static_cast<int>(s.integer("tsne_iterations"));
        cluster.tsne.seed = s.u64("seed");
        cluster.eps = s.real("eps");
        cluster.min_pts = s.count("min_pts");
        const auto clustering = cluster_samples(nodes.encoding.superset, cluster);
        labels = clustering.labels;
        embedding = clustering.embedding;
        const int nclusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
        for (int c = 0; c < nclusters; ++c) {
            cluster_names.push_back(std::to_string(c));
        }
        run.note("tsne_kl_initial", clustering.kl_initial);
        run.note("tsne_kl_final", clustering.kl_final);
    }
    if (const auto target = s.maybe("target")) {
        const auto pos = std::find(cluster_names.begin(), cluster_names.end(), *target);
        if (pos == cluster_names.end()) {
            throw Error(ErrorKind::config, "target cluster '" + *target + "' does not exist");
        }
        options.target_cluster = static_cast<int>(pos - cluster_names.begin());
    }

    const auto report = subtype_pipeline(saved.model, data.values, labels, options);
    auto name_of = [&](int label) { return label == noise_label ? std::string("noise") : cluster_names[static_cast<std::size_t>(label)]; };

    {
        auto output = text::open_output(run.artifact("clusters.tsv"));
        output << "sample_id\tcluster" << (embedding.size() ? "\ttsne_x\ttsne_y" : "") << '\n';
        for (std::size_t i = 0; i < labels.size(); ++i) {
            output << data.sample_ids[i] << '\t' << name_of(labels[i]);
            if (embedding.size()) {
                const auto r = static_cast<Eigen::Index>(i);
                output << '\t' << format_double(embedding(r, 0)) << '\t' << format_double(embedding(r, 1));
            }
            output << '\n';
        }
    }
    {
        auto output = text::open_output(run.artifact("superset_tests.tsv"));
        output << "superset\tup_p\tdown_p\tdirection\n";
        std::set<Eigen::Index> up(report.up_supersets.begin(), report.up_supersets.end());
        std::set<Eigen::Index> down(report.down_supersets.begin(), report.down_supersets.end());
        for (const auto& t : report.tests) {
            output << "superset_" << t.superset + 1 << '\t' << format_double(t.up.p_value) << '\t' << format_double(t.down.p_value) << '\t'
                   << (up.count(t.superset) ? "up" : down.count(t.superset) ? "down" : "none") << '\n';
        }
    }
    {
        auto output = text::open_output(run.artifact("high_impact.tsv"));
        output << "superset\tdirection\trank\tgene_set\tgs_score\tweight\tmu1\tmu2\tp_value\tpscore\n";
        auto emit = [&](Eigen::Index j, const char* direction) {
            const auto& impact = report.high_impact.at(j);
            for (std::size_t r = 0; r < impact.entries.size(); ++r) {
                output << "superset_" << j + 1 << '\t' << direction << '\t' << r + 1 << '\t' << gene_set_cell(impact.entries[r]) << '\n';
            }
        };
        for (auto j : report.up_supersets) emit(j, "up");
        for (auto j : report.down_supersets) emit(j, "down");
    }
    run.note("target_cluster", name_of(report.target_cluster));
    run.note("group1_size", report.group1.size());
    run.note("group2_size", report.group2.size());
    run.note("up_supersets", report.up_supersets.size());
    run.note("down_supersets", report.down_supersets.size());
}

// ---- survive

void write_screen(const std::filesystem::path& path, const std::vector<std::string>& names, const std::vector<NodeSurvival>& screen) {
    auto output = text::open_output(path);
    output << "node\tmedian\tstatistic\tp_value\tskipped\n";
    for (const auto& node : screen) {
        output << names[static_cast<std::size_t>(node.node)] << '\t' << format_double(node.split.median) << '\t' << format_double(node.test.statistic) << '\t'
               << format_double(node.test.p_value) << '\t' << (node.skipped ? 1 : 0) << '\n';
    }
}

void run_survive(const Settings& s, RunDirectory& run) {
    const auto saved = read_model(s, run);
    const auto [data, clinical] = match_clinical(rows_in_order(read_expr(s, run), saved.model.input_ids), read_survival(s, run));
    SurvivalOptions options;
    options.superset_p = s.real("superset_p");
    options.top_k = s.count("top_k");
    const auto report = survival_pipeline(saved.model, data.values, clinical, options);

    const auto names = superset_names(static_cast<Eigen::Index>(report.supersets.size()));
    write_screen(run.artifact("superset_logrank.tsv"), names, report.supersets);
    write_screen(run.artifact("geneset_logrank.tsv"), saved.model.set_names, report.gene_sets);
    {
        auto output = text::open_output(run.artifact("top_genesets.tsv"));
        output << "superset\tsuperset_p\trank\tgene_set\tgs_score\tweight\tmu_high\tmu_low\tgeneset_p\tpscore\n";
        for (const auto& sig : report.significant) {
            for (std::size_t r = 0; r < sig.top_gene_sets.size(); ++r) {
                output << names[static_cast<std::size_t>(sig.superset)] << '\t' << format_double(sig.test.p_value) << '\t' << r + 1 << '\t'
                       << gene_set_cell(sig.top_gene_sets[r]) << '\n';
            }
        }
    }
    {
        auto output = text::open_output(run.artifact("km_curves.tsv"));
        output << "superset\tgroup\ttime\tsurvival\tat_risk\tevents\n";
        for (const auto& sig : report.significant) {
            auto emit = [&](const std::vector<KmPoint>& curve, const char* group) {
                for (const auto& p : curve) {
                    output << names[static_cast<std::size_t>(sig.superset)] << '\t' << group << '\t' << format_double(p.time) << '\t' << format_double(p.survival) << '\t'
                           << p.at_risk << '\t' << p.events << '\n';
                }
            };
            emit(sig.km_low, "low");
            emit(sig.km_high, "high");
        }
    }
    run.note("n_samples", data.num_samples());
    run.note("significant_supersets", report.significant.size());
}

// ---- reproduce

json overlap_json(const LevelOverlap& level) {
    return {
        {"train_significant", level.train_significant},
        {"test_significant", level.test_significant},
        {"intersection", level.jaccard.intersection},
        {"union", level.jaccard.union_size},
        {"jaccard", level.jaccard.value}
    };
}

void run_reproduce(const Settings& s, RunDirectory& run) {
    const auto expression = read_expr(s, run);
    const auto sets = read_sets(s, run);
    const auto aligned = align(expression, sets, read_survival(s, run));
    const auto mask = build_mask(aligned.collection, aligned.matrix.gene_ids);
    ReproOptions options;
    options.split = s.real("split");
    options.sig_p = s.real("sig_p");
    options.superset_size = s.integer("superset_size");
    options.seed = s.u64("seed");
    options.test_on_train = s.flag("test_on_train");
    options.train = train_config(s, 0);
    const auto report = repro_pipeline(aligned.matrix, *aligned.clinical, mask, options);

    json doc;
    doc["supersets"] = overlap_json(report.supersets);
    doc["gene_sets"] = overlap_json(report.gene_sets);
    if (report.z_test) {
        doc["z_test"] = {{"statistic", report.z_test->statistic}, {"p_value", report.z_test->p_value}};
    } else {
        doc["z_test"] = nullptr;
    }
    doc["flags"] = report.flags;
    doc["n_train"] = report.train_samples.size();
    doc["n_test"] = report.test_samples.size();
    write_json(run.artifact("reproducibility.json"), doc);
    run.note("superset_jaccard", report.supersets.jaccard.value);
    run.note("geneset_jaccard", report.gene_sets.jaccard.value);
}

// ---- classify

void run_classify(const Settings& s, RunDirectory& run) {
    const auto aligned = align(read_expr(s, run), read_sets(s, run));
    run.add_input(s.path("labels"));
    const auto column = read_label_column(s.path("labels"), s.text("label_column"));
    std::vector<std::size_t> keep;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < aligned.matrix.sample_ids.size(); ++i) {
        const auto it = column.find(aligned.matrix.sample_ids[i]);
        if (it != column.end() && !it->second.empty()) {
            keep.push_back(i);
            labels.push_back(it->second);
        }
    }
    if (keep.empty()) {
        throw Error(ErrorKind::alignment, "no expression sample has a label");
    }
    const auto data = select_samples(aligned.matrix, keep);
    const auto mask = build_mask(aligned.collection, data.gene_ids);

    ClassifyOptions options;
    options.variant = parse_classifier_variant(s.text("variant"));
    options.superset_size = s.integer("superset_size");
    options.dense_widths.clear();
    for (const auto& w : split_commas(s.text("dense_widths"))) {
        const auto width = text::parse_int(w);
        if (!width || *width <= 0) {
            throw Error(ErrorKind::config, "dense_widths must be a comma-separated list of positive integers");
        }
        options.dense_widths.push_back(*width);
    }
    options.pca_components = s.integer("pca_components");
    options.folds = s.count("folds");
    options.train = train_config(s, s.u64("seed"));
    const auto report = classify_pipeline(data, labels, mask, options);

    json doc;
    doc["variant"] = classifier_variant_name(report.variant);
    doc["accuracy"] = report.cv.accuracy;
    doc["fold_accuracy"] = report.cv.fold_accuracy;
    doc["classes"] = report.class_names;
    doc["layers"] = report.layer_count;
    doc["n_samples"] = data.num_samples();
    if (report.variant == ClassifierVariant::pca_dense) {
        doc["pca_components"] = report.pca_components;
        doc["pca_truncated"] = report.pca_truncated;
        if (report.pca_truncated) {
            std::cerr << "warning: pca_components clipped to the data rank (" << report.pca_components << ")\n";
        }
    }
    write_json(run.artifact("classification.json"), doc);
    {
        auto output = text::open_output(run.artifact("predictions.tsv"));
        output << "sample_id\tlabel\tpredicted\n";
        for (std::size_t i = 0; i < labels.size(); ++i) {
            output << data.sample_ids[i] << '\t' << labels[i] << '\t' << report.class_names[static_cast<std::size_t>(report.cv.predictions[i])] << '\n';
        }
    }
    std::cout << "accuracy\t" << format_double(report.cv.accuracy) << '\n';
    run.note("accuracy", report.cv.accuracy);
}

// ---- embed

void run_embed(const Settings& s, RunDirectory& run) {
    run.add_input(s.path("input"));
    const auto data = load_expression(s.path("input"), ExpressionUnit::logtpm);
    TsneOptions options;
    options.perplexity = s.real("perplexity");
    options.iterations = static_cast<int>(s.integer("iterations"));
    options.learning_rate = s.real("learning_rate");
    options.exaggeration = s.real("exaggeration");
    options.exaggeration_iterations = static_cast<int>(s.integer("exaggeration_iterations"));
    options.pca_dims = static_cast<int>(s.integer("pca_dims"));
    options.seed = s.u64("seed");
    const auto result = tsne_exact(data.values.transpose(), options);
    std::vector<int> labels;
    if (s.flag("cluster")) {
        labels = dbscan(result.embedding, s.real("eps"), s.count("min_pts"));
    }
    {
        auto output = text::open_output(run.artifact("embedding.tsv"));
        output << "sample_id\tx\ty" << (labels.empty() ? "" : "\tcluster") << '\n';
        for (std::size_t i = 0; i < data.sample_ids.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            output << data.sample_ids[i] << '\t' << format_double(result.embedding(r, 0)) << '\t' << format_double(result.embedding(r, 1));
            if (!labels.empty()) {
                output << '\t' << (labels[i] == noise_label ? std::string("noise") : std::to_string(labels[i]));
            }
            output << '\n';
        }
    }
    run.note("kl_initial", result.kl_initial);
    run.note("kl_final", result.kl_final);
}

// ---- synth

void run_synth(const Settings& s, RunDirectory& run) {
    SynthConfig config;
    config.n_samples = s.count("n_samples");
    config.n_genes = s.count("n_genes");
    config.n_sets = s.count("n_sets");
    config.group_proportions.clear();
    for (const auto& p : split_commas(s.text("group_proportions"))) {
        const auto value = text::parse_double(p);
        if (!value) {
            throw Error(ErrorKind::config, "group_proportions must be a comma-separated list of numbers");
        }
        config.group_proportions.push_back(*value);
    }
    config.n_planted = s.count("n_planted");
    config.effect = s.real("effect");
    config.hazard_link = parse_hazard_link(s.text("hazard_link"));
    config.n_hazard_sets = s.count("n_hazard_sets");
    config.hazard_strength = s.real("hazard_strength");
    config.hazard_correlation = s.real("hazard_correlation");
    config.baseline_median_days = s.real("baseline_median_days");
    config.censor_max_days = s.real("censor_max_days");
    config.noise_sd = s.real("noise_sd");
    config.loading = s.real("loading");
    config.seed = s.u64("seed");
    const auto data = synthesize(config);

    save_expression(run.artifact("expression.tsv"), data.expression);
    save_gmt(run.artifact("genesets.gmt"), data.collection);
    save_clinical(run.artifact("clinical.tsv"), data.clinical);
    json truth;
    truth["group_names"] = data.group_names;
    truth["planted_sets"] = data.planted_sets;
    truth["hazard_sets"] = data.hazard_sets;
    write_json(run.artifact("truth.json"), truth);
    run.note("n_samples", data.expression.num_samples());
}

}

std::vector<KeySpec> global_keys() {
    return {
        opt("seed", "64-bit seed (drawn from entropy and recorded when absent)"),
        def("float32", "false", "round parameters to single precision after every update"),
        def("threads", "1", "worker threads for linear algebra"),
    };
}

const std::vector<Command>& commands() {
    static const std::vector<Command> table = [] {
        const auto survival = std::vector<KeySpec>{req("clinical", "clinical TSV with sample_id, time_days, event"), def("cap_days", "1825", "survival cap in days")};
        std::vector<Command> output;
        output.push_back({"prep", "filter and align expression, gene sets and clinical data",
            with(expression_keys(), {
                req("gmt", "gene-set GMT file"), opt("clinical", "clinical TSV"), def("cap_days", "1825", "survival cap in days"),
                def("mean_min", "1", "keep genes with mean above this"), def("sd_min", "0.5", "keep genes with standard deviation above this"),
                def("min_set_size", "15", "smallest gene set kept"), def("max_set_size", "500", "largest gene set kept")}),
            run_prep});
        output.push_back({"dedup", "merge redundant gene sets by kappa significance",
            {req("gmt", "gene-set GMT file"), opt("universe", "gene universe: one symbol per line, or a TSV whose first column is the gene"),
             def("p_threshold", "1e-07", "link sets with kappa p-value below this")},
            run_dedup});
        output.push_back({"train", "train the gene superset autoencoder",
            with(with(expression_keys(), {req("gmt", "gene-set GMT file"), def("superset_size", "200", "superset layer width")}), training_keys()),
            run_train});
        output.push_back({"encode", "write gene-set and superset node outputs",
            with(expression_keys(), {req("model", "model JSON")}),
            run_encode});
        output.push_back({"subtype", "differential superset analysis between a cluster and the rest",
            with(expression_keys(), {
                req("model", "model JSON"), req("shift", "location shift of the superset-level test (data-scale dependent)"),
                def("p_threshold", "0.01", "superset significance threshold"), def("geneset_shift", "0.5", "location shift of the gene-set PScore test"),
                opt("labels", "TSV with sample_id and a cluster column; clusters are found by t-SNE and DBSCAN when absent"),
                def("label_column", "cluster", "cluster column of the labels file"), opt("target", "cluster used as group 1 (default: smallest)"),
                def("perplexity", "30", "t-SNE perplexity"), def("tsne_iterations", "1000", "t-SNE iterations"),
                def("eps", "2", "DBSCAN radius"), def("min_pts", "5", "DBSCAN core size")}),
            run_subtype});
        output.push_back({"survive", "median-split log-rank screen of supersets and gene sets",
            with(with(expression_keys(), {req("model", "model JSON"), def("superset_p", "0.001", "superset significance threshold"), def("top_k", "20", "gene sets listed per superset")}), survival),
            run_survive});
        output.push_back({"reproduce", "compare significant supersets and gene sets between train and test splits",
            with(with(with(expression_keys(), {
                req("gmt", "gene-set GMT file"), def("split", "0.6", "training fraction"), def("sig_p", "0.05", "log-rank significance threshold"),
                def("superset_size", "200", "superset layer width"), def("test_on_train", "false", "use the training split as the test split")}), survival), training_keys()),
            run_reproduce});
        output.push_back({"classify", "cross-validated accuracy of a classifier variant",
            with(with(expression_keys(), {
                req("gmt", "gene-set GMT file"), req("labels", "TSV with sample_id and a class column"), def("label_column", "label", "class column of the labels file"),
                def("variant", "superset", "superset, geneset, dense or pca_dense"), def("folds", "10", "cross-validation folds"),
                def("superset_size", "200", "superset layer width"), def("dense_widths", "200", "comma-separated hidden widths of dense variants"),
                def("pca_components", "500", "principal components for pca_dense")}), training_keys()),
            run_classify});
        output.push_back({"embed", "exact t-SNE of the columns of a matrix, optionally clustered with DBSCAN",
            {req("input", "TSV matrix with samples in columns"), def("perplexity", "30", "t-SNE perplexity"), def("iterations", "1000", "t-SNE iterations"),
             def("learning_rate", "0", "t-SNE learning rate (0 = automatic)"), def("exaggeration", "12", "early exaggeration factor"),
             def("exaggeration_iterations", "250", "iterations of early exaggeration"), def("pca_dims", "0", "PCA pre-step dimensions (0 = none)"),
             def("cluster", "true", "run DBSCAN on the embedding"), def("eps", "2", "DBSCAN radius"), def("min_pts", "5", "DBSCAN core size")},
            run_embed});
        const SynthConfig d;
        output.push_back({"synth", "generate synthetic expression, gene sets and survival with planted structure",
            {def("n_samples", std::to_string(d.n_samples), "samples"), def("n_genes", std::to_string(d.n_genes), "genes"),
             def("n_sets", std::to_string(d.n_sets), "gene sets (disjoint blocks)"), def("group_proportions", "0.7,0.3", "relative group sizes"),
             def("n_planted", std::to_string(d.n_planted), "shifted sets per non-reference group"), def("effect", "2", "shift in within-group standard deviations"),
             def("hazard_link", "none", "none, single or distributed"), def("n_hazard_sets", std::to_string(d.n_hazard_sets), "sets driven by the shared hazard factor"),
             def("hazard_strength", "1", "log-hazard per unit of the hazard factor"), def("hazard_correlation", "0.5", "correlation of distributed hazard sets with the shared factor"),
             def("baseline_median_days", "900", "median survival at zero hazard"), def("censor_max_days", "3000", "censoring times are uniform up to this"),
             def("noise_sd", "0.5", "gene-level noise"), def("loading", "0.8", "gene loading on its set factor")},
            run_synth});
        for (auto& command : output) {
            const auto globals = global_keys();
            command.keys.insert(command.keys.end(), globals.begin(), globals.end());
        }
        return output;
    }();
    return table;
}

}
