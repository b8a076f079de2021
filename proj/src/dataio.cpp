#include "gsae/dataio.hpp"
#include "gsae/errors.hpp"
#include "gsae/text.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace gsae {

GeneSetCollection GeneSetCollection::from_sets(std::vector<GeneSet> sets) {
    GeneSetCollection output;
    std::unordered_set<std::string> names;
    std::unordered_set<std::string> seen;
    for (auto& set : sets) {
        if (!names.insert(set.name).second) {
            throw Error(ErrorKind::duplicate, "gene set '" + set.name + "' appears more than once");
        }
        std::sort(set.members.begin(), set.members.end());
        set.members.erase(std::unique(set.members.begin(), set.members.end()), set.members.end());
        for (const auto& gene : set.members) {
            if (seen.insert(gene).second) {
                output.universe.push_back(gene);
            }
        }
    }
    output.sets = std::move(sets);
    return output;
}

std::vector<std::string> GeneSetCollection::names() const {
    std::vector<std::string> output;
    output.reserve(sets.size());
    for (const auto& set : sets) {
        output.push_back(set.name);
    }
    return output;
}

std::optional<std::size_t> ClinicalTable::find(const std::string& sample_id) const {
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].sample_id == sample_id) {
            return i;
        }
    }
    return std::nullopt;
}

ExpressionMatrix read_expression(std::istream& input, ExpressionUnit unit, const std::string& source) {
    std::string line;
    std::size_t line_number = 1;
    if (!text::read_line(input, line)) {
        throw Error(ErrorKind::parse, source + ": missing header row");
    }

    ExpressionMatrix output;
    {
        auto header = text::split_tabs(line);
        std::unordered_set<std::string> seen;
        for (std::size_t i = 1; i < header.size(); ++i) {
            std::string id(header[i]);
            if (!seen.insert(id).second) {
                throw Error(ErrorKind::duplicate, text::location(source, line_number) + ": sample '" + id + "' appears more than once");
            }
            output.sample_ids.push_back(std::move(id));
        }
    }
    const std::size_t nsamples = output.sample_ids.size();
    if (nsamples == 0) {
        throw Error(ErrorKind::parse, text::location(source, line_number) + ": header has no sample columns");
    }

    std::vector<double> buffer;
    std::unordered_set<std::string> seen_genes;
    while (text::read_line(input, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        auto fields = text::split_tabs(line);
        const auto where = text::location(source, line_number);
        if (fields.size() != nsamples + 1) {
            throw Error(ErrorKind::parse, where + ": expected " + std::to_string(nsamples + 1) + " fields, found " + std::to_string(fields.size()));
        }

        std::string gene(fields[0]);
        if (!seen_genes.insert(gene).second) {
            throw Error(ErrorKind::duplicate, where + ": gene '" + gene + "' appears more than once");
        }

        for (std::size_t s = 0; s < nsamples; ++s) {
            auto parsed = text::parse_double(fields[s + 1]);
            if (!parsed) {
                throw Error(ErrorKind::parse, where + ": non-numeric value '" + std::string(fields[s + 1]) + "' for sample '" + output.sample_ids[s] + "'");
            }
            double value = *parsed;
            if (!std::isfinite(value) || value < 0) {
                throw Error(ErrorKind::domain, where + ": value " + std::string(fields[s + 1]) + " must be finite and non-negative");
            }
            if (unit == ExpressionUnit::tpm) {
                value = std::log2(value + 1.0);
            }
            buffer.push_back(value);
        }
        output.gene_ids.push_back(std::move(gene));
    }

    const auto ngenes = static_cast<Eigen::Index>(output.gene_ids.size());
    output.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> >(buffer.data(), ngenes, static_cast<Eigen::Index>(nsamples));
    return output;
}

ExpressionMatrix load_expression(const std::filesystem::path& path, ExpressionUnit unit) {
    auto input = text::open_input(path);
    return read_expression(input, unit, path.string());
}

void write_expression(std::ostream& output, const ExpressionMatrix& matrix) {
    output << "gene";
    for (const auto& id : matrix.sample_ids) {
        output << '\t' << id;
    }
    output << '\n';
    for (Eigen::Index g = 0; g < matrix.num_genes(); ++g) {
        output << matrix.gene_ids[g];
        for (Eigen::Index s = 0; s < matrix.num_samples(); ++s) {
            output << '\t' << text::format_double(matrix.values(g, s));
        }
        output << '\n';
    }
}

void save_expression(const std::filesystem::path& path, const ExpressionMatrix& matrix) {
    auto output = text::open_output(path);
    write_expression(output, matrix);
}

ExpressionMatrix filter_genes(const ExpressionMatrix& matrix, double mean_min, double sd_min) {
    if (matrix.num_genes() == 0 || matrix.num_samples() == 0) {
        throw Error(ErrorKind::empty_result, "gene filter applied to an empty matrix");
    }

    const auto n = matrix.num_samples();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index g = 0; g < matrix.num_genes(); ++g) {
        auto row = matrix.values.row(g);
        const double mean = row.mean();
        double sd = 0;
        if (n > 1) {
            sd = std::sqrt((row.array() - mean).square().sum() / static_cast<double>(n - 1));
        }
        if (mean > mean_min && sd > sd_min) {
            keep.push_back(g);
        }
    }

    if (keep.empty()) {
        throw Error(ErrorKind::empty_result, "no gene passes the expression filter (mean > " + text::format_double(mean_min) + ", sd > " + text::format_double(sd_min) + ")");
    }

    ExpressionMatrix output;
    output.sample_ids = matrix.sample_ids;
    output.values.resize(static_cast<Eigen::Index>(keep.size()), n);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        output.gene_ids.push_back(matrix.gene_ids[keep[i]]);
        output.values.row(static_cast<Eigen::Index>(i)) = matrix.values.row(keep[i]);
    }
    return output;
}

GeneSetCollection read_gmt(std::istream& input, const std::string& source) {
    std::vector<GeneSet> sets;
    std::unordered_set<std::string> names;
    std::string line;
    std::size_t line_number = 0;
    while (text::read_line(input, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        auto fields = text::split_tabs(line);
        const auto where = text::location(source, line_number);
        if (fields.size() < 3) {
            throw Error(ErrorKind::parse, where + ": a gene set line needs a name, a description and at least one gene");
        }

        GeneSet set;
        set.name = std::string(fields[0]);
        set.description = std::string(fields[1]);
        if (set.name.empty()) {
            throw Error(ErrorKind::parse, where + ": empty gene set name");
        }
        if (!names.insert(set.name).second) {
            throw Error(ErrorKind::duplicate, where + ": gene set '" + set.name + "' appears more than once");
        }
        for (std::size_t f = 2; f < fields.size(); ++f) {
            if (!fields[f].empty()) {
                set.members.emplace_back(fields[f]);
            }
        }
        if (set.members.empty()) {
            throw Error(ErrorKind::parse, where + ": gene set '" + set.name + "' has no members");
        }
        sets.push_back(std::move(set));
    }
    return GeneSetCollection::from_sets(std::move(sets));
}

GeneSetCollection load_gmt(const std::filesystem::path& path) {
    auto input = text::open_input(path);
    return read_gmt(input, path.string());
}

void write_gmt(std::ostream& output, const GeneSetCollection& collection) {
    for (const auto& set : collection.sets) {
        output << set.name << '\t' << set.description;
        for (const auto& gene : set.members) {
            output << '\t' << gene;
        }
        output << '\n';
    }
}

void save_gmt(const std::filesystem::path& path, const GeneSetCollection& collection) {
    auto output = text::open_output(path);
    write_gmt(output, collection);
}

ClinicalTable read_clinical(std::istream& input, std::int64_t cap_days, const std::string& source) {
    std::string line;
    if (!text::read_line(input, line)) {
        throw Error(ErrorKind::parse, source + ": missing header row");
    }

    auto header = text::split_tabs(line);
    std::optional<std::size_t> id_col, time_col, event_col;
    ClinicalTable output;
    std::vector<std::size_t> label_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "sample_id") {
            id_col = i;
        } else if (header[i] == "time_days") {
            time_col = i;
        } else if (header[i] == "event") {
            event_col = i;
        } else {
            label_cols.push_back(i);
            output.label_columns.emplace_back(header[i]);
        }
    }
    if (!id_col || !time_col || !event_col) {
        throw Error(ErrorKind::parse, text::location(source, 1) + ": header must contain sample_id, time_days and event");
    }

    std::unordered_set<std::string> seen;
    std::size_t line_number = 1;
    while (text::read_line(input, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        auto fields = text::split_tabs(line);
        const auto where = text::location(source, line_number);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::parse, where + ": expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
        }

        ClinicalRecord record;
        record.sample_id = std::string(fields[*id_col]);
        if (!seen.insert(record.sample_id).second) {
            throw Error(ErrorKind::duplicate, where + ": sample '" + record.sample_id + "' appears more than once");
        }

        auto time = text::parse_int(fields[*time_col]);
        if (!time) {
            throw Error(ErrorKind::parse, where + ": time_days '" + std::string(fields[*time_col]) + "' is not an integer");
        }
        if (*time < 0) {
            throw Error(ErrorKind::domain, where + ": negative survival time");
        }
        record.time_days = *time;

        if (fields[*event_col] == "1") {
            record.event = true;
        } else if (fields[*event_col] == "0") {
            record.event = false;
        } else {
            throw Error(ErrorKind::parse, where + ": event must be 0 or 1");
        }

        for (std::size_t l = 0; l < label_cols.size(); ++l) {
            record.labels[output.label_columns[l]] = std::string(fields[label_cols[l]]);
        }
        output.records.push_back(std::move(record));
    }

    return cap_survival(std::move(output), cap_days);
}

ClinicalTable load_clinical(const std::filesystem::path& path, std::int64_t cap_days) {
    auto input = text::open_input(path);
    return read_clinical(input, cap_days, path.string());
}

void write_clinical(std::ostream& output, const ClinicalTable& table) {
    output << "sample_id\ttime_days\tevent";
    for (const auto& column : table.label_columns) {
        output << '\t' << column;
    }
    output << '\n';
    for (const auto& record : table.records) {
        output << record.sample_id << '\t' << record.time_days << '\t' << (record.event ? 1 : 0);
        for (const auto& column : table.label_columns) {
            auto it = record.labels.find(column);
            output << '\t' << (it == record.labels.end() ? std::string() : it->second);
        }
        output << '\n';
    }
}

void save_clinical(const std::filesystem::path& path, const ClinicalTable& table) {
    auto output = text::open_output(path);
    write_clinical(output, table);
}

ClinicalTable cap_survival(ClinicalTable table, std::int64_t cap_days) {
    for (auto& record : table.records) {
        if (record.time_days > cap_days) {
            record.time_days = cap_days;
            record.event = false;
        }
    }
    return table;
}

Aligned align(const ExpressionMatrix& matrix, const GeneSetCollection& collection, const std::optional<ClinicalTable>& clinical) {
    std::unordered_set<std::string> available(matrix.gene_ids.begin(), matrix.gene_ids.end());
    std::unordered_set<std::string> members(collection.universe.begin(), collection.universe.end());

    std::vector<std::size_t> genes;
    for (std::size_t g = 0; g < matrix.gene_ids.size(); ++g) {
        if (members.count(matrix.gene_ids[g])) {
            genes.push_back(g);
        }
    }
    if (genes.empty()) {
        throw Error(ErrorKind::alignment, "the expression matrix shares no gene with the gene-set collection");
    }

    std::vector<GeneSet> sets;
    for (const auto& set : collection.sets) {
        GeneSet restricted{set.name, set.description, {}};
        for (const auto& gene : set.members) {
            if (available.count(gene)) {
                restricted.members.push_back(gene);
            }
        }
        if (!restricted.members.empty()) {
            sets.push_back(std::move(restricted));
        }
    }

    std::vector<std::size_t> samples;
    std::optional<ClinicalTable> table;
    if (clinical) {
        std::unordered_map<std::string, std::size_t> by_id;
        for (std::size_t r = 0; r < clinical->records.size(); ++r) {
            by_id.emplace(clinical->records[r].sample_id, r);
        }
        table.emplace();
        table->label_columns = clinical->label_columns;
        for (std::size_t s = 0; s < matrix.sample_ids.size(); ++s) {
            auto it = by_id.find(matrix.sample_ids[s]);
            if (it != by_id.end()) {
                samples.push_back(s);
                table->records.push_back(clinical->records[it->second]);
            }
        }
        if (samples.empty()) {
            throw Error(ErrorKind::alignment, "the expression matrix shares no sample with the clinical table");
        }
    } else {
        samples.resize(matrix.sample_ids.size());
        for (std::size_t s = 0; s < samples.size(); ++s) {
            samples[s] = s;
        }
    }

    Aligned output;
    output.matrix.values.resize(static_cast<Eigen::Index>(genes.size()), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t g = 0; g < genes.size(); ++g) {
        output.matrix.gene_ids.push_back(matrix.gene_ids[genes[g]]);
        for (std::size_t s = 0; s < samples.size(); ++s) {
            output.matrix.values(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(s)) = matrix.values(static_cast<Eigen::Index>(genes[g]), static_cast<Eigen::Index>(samples[s]));
        }
    }
    for (auto s : samples) {
        output.matrix.sample_ids.push_back(matrix.sample_ids[s]);
    }
    output.collection = GeneSetCollection::from_sets(std::move(sets));
    output.clinical = std::move(table);
    return output;
}

ExpressionMatrix select_samples(const ExpressionMatrix& matrix, const std::vector<std::size_t>& columns) {
    ExpressionMatrix output;
    output.gene_ids = matrix.gene_ids;
    output.values.resize(matrix.num_genes(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        output.values.col(static_cast<Eigen::Index>(c)) = matrix.values.col(static_cast<Eigen::Index>(columns[c]));
        output.sample_ids.push_back(matrix.sample_ids[columns[c]]);
    }
    return output;
}

}
