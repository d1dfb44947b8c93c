#include "dtp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace dtp {

bool FeatureSchema::all_categorical() const {
    return std::all_of(features.begin(), features.end(), [](const Feature& f) {
        return f.kind == FeatureKind::Categorical;
    });
}

std::size_t FeatureSchema::encoded_dim() const {
    std::size_t dim = 0;
    for (const Feature& f : features) {
        dim += f.kind == FeatureKind::Categorical ? f.cardinality() : 1;
    }
    return dim;
}

std::uint64_t FeatureSchema::feature_space_size(std::uint64_t cap) const {
    std::uint64_t total = 1;
    for (const Feature& f : features) {
        if (f.kind != FeatureKind::Categorical) {
            return 0;
        }
        total *= f.cardinality();
        if (total > cap) {
            return 0;
        }
    }
    return total;
}

void FeatureSchema::validate() const {
    if (features.empty()) {
        throw std::invalid_argument("schema: needs at least one feature");
    }
    if (class_labels.size() < 2) {
        throw std::invalid_argument("schema: needs at least two class labels");
    }
    for (const Feature& f : features) {
        if (f.kind == FeatureKind::Categorical) {
            if (f.cardinality() < 2) {
                throw std::invalid_argument("schema: categorical cardinality < 2 for " + f.name);
            }
        } else {
            if (!std::isfinite(f.min) || !std::isfinite(f.max) || !(f.min < f.max)) {
                throw std::invalid_argument("schema: bad numeric bounds for " + f.name);
            }
        }
    }
}

void validate_record(const FeatureSchema& schema, const Record& r) {
    if (r.x.size() != schema.num_features()) {
        throw std::invalid_argument("record: feature count mismatch");
    }
    for (std::size_t j = 0; j < r.x.size(); ++j) {
        const Feature& f = schema.features[j];
        double v = r.x[j];
        if (f.kind == FeatureKind::Categorical) {
            if (v != std::floor(v) || v < 0 || v >= static_cast<double>(f.cardinality())) {
                throw std::invalid_argument("record: categorical value out of range for " + f.name);
            }
        } else {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("record: numeric value out of bounds for " + f.name);
            }
        }
    }
    if (r.y < 0 || r.y >= static_cast<int>(schema.num_classes())) {
        throw std::invalid_argument("record: class index out of range");
    }
}

Dataset::Dataset(SchemaPtr schema, std::vector<Record> records)
    : Dataset(std::move(schema), std::move(records), {}) {
    ids_.resize(records_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        ids_[i] = static_cast<std::int64_t>(i);
    }
}

Dataset::Dataset(SchemaPtr schema, std::vector<Record> records, std::vector<std::int64_t> ids)
    : schema_(std::move(schema)), records_(std::move(records)), ids_(std::move(ids)) {
    if (!schema_) {
        throw std::invalid_argument("dataset: null schema");
    }
    schema_->validate();
    if (!ids_.empty() && ids_.size() != records_.size()) {
        throw std::invalid_argument("dataset: ids/records size mismatch");
    }
    for (const Record& r : records_) {
        validate_record(*schema_, r);
    }
    if (!ids_.empty()) {
        std::vector<std::int64_t> sorted = ids_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw std::invalid_argument("dataset: duplicate record ids");
        }
    }
}

std::size_t Dataset::index_of(std::int64_t id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (ids_[i] == id) {
            return i;
        }
    }
    throw std::out_of_range("dataset: no record with id " + std::to_string(id));
}

bool Dataset::contains(std::int64_t id) const {
    return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<Record> recs;
    std::vector<std::int64_t> ids;
    recs.reserve(indices.size());
    ids.reserve(indices.size());
    for (std::size_t i : indices) {
        recs.push_back(records_.at(i));
        ids.push_back(ids_.at(i));
    }
    return Dataset(schema_, std::move(recs), std::move(ids));
}

Dataset Dataset::without(std::int64_t id) const {
    std::size_t drop = index_of(id);
    std::vector<std::size_t> keep;
    keep.reserve(size() - 1);
    for (std::size_t i = 0; i < size(); ++i) {
        if (i != drop) {
            keep.push_back(i);
        }
    }
    return subset(keep);
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(schema_->num_classes(), 0);
    for (const Record& r : records_) {
        counts[static_cast<std::size_t>(r.y)]++;
    }
    return counts;
}

void encode_features(const FeatureSchema& schema, const std::vector<double>& x,
                     std::vector<double>& out) {
    out.assign(schema.encoded_dim(), 0.0);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < schema.num_features(); ++j) {
        const Feature& f = schema.features[j];
        if (f.kind == FeatureKind::Categorical) {
            out[pos + static_cast<std::size_t>(x[j])] = 1.0;
            pos += f.cardinality();
        } else {
            out[pos++] = x[j];
        }
    }
}

std::vector<double> encode_features(const FeatureSchema& schema, const std::vector<double>& x) {
    std::vector<double> out;
    encode_features(schema, x, out);
    return out;
}

std::vector<double> feature_point(const FeatureSchema& schema, std::uint64_t index) {
    std::vector<double> x(schema.num_features(), 0.0);
    for (std::size_t j = 0; j < schema.num_features(); ++j) {
        const Feature& f = schema.features[j];
        if (f.kind != FeatureKind::Categorical) {
            throw std::invalid_argument("feature_point: numeric feature space is not enumerable");
        }
        x[j] = static_cast<double>(index % f.cardinality());
        index /= f.cardinality();
    }
    return x;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string format_numeric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

Dataset load_csv(const std::string& path, SchemaPtr schema) {
    schema->validate();
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("load_csv: empty file " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::vector<std::string> header = split_line(line);
    if (header.size() != schema->num_features() + 1) {
        throw std::runtime_error("load_csv: header has " + std::to_string(header.size()) +
                                 " columns, schema expects " +
                                 std::to_string(schema->num_features() + 1));
    }
    for (std::size_t j = 0; j < schema->num_features(); ++j) {
        if (header[j] != schema->features[j].name) {
            throw std::runtime_error("load_csv: header column '" + header[j] +
                                     "' does not match schema feature '" +
                                     schema->features[j].name + "'");
        }
    }

    std::vector<std::unordered_map<std::string, std::size_t>> vocab(schema->num_features());
    for (std::size_t j = 0; j < schema->num_features(); ++j) {
        const Feature& f = schema->features[j];
        for (std::size_t v = 0; v < f.values.size(); ++v) {
            vocab[j][f.values[v]] = v;
        }
    }
    std::unordered_map<std::string, int> label_index;
    for (std::size_t c = 0; c < schema->num_classes(); ++c) {
        label_index[schema->class_labels[c]] = static_cast<int>(c);
    }

    std::vector<Record> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != schema->num_features() + 1) {
            throw std::runtime_error("load_csv: malformed row at line " + std::to_string(line_no));
        }
        Record r;
        r.x.resize(schema->num_features());
        for (std::size_t j = 0; j < schema->num_features(); ++j) {
            const Feature& f = schema->features[j];
            if (f.kind == FeatureKind::Categorical) {
                auto it = vocab[j].find(cells[j]);
                if (it == vocab[j].end()) {
                    throw std::runtime_error("load_csv: unknown categorical value '" + cells[j] +
                                             "' for feature '" + f.name + "' at line " +
                                             std::to_string(line_no));
                }
                r.x[j] = static_cast<double>(it->second);
            } else {
                double raw;
                try {
                    std::size_t pos = 0;
                    raw = std::stod(cells[j], &pos);
                    if (pos != cells[j].size()) {
                        throw std::invalid_argument("trailing characters");
                    }
                } catch (const std::exception&) {
                    throw std::runtime_error("load_csv: malformed numeric '" + cells[j] +
                                             "' at line " + std::to_string(line_no));
                }
                if (!(raw >= f.min && raw <= f.max)) {
                    throw std::runtime_error("load_csv: numeric value out of range for '" + f.name +
                                             "' at line " + std::to_string(line_no));
                }
                r.x[j] = (raw - f.min) / (f.max - f.min);
            }
        }
        auto lit = label_index.find(cells.back());
        if (lit == label_index.end()) {
            throw std::runtime_error("load_csv: unknown class label '" + cells.back() +
                                     "' at line " + std::to_string(line_no));
        }
        r.y = lit->second;
        records.push_back(std::move(r));
    }
    return Dataset(std::move(schema), std::move(records));
}

void save_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("save_csv: cannot open " + path);
    }
    const FeatureSchema& schema = d.schema();
    for (const Feature& f : schema.features) {
        out << f.name << ',';
    }
    out << "class\n";
    for (std::size_t i = 0; i < d.size(); ++i) {
        const Record& r = d.record(i);
        for (std::size_t j = 0; j < schema.num_features(); ++j) {
            const Feature& f = schema.features[j];
            if (f.kind == FeatureKind::Categorical) {
                out << f.values[static_cast<std::size_t>(r.x[j])];
            } else {
                out << format_numeric(f.min + r.x[j] * (f.max - f.min));
            }
            out << ',';
        }
        out << schema.class_labels[static_cast<std::size_t>(r.y)] << '\n';
    }
    if (!out) {
        throw std::runtime_error("save_csv: write failed for " + path);
    }
}

Dataset sample_subset(const Dataset& d, std::size_t size, std::uint64_t seed) {
    if (size == 0 || size > d.size()) {
        throw std::invalid_argument("sample_subset: size out of range");
    }
    Rng rng(seed);
    return d.subset(rng.sample_indices(d.size(), size));
}

std::pair<Dataset, Dataset> split_half(const Dataset& d, std::uint64_t seed) {
    if (d.size() % 2 != 0) {
        throw std::invalid_argument("split_half: dataset size must be even");
    }
    Rng rng(seed);
    std::vector<std::size_t> order(d.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    rng.shuffle(order);
    std::size_t half = d.size() / 2;
    std::vector<std::size_t> first(order.begin(), order.begin() + half);
    std::vector<std::size_t> second(order.begin() + half, order.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {d.subset(first), d.subset(second)};
}

}  // namespace dtp
