#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dtp/rng.hpp"

namespace dtp {

enum class FeatureKind { Categorical, Numeric };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::Categorical;
    // categorical: vocabulary of exact string values (cardinality = values.size())
    std::vector<std::string> values;
    // numeric: declared finite bounds, min < max; stored values are
    // min-max normalized to [0,1]
    double min = 0.0;
    double max = 1.0;

    std::size_t cardinality() const { return values.size(); }
};

struct FeatureSchema {
    std::vector<Feature> features;
    std::vector<std::string> class_labels;

    std::size_t num_features() const { return features.size(); }
    std::size_t num_classes() const { return class_labels.size(); }
    bool all_categorical() const;
    // dimension of the one-hot/numeric vector encoding
    std::size_t encoded_dim() const;
    // number of points in X^m; 0 if any feature is numeric (infinite)
    // or the product overflows the cap
    std::uint64_t feature_space_size(std::uint64_t cap) const;

    void validate() const;  // throws on an ill-formed schema
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

// One labeled example. Categorical features hold the value index as a double;
// numeric features hold the normalized value in [0,1].
struct Record {
    std::vector<double> x;
    int y = 0;

    bool same_point(const Record& other) const { return x == other.x && y == other.y; }
};

class Dataset {
public:
    Dataset() = default;
    Dataset(SchemaPtr schema, std::vector<Record> records);
    Dataset(SchemaPtr schema, std::vector<Record> records, std::vector<std::int64_t> ids);

    const FeatureSchema& schema() const { return *schema_; }
    SchemaPtr schema_ptr() const { return schema_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const Record& record(std::size_t i) const { return records_[i]; }
    std::int64_t id(std::size_t i) const { return ids_[i]; }
    const std::vector<Record>& records() const { return records_; }
    const std::vector<std::int64_t>& ids() const { return ids_; }

    // position of a record id; throws if absent
    std::size_t index_of(std::int64_t id) const;
    bool contains(std::int64_t id) const;

    Dataset subset(const std::vector<std::size_t>& indices) const;
    Dataset without(std::int64_t id) const;

    // count of records per class label
    std::vector<std::size_t> class_counts() const;

private:
    SchemaPtr schema_;
    std::vector<Record> records_;
    std::vector<std::int64_t> ids_;
};

// Validates a record against the schema; throws with a diagnostic on failure.
void validate_record(const FeatureSchema& schema, const Record& r);

// One-hot categorical features, pass-through normalized numerics.
void encode_features(const FeatureSchema& schema, const std::vector<double>& x,
                     std::vector<double>& out);
std::vector<double> encode_features(const FeatureSchema& schema, const std::vector<double>& x);

// Enumerates x vectors of an all-categorical feature space in mixed-radix
// order; index in [0, feature_space_size).
std::vector<double> feature_point(const FeatureSchema& schema, std::uint64_t index);

// CSV ingestion: UTF-8, comma separated, header row of feature names with the
// class column last, categorical values matched as exact strings. Numeric
// values are min-max normalized on load.
Dataset load_csv(const std::string& path, SchemaPtr schema);
void save_csv(const Dataset& d, const std::string& path);

// Uniform subset without replacement, records kept in original order.
Dataset sample_subset(const Dataset& d, std::size_t size, std::uint64_t seed);

// Random partition into two disjoint halves of equal size.
std::pair<Dataset, Dataset> split_half(const Dataset& d, std::uint64_t seed);

}  // namespace dtp
