#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "dtp/dataset.hpp"
#include "dtp/rng.hpp"

namespace test_helpers {

// schema with m categorical features of the given cardinality and k classes
inline dtp::SchemaPtr categorical_schema(std::size_t m, std::size_t cardinality, std::size_t k) {
    auto schema = std::make_shared<dtp::FeatureSchema>();
    for (std::size_t j = 0; j < m; ++j) {
        dtp::Feature f;
        f.name = "f" + std::to_string(j);
        f.kind = dtp::FeatureKind::Categorical;
        for (std::size_t v = 0; v < cardinality; ++v) {
            f.values.push_back("v" + std::to_string(v));
        }
        schema->features.push_back(std::move(f));
    }
    for (std::size_t c = 0; c < k; ++c) {
        schema->class_labels.push_back("c" + std::to_string(c));
    }
    return schema;
}

inline dtp::SchemaPtr numeric_schema(std::size_t m, std::size_t k) {
    auto schema = std::make_shared<dtp::FeatureSchema>();
    for (std::size_t j = 0; j < m; ++j) {
        dtp::Feature f;
        f.name = "x" + std::to_string(j);
        f.kind = dtp::FeatureKind::Numeric;
        f.min = 0.0;
        f.max = 1.0;
        schema->features.push_back(std::move(f));
    }
    for (std::size_t c = 0; c < k; ++c) {
        schema->class_labels.push_back("c" + std::to_string(c));
    }
    return schema;
}

inline dtp::Dataset random_categorical_dataset(dtp::SchemaPtr schema, std::size_t n,
                                               std::uint64_t seed,
                                               std::size_t min_class_support = 0) {
    dtp::Rng rng(seed);
    for (;;) {
        std::vector<dtp::Record> records(n);
        std::vector<std::size_t> class_counts(schema->num_classes(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            records[i].x.resize(schema->num_features());
            for (std::size_t j = 0; j < schema->num_features(); ++j) {
                records[i].x[j] = static_cast<double>(
                    rng.index(schema->features[j].cardinality()));
            }
            records[i].y = static_cast<int>(rng.index(schema->num_classes()));
            class_counts[static_cast<std::size_t>(records[i].y)]++;
        }
        bool supported = true;
        for (std::size_t c : class_counts) {
            if (c < min_class_support) {
                supported = false;
                break;
            }
        }
        if (supported) {
            return dtp::Dataset(schema, std::move(records));
        }
    }
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        dir_ = std::filesystem::temp_directory_path() /
               ("dtp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::filesystem::path path(const std::string& name) const { return dir_ / name; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace test_helpers
