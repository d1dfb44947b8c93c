#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dtp/binning.hpp"
#include "dtp/dataset.hpp"
#include "dtp/kmeans.hpp"
#include "helpers.hpp"

using namespace dtp;
using test_helpers::categorical_schema;
using test_helpers::numeric_schema;
using test_helpers::TempDir;
using test_helpers::write_text;

TEST_CASE("bin_probability maps to bin centers") {
    CHECK(bin_probability(0.0) == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(bin_probability(1.0) == doctest::Approx(0.995).epsilon(1e-15));
    CHECK(bin_probability(0.3333) == doctest::Approx(0.335).epsilon(1e-15));
    CHECK(bin_probability(0.5) == doctest::Approx(0.505).epsilon(1e-15));
    CHECK_THROWS_AS(bin_probability(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(bin_probability(1.01), std::invalid_argument);
    CHECK_THROWS_AS(bin_probability(std::nan("")), std::invalid_argument);
}

TEST_CASE("bin_probability is idempotent and lands on the 100-center grid") {
    Rng rng(7);
    for (int i = 0; i < 20000; ++i) {
        double p = rng.next_double();
        double binned = bin_probability(p);
        int j = bin_index(binned);
        CHECK(binned == (j + 0.5) / 100.0);
        CHECK(bin_probability(binned) == binned);
    }
    for (int j = 0; j < 100; ++j) {
        double center = (j + 0.5) / 100.0;
        CHECK(bin_probability(center) == center);
    }
}

TEST_CASE("load_csv reads rows in file order") {
    TempDir tmp;
    auto schema = categorical_schema(2, 2, 2);
    write_text(tmp.path("d.csv"),
               "f0,f1,class\n"
               "v0,v1,c0\n"
               "v1,v1,c1\n"
               "v0,v0,c0\n");
    Dataset d = load_csv(tmp.path("d.csv").string(), schema);
    REQUIRE(d.size() == 3);
    CHECK(d.record(0).x == std::vector<double>{0.0, 1.0});
    CHECK(d.record(1).y == 1);
    CHECK(d.record(2).x == std::vector<double>{0.0, 0.0});
    CHECK(d.id(0) == 0);
    CHECK(d.id(2) == 2);
}

TEST_CASE("load_csv error paths") {
    TempDir tmp;
    auto schema = categorical_schema(1, 2, 2);
    SUBCASE("unknown class label") {
        write_text(tmp.path("d.csv"), "f0,class\nv0,mystery\n");
        CHECK_THROWS_WITH_AS(load_csv(tmp.path("d.csv").string(), schema),
                             doctest::Contains("unknown class label"), std::runtime_error);
    }
    SUBCASE("unknown categorical value") {
        write_text(tmp.path("d.csv"), "f0,class\nv9,c0\n");
        CHECK_THROWS_WITH_AS(load_csv(tmp.path("d.csv").string(), schema),
                             doctest::Contains("unknown categorical value"), std::runtime_error);
    }
    SUBCASE("malformed row") {
        write_text(tmp.path("d.csv"), "f0,class\nv0\n");
        CHECK_THROWS_AS(load_csv(tmp.path("d.csv").string(), schema), std::runtime_error);
    }
    SUBCASE("header mismatch") {
        write_text(tmp.path("d.csv"), "nope,class\nv0,c0\n");
        CHECK_THROWS_AS(load_csv(tmp.path("d.csv").string(), schema), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_csv(tmp.path("absent.csv").string(), schema), std::runtime_error);
    }
}

TEST_CASE("adult-format csv: 13 features plus class column") {
    TempDir tmp;
    auto schema = std::make_shared<FeatureSchema>();
    auto add_numeric = [&](const std::string& name, double lo, double hi) {
        Feature f;
        f.name = name;
        f.kind = FeatureKind::Numeric;
        f.min = lo;
        f.max = hi;
        schema->features.push_back(std::move(f));
    };
    auto add_categorical = [&](const std::string& name, std::vector<std::string> values) {
        Feature f;
        f.name = name;
        f.kind = FeatureKind::Categorical;
        f.values = std::move(values);
        schema->features.push_back(std::move(f));
    };
    // the 14 census attributes minus fnlwgt
    add_numeric("age", 17, 90);
    add_categorical("workclass", {"Private", "Self-emp", "Gov"});
    add_categorical("education", {"Bachelors", "HS-grad", "Masters"});
    add_numeric("education-num", 1, 16);
    add_categorical("marital-status", {"Married", "Never-married"});
    add_categorical("occupation", {"Tech", "Sales"});
    add_categorical("relationship", {"Husband", "Wife", "Not-in-family"});
    add_categorical("race", {"White", "Black", "Other"});
    add_categorical("sex", {"Female", "Male"});
    add_numeric("capital-gain", 0, 99999);
    add_numeric("capital-loss", 0, 4356);
    add_numeric("hours-per-week", 1, 99);
    add_categorical("native-country", {"United-States", "Other"});
    schema->class_labels = {"<=50K", ">50K"};
    REQUIRE(schema->num_features() == 13);

    write_text(tmp.path("adult.csv"),
               "age,workclass,education,education-num,marital-status,occupation,relationship,"
               "race,sex,capital-gain,capital-loss,hours-per-week,native-country,class\n"
               "39,Gov,Bachelors,13,Never-married,Tech,Not-in-family,White,Male,2174,0,40,"
               "United-States,<=50K\n"
               "52,Self-emp,HS-grad,9,Married,Sales,Husband,White,Male,0,0,45,United-States,"
               ">50K\n");
    Dataset d = load_csv(tmp.path("adult.csv").string(), schema);
    REQUIRE(d.size() == 2);
    CHECK(d.schema().num_features() == 13);
    // numerics are min-max normalized on load
    CHECK(d.record(0).x[0] == doctest::Approx((39.0 - 17.0) / (90.0 - 17.0)));
    CHECK(d.record(1).y == 1);

    SUBCASE("out-of-range numeric is rejected") {
        write_text(tmp.path("bad.csv"),
                   "age,workclass,education,education-num,marital-status,occupation,relationship,"
                   "race,sex,capital-gain,capital-loss,hours-per-week,native-country,class\n"
                   "12,Gov,Bachelors,13,Never-married,Tech,Not-in-family,White,Male,0,0,40,"
                   "United-States,<=50K\n");
        CHECK_THROWS_AS(load_csv(tmp.path("bad.csv").string(), schema), std::runtime_error);
    }
}

TEST_CASE("save_csv round trip") {
    TempDir tmp;
    Dataset d = synth_purchase(40, 6, 2, 11);
    save_csv(d, tmp.path("d.csv").string());
    Dataset reloaded = load_csv(tmp.path("d.csv").string(), d.schema_ptr());
    REQUIRE(reloaded.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(reloaded.record(i).x == d.record(i).x);
        CHECK(reloaded.record(i).y == d.record(i).y);
    }
}

TEST_CASE("sample_subset basics") {
    auto schema = categorical_schema(1, 2, 2);
    std::vector<Record> records;
    for (int i = 0; i < 6; ++i) {
        records.push_back(Record{{static_cast<double>(i % 2)}, i % 2});
    }
    Dataset d(schema, records);

    SUBCASE("full-size sample returns every record") {
        Dataset all = sample_subset(d, d.size(), 3);
        CHECK(all.ids() == d.ids());
    }
    SUBCASE("same seed gives identical subsets") {
        CHECK(sample_subset(d, 3, 17).ids() == sample_subset(d, 3, 17).ids());
    }
    SUBCASE("ids never duplicated") {
        Dataset s = sample_subset(d, 4, 99);
        std::set<std::int64_t> unique(s.ids().begin(), s.ids().end());
        CHECK(unique.size() == 4);
    }
    SUBCASE("size out of range") {
        CHECK_THROWS_AS(sample_subset(d, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_subset(d, 7, 1), std::invalid_argument);
    }
}

TEST_CASE("sample_subset is uniform over records") {
    auto schema = categorical_schema(1, 2, 2);
    Dataset d(schema, {Record{{0.0}, 0}, Record{{1.0}, 1}});
    int picked_first = 0;
    const int trials = 10000;
    for (int seed = 0; seed < trials; ++seed) {
        Dataset s = sample_subset(d, 1, static_cast<std::uint64_t>(seed));
        if (s.id(0) == 0) {
            ++picked_first;
        }
    }
    double freq = static_cast<double>(picked_first) / trials;
    CHECK(freq == doctest::Approx(0.5).epsilon(0.04));  // +-2% absolute
}

TEST_CASE("split_half partitions the dataset") {
    auto schema = categorical_schema(1, 2, 2);
    std::vector<Record> records;
    for (int i = 0; i < 4; ++i) {
        records.push_back(Record{{static_cast<double>(i % 2)}, i % 2});
    }
    Dataset d(schema, records);
    auto [d1, d2] = split_half(d, 5);
    CHECK(d1.size() == 2);
    CHECK(d2.size() == 2);
    std::set<std::int64_t> seen;
    for (std::int64_t id : d1.ids()) seen.insert(id);
    for (std::int64_t id : d2.ids()) seen.insert(id);
    CHECK(seen.size() == 4);

    auto [e1, e2] = split_half(d, 5);
    CHECK(e1.ids() == d1.ids());
    CHECK(e2.ids() == d2.ids());

    Dataset odd(schema, {Record{{0.0}, 0}, Record{{1.0}, 1}, Record{{0.0}, 0}});
    CHECK_THROWS_AS(split_half(odd, 1), std::invalid_argument);
}

TEST_CASE("kmeans: single cluster centroid is the mean") {
    auto schema = numeric_schema(2, 2);
    std::vector<Record> records = {
        Record{{0.1, 0.2}, 0},
        Record{{0.3, 0.4}, 0},
        Record{{0.5, 0.9}, 1},
    };
    Dataset d(schema, records);
    KMeansResult r = kmeans_cluster(d, 1, 42);
    CHECK(std::all_of(r.assignments.begin(), r.assignments.end(),
                      [](int a) { return a == 0; }));
    CHECK(r.centroids[0][0] == doctest::Approx(0.3));
    CHECK(r.centroids[0][1] == doctest::Approx(0.5));
}

TEST_CASE("kmeans separates two tight clouds") {
    auto schema = numeric_schema(2, 2);
    std::vector<Record> records;
    Rng rng(4);
    // two clouds, intra-cloud spread ~0.001 against inter-cloud distance ~1
    for (int i = 0; i < 20; ++i) {
        records.push_back(Record{{0.001 * rng.next_double(), 0.001 * rng.next_double()}, 0});
    }
    for (int i = 0; i < 20; ++i) {
        records.push_back(
            Record{{0.9 + 0.001 * rng.next_double(), 0.9 + 0.001 * rng.next_double()}, 0});
    }
    Dataset d(schema, records);
    KMeansResult r = kmeans_cluster(d, 2, 9);

    // brute-force nearest-centroid check
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<double> p = encode_features(d.schema(), d.record(i).x);
        double best = 1e300;
        int arg = -1;
        for (std::size_t c = 0; c < r.centroids.size(); ++c) {
            double dist = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) {
                dist += (p[j] - r.centroids[c][j]) * (p[j] - r.centroids[c][j]);
            }
            if (dist < best) {
                best = dist;
                arg = static_cast<int>(c);
            }
        }
        CHECK(r.assignments[i] == arg);
    }
    // the clouds are recovered exactly
    for (int i = 1; i < 20; ++i) {
        CHECK(r.assignments[i] == r.assignments[0]);
        CHECK(r.assignments[20 + i] == r.assignments[20]);
    }
    CHECK(r.assignments[0] != r.assignments[20]);

    SUBCASE("same seed gives identical assignments") {
        KMeansResult again = kmeans_cluster(d, 2, 9);
        CHECK(again.assignments == r.assignments);
    }
    SUBCASE("objective is non-increasing across Lloyd iterations") {
        for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
            CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-12);
        }
    }
    SUBCASE("argument validation") {
        CHECK_THROWS_AS(kmeans_cluster(d, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(kmeans_cluster(d, d.size() + 1, 1), std::invalid_argument);
    }
}

TEST_CASE("synth_purchase structure and determinism") {
    Dataset d = synth_purchase(100, 30, 4, 123);
    REQUIRE(d.size() == 100);
    CHECK(d.schema().num_features() == 30);
    CHECK(d.schema().num_classes() == 4);
    for (const Record& r : d.records()) {
        CHECK(r.y >= 0);
        CHECK(r.y < 4);
        for (double v : r.x) {
            CHECK((v == 0.0 || v == 1.0));
        }
    }

    SUBCASE("every class appears, across seeds") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Dataset s = synth_purchase(60, 12, 3, seed);
            std::vector<std::size_t> counts = s.class_counts();
            for (std::size_t c : counts) {
                CHECK(c > 0);
            }
        }
    }
    SUBCASE("same seed is byte-identical") {
        Dataset again = synth_purchase(100, 30, 4, 123);
        REQUIRE(again.size() == d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(again.record(i).x == d.record(i).x);
            CHECK(again.record(i).y == d.record(i).y);
        }
    }
    SUBCASE("degenerate sizes rejected") {
        CHECK_THROWS_AS(synth_purchase(0, 5, 2, 1), std::invalid_argument);
        CHECK_THROWS_AS(synth_purchase(3, 5, 4, 1), std::invalid_argument);
    }
}

TEST_CASE("dataset invariants") {
    auto schema = categorical_schema(1, 2, 2);
    SUBCASE("record conformance enforced") {
        CHECK_THROWS_AS(Dataset(schema, {Record{{2.0}, 0}}), std::invalid_argument);
        CHECK_THROWS_AS(Dataset(schema, {Record{{0.0}, 5}}), std::invalid_argument);
        CHECK_THROWS_AS(Dataset(schema, {Record{{0.0, 1.0}, 0}}), std::invalid_argument);
    }
    SUBCASE("duplicate ids rejected") {
        CHECK_THROWS_AS(Dataset(schema, {Record{{0.0}, 0}, Record{{1.0}, 1}}, {3, 3}),
                        std::invalid_argument);
    }
    SUBCASE("without() drops exactly one id") {
        Dataset d(schema, {Record{{0.0}, 0}, Record{{1.0}, 1}, Record{{0.0}, 1}});
        Dataset rest = d.without(1);
        CHECK(rest.size() == 2);
        CHECK(!rest.contains(1));
        CHECK(rest.contains(0));
        CHECK(rest.contains(2));
        CHECK_THROWS_AS(d.without(77), std::out_of_range);
    }
}
