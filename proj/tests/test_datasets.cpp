#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "clad/datasets.hpp"
#include "clad/digits.hpp"
#include "clad/rng.hpp"

using namespace clad;

namespace {

void put_be32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_images_file(const std::string& path, std::uint32_t magic, std::uint32_t count,
                       std::uint32_t rows, std::uint32_t cols, const std::vector<unsigned char>& pixels) {
    std::ofstream out(path, std::ios::binary);
    put_be32(out, magic);
    put_be32(out, count);
    put_be32(out, rows);
    put_be32(out, cols);
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_labels_file(const std::string& path, std::uint32_t magic, std::uint32_t count,
                       const std::vector<unsigned char>& labels) {
    std::ofstream out(path, std::ios::binary);
    put_be32(out, magic);
    put_be32(out, count);
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

struct TempFiles {
    std::vector<std::string> paths;
    ~TempFiles() {
        for (const auto& p : paths) std::remove(p.c_str());
    }
    const char* add(std::string p) {
        paths.push_back(std::move(p));
        return paths.back().c_str();
    }
};

LabeledDataset tiny_labeled(std::vector<int> labels, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset ds;
    for (int l : labels) {
        Tensor t({3});
        for (double& v : t.data) v = l + 0.1 * rng.normal();
        ds.samples.push_back(std::move(t));
        ds.labels.push_back(l);
    }
    return ds;
}

}  // namespace

TEST_CASE("load_idx: accepts a well-formed pair and scales bytes to [0,1]") {
    TempFiles tf;
    std::vector<unsigned char> pixels(2 * 28 * 28, 0);
    pixels[0] = 255;
    pixels[1] = 128;
    write_images_file(tf.add("ok-images"), 0x803, 2, 28, 28, pixels);
    write_labels_file(tf.add("ok-labels"), 0x801, 2, {7, 3});
    LabeledDataset ds = load_idx("ok-images", "ok-labels");
    REQUIRE(ds.size() == 2);
    CHECK(ds.samples[0].shape == std::vector<std::size_t>{28, 28});
    CHECK(ds.samples[0][0] == 1.0);
    CHECK(ds.samples[0][1] == doctest::Approx(128.0 / 255.0));
    CHECK(ds.samples[0][2] == 0.0);
    CHECK(ds.labels == std::vector<int>{7, 3});
}

TEST_CASE("load_idx: five corruption modes give five distinct errors") {
    TempFiles tf;
    std::vector<unsigned char> pixels(2 * 4 * 4, 10);
    write_images_file(tf.add("c-img"), 0x803, 2, 4, 4, pixels);
    write_labels_file(tf.add("c-lab"), 0x801, 2, {1, 2});

    // 1. bad magic
    write_images_file(tf.add("bad-magic"), 0xDEADBEEF, 2, 4, 4, pixels);
    CHECK_THROWS_WITH_AS(load_idx("bad-magic", "c-lab"), doctest::Contains("bad magic"),
                         std::runtime_error);

    // 2. truncated image payload
    std::vector<unsigned char> short_pixels(2 * 4 * 4 - 5, 10);
    write_images_file(tf.add("trunc-img"), 0x803, 2, 4, 4, short_pixels);
    CHECK_THROWS_WITH_AS(load_idx("trunc-img", "c-lab"), doctest::Contains("truncated image payload"),
                         std::runtime_error);

    // 3. count mismatch between the two files
    write_labels_file(tf.add("three-lab"), 0x801, 3, {1, 2, 3});
    CHECK_THROWS_WITH_AS(load_idx("c-img", "three-lab"), doctest::Contains("count mismatch"),
                         std::runtime_error);

    // 4. wrong dimension count in the image magic
    write_images_file(tf.add("wrong-dims"), 0x802, 2, 4, 4, pixels);
    CHECK_THROWS_WITH_AS(load_idx("wrong-dims", "c-lab"), doctest::Contains("wrong dimension count"),
                         std::runtime_error);

    // 5. labels file shorter than its declared count
    write_labels_file(tf.add("short-lab"), 0x801, 2, {1});
    CHECK_THROWS_WITH_AS(load_idx("c-img", "short-lab"), doctest::Contains("truncated label payload"),
                         std::runtime_error);
}

TEST_CASE("write_idx -> load_idx round trip is value-exact") {
    LabeledDataset ds = synth_digits(3, 99, "train");
    TempFiles tf;
    write_idx(ds, tf.add("rt-images"), tf.add("rt-labels"));
    LabeledDataset back = load_idx("rt-images", "rt-labels");
    REQUIRE(back.size() == ds.size());
    CHECK(back.labels == ds.labels);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.samples[i].data == ds.samples[i].data);
    }
}

TEST_CASE("synth_gaussian_mixture: degenerate variance, exact counts, validation") {
    GaussianMode tight{{1.0, -2.0}, {1e-12, 1e-12}, 50, 4};
    LabeledDataset ds = synth_gaussian_mixture({tight}, 5);
    REQUIRE(ds.size() == 50);
    for (const Tensor& s : ds.samples) {
        CHECK(std::fabs(s[0] - 1.0) < 1e-4);
        CHECK(std::fabs(s[1] + 2.0) < 1e-4);
    }

    LabeledDataset two = synth_gaussian_mixture(
        {{{0.0}, {1.0}, 100, 0}, {{6.0}, {1.0}, 50, 1}}, 5);
    CHECK(two.size() == 150);
    CHECK(std::count(two.labels.begin(), two.labels.end(), 0) == 100);
    CHECK(std::count(two.labels.begin(), two.labels.end(), 1) == 50);

    CHECK_THROWS_AS(synth_gaussian_mixture({{{0.0}, {0.0}, 10, 0}}, 1), std::invalid_argument);
}

TEST_CASE("synth_gaussian_mixture: 6-sigma separation is midpoint-separable") {
    LabeledDataset ds = synth_gaussian_mixture(
        {{{0.0}, {1.0}, 2000, 0}, {{6.0}, {1.0}, 2000, 1}}, 1234);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        int pred = ds.samples[i][0] < 3.0 ? 0 : 1;
        if (pred == ds.labels[i]) ++correct;
    }
    CHECK(static_cast<double>(correct) / ds.size() >= 0.997);
}

TEST_CASE("build_scenario: filtering, stripping, binary labels") {
    LabeledDataset train = tiny_labeled({0, 1, 2, 3, 8, 8, 3, 0, 5}, 1);
    LabeledDataset test = tiny_labeled({0, 3, 8, 1, 2, 5, 9}, 2);
    ScenarioSpec cur = find_catalog_entry("mnist", "CUR").to_spec();
    ScenarioBundle b = build_scenario(train, test, cur);

    CHECK(b.scenario.x_train.size() == 6);  // the 0,3,8,8,3,0 members survive the filter
    for (int l : b.oracle.train_latent) CHECK((l == 0 || l == 3 || l == 8));
    CHECK(b.scenario.x_test.size() == test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        bool normal = test.labels[i] == 0 || test.labels[i] == 3 || test.labels[i] == 8;
        CHECK(b.scenario.y_test[i] == (normal ? 0 : 1));
        CHECK(b.oracle.test_latent[i] == test.labels[i]);
    }
}

TEST_CASE("build_scenario: degenerate specs are rejected") {
    LabeledDataset train = tiny_labeled({0, 1}, 3);
    LabeledDataset test = tiny_labeled({0, 1}, 4);
    CHECK_THROWS_AS(build_scenario(train, test, {"all", "x", {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(build_scenario(train, test, {"none", "x", {}}), std::invalid_argument);
    CHECK_THROWS_AS(build_scenario(train, test, {"missing", "x", {7}}), std::invalid_argument);
}

TEST_CASE("catalog ships the published super-category tables") {
    CHECK(find_catalog_entry("mnist", "CUR").labels == std::vector<int>{0, 3, 8});
    CHECK(find_catalog_entry("mnist", "STR").labels == std::vector<int>{1, 4, 7});
    CHECK(find_catalog_entry("mnist", "MIX").labels == std::vector<int>{2, 5, 6, 9});
    CHECK(find_catalog_entry("cifar10", "THG").label_names ==
          std::vector<std::string>{"Airplane", "Automobile", "Ship", "Truck"});
    CHECK(find_catalog_entry("gtsrb", "SPEC").labels.size() == 4);
    CHECK(find_catalog_entry("gtsrb", "WARN").labels.size() == 15);

    std::size_t gtsrb = 0;
    std::set<int> gtsrb_ids;
    for (const CatalogEntry& e : builtin_scenario_tables()) {
        if (e.dataset == "gtsrb") {
            ++gtsrb;
            gtsrb_ids.insert(e.labels.begin(), e.labels.end());
        }
    }
    CHECK(gtsrb == 6);
    CHECK(gtsrb_ids.size() == 43);  // the six groups partition all 43 sign classes

    CHECK_THROWS_AS(find_catalog_entry("mnist", "NOPE"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(find_catalog_entry("tiny-imagenet", "ANML").to_spec(),
                         doctest::Contains("names only"), std::invalid_argument);
}

TEST_CASE("singleton one-class specs are constructible") {
    LabeledDataset train = tiny_labeled({5, 5, 1, 2}, 7);
    LabeledDataset test = tiny_labeled({5, 1, 2, 3}, 8);
    ScenarioBundle b = build_scenario(train, test, {"digit5", "mnist", {5}});
    CHECK(b.scenario.x_train.size() == 2);
    CHECK(b.scenario.y_test == std::vector<int>{0, 1, 1, 1});
}

TEST_CASE("labeled-vector CSV: import, errors, exact round trip") {
    TempFiles tf;
    {
        std::ofstream out(tf.add("vec.csv"));
        out << "label,v1,v2,v3,v4\n";
        out << "0,0.25,1,2,3\n1,4,5,6,7\n0,-1,-2,-3,-4.5\n";
    }
    LabeledDataset ds = import_labeled_vectors("vec.csv");
    REQUIRE(ds.size() == 3);
    CHECK(ds.samples[0].shape == std::vector<std::size_t>{4});
    CHECK(ds.labels == std::vector<int>{0, 1, 0});
    CHECK(ds.samples[2][3] == -4.5);

    {
        std::ofstream out(tf.add("ragged.csv"));
        out << "0,1,2\n1,3\n";
    }
    CHECK_THROWS_WITH_AS(import_labeled_vectors("ragged.csv"), doctest::Contains("line 2"),
                         std::runtime_error);

    {
        std::ofstream out(tf.add("alpha.csv"));
        out << "0,1,2\n0,x,2\n";
    }
    CHECK_THROWS_WITH_AS(import_labeled_vectors("alpha.csv"), doctest::Contains("line 2"),
                         std::runtime_error);

    Rng rng(17);
    LabeledDataset noisy;
    for (int i = 0; i < 20; ++i) {
        Tensor t({5});
        for (double& v : t.data) v = rng.normal() * 1e3;
        noisy.samples.push_back(std::move(t));
        noisy.labels.push_back(static_cast<int>(rng.index(4)));
    }
    export_labeled_vectors(noisy, tf.add("noisy.csv"));
    LabeledDataset back = import_labeled_vectors("noisy.csv");
    REQUIRE(back.size() == noisy.size());
    CHECK(back.labels == noisy.labels);
    for (std::size_t i = 0; i < noisy.size(); ++i) CHECK(back.samples[i].data == noisy.samples[i].data);
}

TEST_CASE("synth_digits: balanced, deterministic, byte-quantized 28x28") {
    LabeledDataset a = synth_digits(5, 42, "train");
    LabeledDataset b = synth_digits(5, 42, "train");
    LabeledDataset t = synth_digits(5, 42, "test");
    REQUIRE(a.size() == 50);
    CHECK(a.labels == b.labels);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.samples[i].data == b.samples[i].data);
    // different split, different draws
    CHECK(a.samples[0].data != t.samples[0].data);

    std::vector<int> counts(10, 0);
    for (int l : a.labels) ++counts[l];
    for (int c : counts) CHECK(c == 5);

    for (const Tensor& img : a.samples) {
        CHECK(img.shape == std::vector<std::size_t>{28, 28});
        for (double v : img.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v * 255.0 == doctest::Approx(std::round(v * 255.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("the shipped catalog data file mirrors the builtin tables") {
    std::ifstream in(std::string(TEST_SOURCE_DIR) + "/../data/scenario_catalog.tsv");
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));  // header
    CHECK(line == "dataset\tcode\tdescription\tlabel_ids\tlabel_names");
    std::size_t rows = 0;
    for (const CatalogEntry& e : builtin_scenario_tables()) {
        REQUIRE(std::getline(in, line));
        ++rows;
        std::string ids;
        for (std::size_t i = 0; i < e.labels.size(); ++i) {
            ids += (i ? ";" : "") + std::to_string(e.labels[i]);
        }
        std::string names;
        for (std::size_t i = 0; i < e.label_names.size(); ++i) {
            names += (i ? ";" : "") + e.label_names[i];
        }
        CHECK(line == e.dataset + "\t" + e.code + "\t" + e.description + "\t" + ids + "\t" + names);
    }
    CHECK(rows == builtin_scenario_tables().size());
    CHECK(!std::getline(in, line));  // no trailing rows
}
