#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "clad/detector.hpp"
#include "clad/losses.hpp"
#include "clad/rng.hpp"
#include "clad/serialize.hpp"

using namespace clad;

namespace {

struct BlobProblem {
    std::vector<Tensor> xs;
    PseudoLabels labels;
};

BlobProblem two_blobs(std::size_t per_blob, std::uint64_t seed) {
    Rng rng(seed);
    BlobProblem p;
    p.labels.label_count = 2;
    p.labels.cluster_counts = {per_blob, per_blob};
    double centers[2][2] = {{0.0, 0.0}, {6.0, 6.0}};
    for (int b = 0; b < 2; ++b) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            Tensor t({2}, {centers[b][0] + 0.4 * rng.normal(), centers[b][1] + 0.4 * rng.normal()});
            p.xs.push_back(std::move(t));
            p.labels.labels.push_back(b + 1);
        }
    }
    return p;
}

ClassifierTrainConfig fast_cfg() {
    ClassifierTrainConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.005;
    cfg.mlp_width = 32;
    cfg.mlp_width2 = 16;
    cfg.seed = 3;
    return cfg;
}

// zero-weight classifier: every input maps to identical logits
ClassifierModel degenerate_model(std::size_t classes) {
    ClassifierModel m;
    m.num_classes = classes;
    m.input_shape = {2};
    m.scaler = InputScaler::identity();
    m.net.add(std::make_unique<DenseLayer>(Tensor({classes, 2}), Tensor({classes})));
    m.net.set_mode(Mode::eval);
    return m;
}

}  // namespace

TEST_CASE("defaults follow the published recipe") {
    ClassifierTrainConfig cfg;
    CHECK(cfg.optimizer == OptAlgo::adam);
    CHECK(cfg.learning_rate == 0.0001);
    CHECK(cfg.epochs == 100);
}

TEST_CASE("linearly separable blobs reach >= 0.99 training accuracy") {
    BlobProblem p = two_blobs(60, 11);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::fit(p.xs));
    REQUIRE(m.accuracy_history.size() == 40);
    CHECK(m.accuracy_history.back() >= 0.99);

    // argmax of logits matches the pseudo-label on nearly every training sample
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p.xs.size(); ++i) {
        Tensor logits = predict_logits(m, p.xs[i]);
        int pred = logits[0] >= logits[1] ? 1 : 2;
        if (pred == p.labels.labels[i]) ++hits;
    }
    CHECK(static_cast<double>(hits) / p.xs.size() >= 0.99);
}

TEST_CASE("zero learning rate keeps the accuracy history constant") {
    BlobProblem p = two_blobs(25, 13);
    ClassifierTrainConfig cfg = fast_cfg();
    cfg.learning_rate = 0.0;
    cfg.epochs = 6;
    ClassifierModel m = train_classifier(p.xs, p.labels, cfg, InputScaler::identity());
    for (double a : m.accuracy_history) CHECK(a == m.accuracy_history.front());
}

TEST_CASE("single-label pseudo-label set is rejected with guidance") {
    BlobProblem p = two_blobs(10, 17);
    for (int& l : p.labels.labels) l = 1;
    p.labels.cluster_counts = {20, 0};
    CHECK_THROWS_WITH_AS(train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::identity()),
                         doctest::Contains("raise the cluster count K"), std::invalid_argument);
}

TEST_CASE("predict_logits: pure, right length, shape-checked") {
    BlobProblem p = two_blobs(20, 19);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::identity());
    Tensor l1 = predict_logits(m, p.xs[0]);
    Tensor l2 = predict_logits(m, p.xs[0]);
    CHECK(l1.numel() == 2);
    CHECK(l1.data == l2.data);
    CHECK_THROWS_AS(predict_logits(m, Tensor({3})), std::invalid_argument);
}

TEST_CASE("classifier container round-trips exactly") {
    BlobProblem p = two_blobs(20, 23);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::fit(p.xs));
    save_json_file(classifier_to_json(m), "cls_roundtrip.json");
    ClassifierModel back = classifier_from_json(load_json_file("cls_roundtrip.json"));
    CHECK(predict_logits(m, p.xs[3]).data == predict_logits(back, p.xs[3]).data);
    std::remove("cls_roundtrip.json");
}

TEST_CASE("perturb_input: epsilon zero is the exact identity") {
    BlobProblem p = two_blobs(15, 29);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::identity());
    DetectorConfig cfg;
    cfg.epsilon = 0.0;
    cfg.clamp_lo = -100;
    cfg.clamp_hi = 100;
    Tensor xt = perturb_input(m, p.xs[0], cfg);
    CHECK(xt.data == p.xs[0].data);
}

TEST_CASE("perturb_input: inf-norm bound and clamp contract") {
    BlobProblem p = two_blobs(30, 31);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::identity());
    DetectorConfig cfg;
    cfg.epsilon = 0.05;
    cfg.clamp_lo = -1.0;
    cfg.clamp_hi = 6.5;
    Rng rng(5);
    for (int it = 0; it < 200; ++it) {
        Tensor x({2}, {rng.uniform(-1.0, 6.5), rng.uniform(-1.0, 6.5)});
        Tensor xt = perturb_input(m, x, cfg);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(std::fabs(xt[i] - x[i]) <= cfg.epsilon + 1e-15);
            CHECK(xt[i] >= cfg.clamp_lo);
            CHECK(xt[i] <= cfg.clamp_hi);
        }
    }
}

TEST_CASE("perturbation raises mean confidence on training data") {
    BlobProblem p = two_blobs(500, 37);
    ClassifierTrainConfig ccfg = fast_cfg();
    ccfg.epochs = 25;
    ClassifierModel m = train_classifier(p.xs, p.labels, ccfg, InputScaler::fit(p.xs));

    DetectorConfig plain;
    plain.temperature = 1.0;
    plain.epsilon = 0.0;
    DetectorConfig nudged = plain;
    nudged.epsilon = 0.01;
    nudged.clamp_lo = -3.0;
    nudged.clamp_hi = 9.0;

    double mean_plain = 0.0, mean_nudged = 0.0;
    for (const Tensor& x : p.xs) {
        mean_plain += score(m, x, plain).s;
        mean_nudged += score(m, x, nudged).s;
    }
    CHECK(mean_nudged >= mean_plain);
}

TEST_CASE("score: reduction to vanilla max-softmax at eps=0, T=1") {
    BlobProblem p = two_blobs(40, 41);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::fit(p.xs));
    DetectorConfig cfg;
    cfg.temperature = 1.0;
    cfg.epsilon = 0.0;
    Rng rng(7);
    for (int it = 0; it < 300; ++it) {
        Tensor x({2}, {rng.uniform(-2, 8), rng.uniform(-2, 8)});
        AnomalyScore s = score(m, x, cfg);
        Tensor probs = softmax_with_temperature(predict_logits(m, x), 1.0);
        double msp = std::max(probs[0], probs[1]);
        CHECK(s.s == msp);  // bit-exact
        CHECK(!s.perturbed);
    }
}

TEST_CASE("score: uniform logits give exactly 1/L") {
    ClassifierModel m = degenerate_model(4);
    DetectorConfig cfg;
    cfg.epsilon = 0.0;
    AnomalyScore s = score(m, Tensor({2}, {3.0, -1.0}), cfg);
    CHECK(s.s == 0.25);
    CHECK(s.predicted_class == 1);  // lowest index on ties
}

TEST_CASE("score: temperature never changes the predicted class") {
    BlobProblem p = two_blobs(25, 43);
    ClassifierModel m = train_classifier(p.xs, p.labels, fast_cfg(), InputScaler::identity());
    Rng rng(11);
    for (int it = 0; it < 200; ++it) {
        Tensor x({2}, {rng.uniform(-2, 8), rng.uniform(-2, 8)});
        DetectorConfig t1;
        t1.temperature = 1.0;
        t1.epsilon = 0.0;
        DetectorConfig t1000;
        t1000.temperature = 1000.0;
        t1000.epsilon = 0.0;
        CHECK(score(m, x, t1).predicted_class == score(m, x, t1000).predicted_class);
    }
}

TEST_CASE("detect: strict greater-than semantics") {
    AnomalyScore hi{0.9, 1, false};
    AnomalyScore mid{0.5, 1, false};
    AnomalyScore lo{0.2, 1, false};
    CHECK(detect(hi, 0.5) == 0);
    CHECK(detect(mid, 0.5) == 1);  // s == delta counts as abnormal
    CHECK(detect(lo, 0.5) == 1);
    CHECK_THROWS_AS(detect(hi, 1.5), std::invalid_argument);
}

TEST_CASE("detector config validation") {
    DetectorConfig bad;
    bad.temperature = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = DetectorConfig{};
    bad.epsilon = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
