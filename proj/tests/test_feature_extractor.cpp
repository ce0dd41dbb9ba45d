#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "clad/autoencoder.hpp"
#include "clad/rng.hpp"
#include "clad/serialize.hpp"

using namespace clad;

namespace {

std::vector<Tensor> repeated_point(std::size_t n) {
    Tensor p({5}, {0.1, 0.7, 0.3, 0.9, 0.5});
    return std::vector<Tensor>(n, p);
}

std::vector<Tensor> blob_cloud(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Tensor> xs;
    for (std::size_t i = 0; i < n; ++i) {
        Tensor t({6});
        double center = (i % 2 == 0) ? 0.25 : 0.75;
        for (double& v : t.data) v = center + 0.05 * rng.normal();
        xs.push_back(std::move(t));
    }
    return xs;
}

AutoencoderConfig tiny_cfg() {
    AutoencoderConfig cfg;
    cfg.hidden_dim = 4;
    cfg.mlp_width = 16;
    cfg.epochs = 10;
    cfg.batch_size = 16;
    cfg.dropout_keep = 1.0;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("defaults follow the published recipe") {
    AutoencoderConfig cfg;
    CHECK(cfg.hidden_dim == 100);
    CHECK(cfg.epochs == 100);
    CHECK(cfg.optimizer == OptAlgo::adam);
    CHECK(cfg.learning_rate == 0.01);
}

TEST_CASE("overfits a single repeated point") {
    AutoencoderConfig cfg = tiny_cfg();
    cfg.epochs = 200;
    AutoencoderModel m = train_autoencoder(repeated_point(32), cfg);
    REQUIRE(m.loss_history.size() == 200);
    CHECK(m.loss_history.back() < 1e-3);
}

TEST_CASE("learning rate zero leaves parameters untouched and the loss flat") {
    AutoencoderConfig cfg = tiny_cfg();
    cfg.learning_rate = 0.0;
    cfg.epochs = 0;
    AutoencoderModel fresh = train_autoencoder(blob_cloud(40, 3), cfg);
    cfg.epochs = 5;
    AutoencoderModel trained = train_autoencoder(blob_cloud(40, 3), cfg);

    auto pf = fresh.encoder.parameters();
    auto pt = trained.encoder.parameters();
    REQUIRE(pf.size() == pt.size());
    for (std::size_t i = 0; i < pf.size(); ++i) CHECK(pf[i]->data == pt[i]->data);

    REQUIRE(trained.loss_history.size() == 5);
    for (double l : trained.loss_history) CHECK(l == trained.loss_history.front());
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(train_autoencoder({}, tiny_cfg()), std::invalid_argument);
    std::vector<Tensor> mixed = {Tensor({3}), Tensor({4})};
    CHECK_THROWS_WITH_AS(train_autoencoder(mixed, tiny_cfg()), doctest::Contains("shape"),
                         std::invalid_argument);
}

TEST_CASE("encode: deterministic, right length, shape-checked") {
    AutoencoderModel m = train_autoencoder(blob_cloud(30, 5), tiny_cfg());
    Tensor x({6}, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
    Tensor z1 = encode(m, x);
    Tensor z2 = encode(m, x);
    CHECK(z1.shape == std::vector<std::size_t>{4});
    CHECK(z1.data == z2.data);
    CHECK_THROWS_AS(encode(m, Tensor({5})), std::invalid_argument);

    Tensor zb = encode_batch(m, {x, x});
    CHECK(zb.shape == std::vector<std::size_t>{2, 4});
    for (std::size_t t = 0; t < 4; ++t) CHECK(zb.at2(0, t) == z1[t]);
}

TEST_CASE("hidden dimension sweeps across the published range") {
    for (std::size_t h : {10u, 55u, 100u}) {
        AutoencoderConfig cfg = tiny_cfg();
        cfg.hidden_dim = h;
        cfg.epochs = 1;
        AutoencoderModel m = train_autoencoder(blob_cloud(20, 9), cfg);
        CHECK(encode(m, blob_cloud(1, 1)[0]).numel() == h);
    }
}

TEST_CASE("loss history: smoothed monotone decrease on a real cloud") {
    AutoencoderConfig cfg = tiny_cfg();
    cfg.epochs = 30;
    AutoencoderModel m = train_autoencoder(blob_cloud(120, 11), cfg);
    REQUIRE(m.loss_history.size() == 30);
    auto avg = [&](std::size_t from) {
        return std::accumulate(m.loss_history.begin() + from, m.loss_history.begin() + from + 5, 0.0) / 5.0;
    };
    CHECK(avg(25) <= avg(0));
}

TEST_CASE("scaler is fitted on training data and replayed by encode") {
    Rng rng(13);
    std::vector<Tensor> xs;
    for (int i = 0; i < 25; ++i) {
        Tensor t({4});
        for (double& v : t.data) v = rng.uniform(-2.0, 3.0);
        xs.push_back(std::move(t));
    }
    AutoencoderConfig cfg = tiny_cfg();
    cfg.epochs = 2;
    AutoencoderModel m = train_autoencoder(xs, cfg);
    CHECK(m.scaler.lo >= -2.0);
    CHECK(m.scaler.hi <= 3.0);
    CHECK(m.scaler.hi > m.scaler.lo);

    // encode == forward(encoder, scaled x)
    Tensor x = xs[7];
    Tensor z = encode(m, x);
    Tensor manual = eval_forward_value(m.encoder, stack_batch({m.scaler.apply(x)}));
    CHECK(z.data == manual.data);
}

TEST_CASE("model container round-trips exactly") {
    AutoencoderModel m = train_autoencoder(blob_cloud(30, 17), tiny_cfg());
    std::string path = "ae_roundtrip.json";
    save_json_file(autoencoder_to_json(m), path);
    AutoencoderModel loaded = autoencoder_from_json(load_json_file(path));
    Tensor x = blob_cloud(1, 23)[0];
    CHECK(encode(m, x).data == encode(loaded, x).data);
    CHECK(loaded.loss_history == m.loss_history);
    std::remove(path.c_str());
}

TEST_CASE("conv preset trains and encodes image-shaped samples") {
    Rng rng(19);
    std::vector<Tensor> imgs;
    for (int i = 0; i < 12; ++i) {
        Tensor t({9, 9});
        for (double& v : t.data) v = rng.uniform();
        imgs.push_back(std::move(t));
    }
    AutoencoderConfig cfg = tiny_cfg();
    cfg.arch = ArchPreset::conv;
    cfg.epochs = 2;
    cfg.dropout_keep = 0.9;
    AutoencoderModel m = train_autoencoder(imgs, cfg);
    CHECK(encode(m, imgs[0]).numel() == cfg.hidden_dim);
}
