#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "clad/grad_check.hpp"
#include "clad/losses.hpp"
#include "clad/network.hpp"
#include "clad/optimizer.hpp"
#include "clad/serialize.hpp"

using namespace clad;

namespace {

Network dense_net(Tensor w, Tensor b) {
    Network net;
    net.add(std::make_unique<DenseLayer>(std::move(w), std::move(b)));
    return net;
}

Network small_mlp(std::uint64_t seed, std::size_t in = 4, std::size_t hidden = 5, std::size_t out = 3) {
    Rng rng(seed);
    Network net;
    net.add(std::make_unique<DenseLayer>(in, hidden, rng));
    net.add(std::make_unique<ReluLayer>());
    net.add(std::make_unique<DenseLayer>(hidden, out, rng));
    return net;
}

Tensor random_batch(Rng& rng, std::vector<std::size_t> shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = rng.normal();
    return t;
}

}  // namespace

TEST_CASE("dense forward matches independent matrix multiply") {
    Network net = dense_net(Tensor::matrix(2, 2, {1, 2, 3, 4}), Tensor::row({0, 0}));
    Tensor x({1, 2}, {1, 1});
    Tensor y = forward_value(net, x);
    CHECK(y.shape == std::vector<std::size_t>{1, 2});
    // oracle: y_j = sum_k W[j][k] * x[k]
    double w[2][2] = {{1, 2}, {3, 4}};
    for (std::size_t j = 0; j < 2; ++j) {
        double acc = 0;
        for (std::size_t k = 0; k < 2; ++k) acc += w[j][k] * 1.0;
        CHECK(y[j] == doctest::Approx(acc));
    }
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(7.0));
}

TEST_CASE("eval mode forward is deterministic, including dropout nets") {
    Rng rng(7);
    Network net;
    net.add(std::make_unique<DenseLayer>(3, 4, rng));
    net.add(std::make_unique<DropoutLayer>(0.5));
    net.add(std::make_unique<SigmoidLayer>());
    net.set_mode(Mode::eval);
    Tensor x = random_batch(rng, {2, 3});
    Tensor y1 = forward_value(net, x);
    Tensor y2 = forward_value(net, x);
    CHECK(y1.data == y2.data);
}

TEST_CASE("relu definition") {
    Network net;
    net.add(std::make_unique<ReluLayer>());
    Tensor y = forward_value(net, Tensor({1, 3}, {-1, 0, 2}));
    CHECK(y.data == std::vector<double>{0, 0, 2});
}

TEST_CASE("composition error names the offending layer") {
    Rng rng(1);
    Network net;
    net.add(std::make_unique<DenseLayer>(3, 4, rng));
    net.add(std::make_unique<DenseLayer>(5, 2, rng));  // does not compose with width 4
    Tensor x({1, 3}, {1, 2, 3});
    CHECK_THROWS_WITH_AS(forward_value(net, x),
                         doctest::Contains("layer 1"), std::invalid_argument);
}

TEST_CASE("purely linear net: input gradient is the composed transpose action") {
    Tensor w1 = Tensor::matrix(2, 3, {1, -2, 0.5, 3, 1, -1});
    Tensor w2 = Tensor::matrix(2, 2, {2, 0, -1, 1});
    Network net;
    net.add(std::make_unique<DenseLayer>(w1, Tensor::row({0.3, -0.7})));
    net.add(std::make_unique<DenseLayer>(w2, Tensor::row({1, 1})));
    Tensor x({1, 3}, {0.2, -0.4, 0.9});
    ForwardResult fr = forward(net, x);
    Tensor g({1, 2}, {0.6, -1.2});
    BackwardResult br = backward(net, fr.trace, g);
    // expected: W1^T (W2^T g)
    double mid[2] = {0, 0};
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t j = 0; j < 2; ++j) mid[k] += w2.at2(j, k) * g[j];
    }
    for (std::size_t k = 0; k < 3; ++k) {
        double expect = 0;
        for (std::size_t j = 0; j < 2; ++j) expect += w1.at2(j, k) * mid[j];
        CHECK(br.input_grad[k] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("zero output gradient yields zero gradients everywhere") {
    Network net = small_mlp(3);
    Rng rng(11);
    Tensor x = random_batch(rng, {2, 4});
    ForwardResult fr = forward(net, x);
    BackwardResult br = backward(net, fr.trace, Tensor(fr.output.shape));
    for (const Tensor& g : br.param_grads) {
        for (double v : g.data) CHECK(v == 0.0);
    }
    for (double v : br.input_grad.data) CHECK(v == 0.0);
}

TEST_CASE("backward rejects a mismatched trace") {
    Network net = small_mlp(5);
    Network other = small_mlp(6, 4, 7, 3);
    Rng rng(12);
    Tensor x = random_batch(rng, {1, 4});
    ForwardResult fr = forward(net, x);
    CHECK_THROWS_AS(backward(other, fr.trace, Tensor({1, 3})), std::invalid_argument);
    CHECK_THROWS_AS(backward(net, fr.trace, Tensor({1, 5})), std::invalid_argument);
}

// independent central-difference oracle, written against forward only
TEST_CASE("backward matches a test-local finite-difference oracle") {
    Network net = small_mlp(21);
    Rng data_rng(22);
    Tensor x = random_batch(data_rng, {3, 4});
    Tensor target = random_batch(data_rng, {3, 3});

    auto loss_at = [&]() { return mse_value(forward_value(net, x), target); };

    ForwardResult fr = forward(net, x);
    BackwardResult br = backward(net, fr.trace, mse_grad(fr.output, target));

    const double h = 1e-6;
    std::vector<Tensor*> params = net.parameters();
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        for (std::size_t k = 0; k < p.numel(); ++k) {
            double saved = p[k];
            p[k] = saved + h;
            double up = loss_at();
            p[k] = saved - h;
            double down = loss_at();
            p[k] = saved;
            double fd = (up - down) / (2 * h);
            double a = br.param_grads[i][k];
            worst = std::max(worst, std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-8}));
        }
    }
    for (std::size_t k = 0; k < x.numel(); ++k) {
        double saved = x[k];
        x[k] = saved + h;
        double up = loss_at();
        x[k] = saved - h;
        double down = loss_at();
        x[k] = saved;
        double fd = (up - down) / (2 * h);
        double a = br.input_grad[k];
        worst = std::max(worst, std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-8}));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("grad_check: dense+relu with MSE") {
    Network net = small_mlp(31);
    Rng rng(32);
    Tensor x = random_batch(rng, {2, 4});
    MseLoss loss(random_batch(rng, {2, 3}));
    CHECK(grad_check(net, loss, x, 1e-6) < 1e-4);
}

TEST_CASE("grad_check: identity net with zero loss is exactly zero") {
    Network net;  // no layers: output == input
    Rng rng(33);
    Tensor x = random_batch(rng, {2, 3});
    ZeroLoss loss;
    CHECK(grad_check(net, loss, x, 1e-6) == 0.0);
}

TEST_CASE("grad_check: conv2d single-channel with cross-entropy") {
    Rng rng(41);
    Network net;
    net.add(std::make_unique<Conv2dLayer>(1, 2, 3, 3, 1, rng));
    net.add(std::make_unique<ReluLayer>());
    net.add(std::make_unique<DenseLayer>(2 * 4 * 4, 3, rng));
    Tensor x = random_batch(rng, {2, 6, 6});
    CrossEntropyLoss loss({0, 2});
    CHECK(grad_check(net, loss, x, 1e-6) < 1e-4);
}

TEST_CASE("grad_check: every layer kind in one train-mode net, all losses") {
    for (std::uint64_t seed : {101u, 102u, 103u}) {
        Rng rng(seed);
        Network net;
        net.add(std::make_unique<Conv2dLayer>(1, 2, 3, 3, 2, rng));
        net.add(std::make_unique<ReluLayer>());
        net.add(std::make_unique<DenseLayer>(2 * 3 * 3, 6, rng));
        net.add(std::make_unique<SigmoidLayer>());
        net.add(std::make_unique<DropoutLayer>(0.8));
        net.add(std::make_unique<DenseLayer>(6, 3, rng));
        net.set_mode(Mode::train);
        Tensor x = random_batch(rng, {2, 7, 7});

        MseLoss mse(random_batch(rng, {2, 3}));
        CHECK(grad_check(net, mse, x, 1e-6, seed) < 1e-4);
        CrossEntropyLoss ce({1, 0});
        CHECK(grad_check(net, ce, x, 1e-6, seed) < 1e-4);
    }
}

TEST_CASE("optimizer: zero gradients leave parameters unchanged") {
    for (OptAlgo algo : {OptAlgo::sgd_momentum, OptAlgo::adam}) {
        Tensor theta({2}, {1.5, -2.0});
        Optimizer opt({.algo = algo, .learning_rate = 0.1});
        opt.step({&theta}, {Tensor({2})});
        CHECK(theta.data == std::vector<double>{1.5, -2.0});
    }
}

TEST_CASE("optimizer: plain SGD definition") {
    Tensor theta({1}, {1.0});
    Optimizer opt({.algo = OptAlgo::sgd_momentum, .learning_rate = 0.1, .momentum = 0.0});
    opt.step({&theta}, {Tensor({1}, {2.0})});
    CHECK(theta[0] == doctest::Approx(0.8));
}

TEST_CASE("optimizer: SGD momentum hand iteration") {
    // v1 = 1, theta = -0.1; v2 = 0.9 + 1 = 1.9, theta = -0.29
    Tensor theta({1}, {0.0});
    Optimizer opt({.algo = OptAlgo::sgd_momentum, .learning_rate = 0.1, .momentum = 0.9});
    opt.step({&theta}, {Tensor({1}, {1.0})});
    opt.step({&theta}, {Tensor({1}, {1.0})});
    CHECK(theta[0] == doctest::Approx(-0.29).epsilon(1e-12));
}

TEST_CASE("optimizer: adam first step moves by ~lr against the gradient sign") {
    Tensor theta({1}, {0.0});
    Optimizer opt({.algo = OptAlgo::adam, .learning_rate = 0.001});
    opt.step({&theta}, {Tensor({1}, {3.0})});
    // bias correction makes the first update lr * g/|g| up to eps
    CHECK(theta[0] == doctest::Approx(-0.001).epsilon(1e-6));
}

TEST_CASE("optimizer: shape mismatch is rejected") {
    Tensor theta({2});
    Optimizer opt({.algo = OptAlgo::sgd_momentum, .learning_rate = 0.1});
    CHECK_THROWS_AS(opt.step({&theta}, {Tensor({3})}), std::invalid_argument);
}

TEST_CASE("softmax: symmetry, closed form, high-temperature limit") {
    Tensor p = softmax_with_temperature(Tensor::row({0, 0}), 2.5);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));

    Tensor q = softmax_with_temperature(Tensor::row({2, 0}), 1.0);
    double e2 = std::exp(2.0);
    CHECK(q[0] == doctest::Approx(e2 / (e2 + 1)).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(1 / (e2 + 1)).epsilon(1e-12));

    Tensor r = softmax_with_temperature(Tensor::row({5, 1, 1}), 1000.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(r[i] - 1.0 / 3.0) < 1e-3);

    CHECK_THROWS_AS(softmax_with_temperature(Tensor::row({1, 2}), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(softmax_with_temperature(Tensor::row({1, 2}), -1.0), std::invalid_argument);
}

TEST_CASE("softmax: normalization and argmax invariance under fuzzing") {
    Rng rng(55);
    for (int it = 0; it < 500; ++it) {
        std::size_t n = 2 + rng.index(6);
        Tensor logits({n});
        for (double& v : logits.data) v = rng.uniform(-30, 30);
        double temps[] = {0.25, 1.0, 17.0, 1000.0};
        std::size_t base_argmax = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (logits[i] > logits[base_argmax]) base_argmax = i;
        }
        for (double t : temps) {
            Tensor p = softmax_with_temperature(logits, t);
            double sum = 0;
            std::size_t am = 0;
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(p[i] > 0.0);
                CHECK(p[i] < 1.0 + 1e-15);
                sum += p[i];
                if (p[i] > p[am]) am = i;
            }
            CHECK(std::fabs(sum - 1.0) < 1e-12);
            CHECK(am == base_argmax);
        }
    }
}

TEST_CASE("serialization round-trip preserves forward outputs exactly") {
    Rng rng(66);
    Network net;
    net.add(std::make_unique<Conv2dLayer>(1, 3, 3, 3, 2, rng));
    net.add(std::make_unique<ReluLayer>());
    net.add(std::make_unique<DenseLayer>(3 * 3 * 3, 8, rng));
    net.add(std::make_unique<SigmoidLayer>());
    net.add(std::make_unique<DropoutLayer>(0.75));
    net.add(std::make_unique<DenseLayer>(8, 4, rng));
    net.set_mode(Mode::eval);

    std::string path = "roundtrip_net.json";
    save_json_file(network_to_json(net), path);
    Network loaded = network_from_json(load_json_file(path));

    CHECK(loaded.layer_count() == net.layer_count());
    Tensor x = random_batch(rng, {2, 7, 7});
    Tensor y0 = forward_value(net, x);
    Tensor y1 = forward_value(loaded, x);
    CHECK(y0.shape == y1.shape);
    for (std::size_t i = 0; i < y0.numel(); ++i) CHECK(y0[i] == y1[i]);
    std::remove(path.c_str());
}

TEST_CASE("dropout: train-mode inverted scaling, eval identity") {
    Network net;
    net.add(std::make_unique<DropoutLayer>(0.5));
    Tensor x({1, 1000});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = 1.0;

    net.set_mode(Mode::eval);
    Tensor ye = forward_value(net, x);
    CHECK(ye.data == x.data);

    net.set_mode(Mode::train);
    CHECK_THROWS_AS(forward_value(net, x), std::invalid_argument);  // rng required
    Rng rng(77);
    Tensor yt = forward_value(net, x, &rng);
    std::size_t kept = 0;
    for (double v : yt.data) {
        CHECK((v == 0.0 || v == doctest::Approx(2.0)));
        if (v != 0.0) ++kept;
    }
    CHECK(kept > 400);
    CHECK(kept < 600);
}

TEST_CASE("dropout keep probability validated") {
    CHECK_THROWS_AS(DropoutLayer(0.0), std::invalid_argument);
    CHECK_THROWS_AS(DropoutLayer(1.2), std::invalid_argument);
}

TEST_CASE("seeded construction is reproducible") {
    Network a = small_mlp(99);
    Network b = small_mlp(99);
    auto pa = a.parameters(), pb = b.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}
