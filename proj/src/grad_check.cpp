#include "clad/grad_check.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace clad {

namespace {

double relative_error(double a, double b) {
    double denom = std::max(std::max(std::fabs(a), std::fabs(b)), 1e-8);
    return std::fabs(a - b) / denom;
}

}  // namespace

double grad_check(Network& net, LossFn& loss, const Tensor& batch, double fd_step,
                  std::uint64_t rng_seed) {
    if (!(fd_step > 0.0)) throw std::invalid_argument("grad_check: fd_step must be positive");

    auto evaluate = [&](const Tensor& x) {
        Rng rng(rng_seed);
        return loss.value(forward_value(net, x, &rng));
    };

    // analytic pass
    Rng rng(rng_seed);
    ForwardResult fr = forward(net, batch, &rng);
    BackwardResult br = backward(net, fr.trace, loss.output_grad(fr.output));
    std::vector<Tensor> loss_grads = loss.param_grads(fr.output);

    double worst = 0.0;
    auto check_tensor = [&](Tensor& param, const Tensor& analytic, const Tensor& x) {
        for (std::size_t k = 0; k < param.numel(); ++k) {
            double saved = param[k];
            param[k] = saved + fd_step;
            double up = evaluate(x);
            param[k] = saved - fd_step;
            double down = evaluate(x);
            param[k] = saved;
            double fd = (up - down) / (2.0 * fd_step);
            worst = std::max(worst, relative_error(analytic[k], fd));
        }
    };

    std::vector<Tensor*> params = net.parameters();
    if (params.size() != br.param_grads.size()) {
        throw std::logic_error("grad_check: gradient count does not match parameter count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        check_tensor(*params[i], br.param_grads[i], batch);
    }

    std::vector<Tensor*> loss_params = loss.params();
    if (loss_params.size() != loss_grads.size()) {
        throw std::logic_error("grad_check: loss gradient count does not match loss parameter count");
    }
    for (std::size_t i = 0; i < loss_params.size(); ++i) {
        check_tensor(*loss_params[i], loss_grads[i], batch);
    }

    // input gradient
    Tensor x = batch;
    for (std::size_t k = 0; k < x.numel(); ++k) {
        double saved = x[k];
        x[k] = saved + fd_step;
        double up = evaluate(x);
        x[k] = saved - fd_step;
        double down = evaluate(x);
        x[k] = saved;
        double fd = (up - down) / (2.0 * fd_step);
        worst = std::max(worst, relative_error(br.input_grad[k], fd));
    }
    return worst;
}

}  // namespace clad
