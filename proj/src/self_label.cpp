#include "clad/self_label.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "clad/optimizer.hpp"
#include "clad/rng.hpp"
#include "clad/serialize.hpp"

namespace clad {

using nlohmann::json;

void ClusterModel::validate() const {
    if (centroids.rank() != 2 || k() < 2) {
        throw std::invalid_argument("cluster model: need at least 2 centroids");
    }
    centroids.check_finite("cluster centroids");
    for (std::size_t a = 0; a < k(); ++a) {
        for (std::size_t b = a + 1; b < k(); ++b) {
            double d2 = 0.0;
            for (std::size_t t = 0; t < dim(); ++t) {
                double d = centroids.at2(a, t) - centroids.at2(b, t);
                d2 += d * d;
            }
            if (d2 <= 1e-18) {  // 1e-9 in euclidean distance
                throw std::invalid_argument("cluster model: centroids " + std::to_string(a) + " and " +
                                            std::to_string(b) + " coincide");
            }
        }
    }
}

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
    double acc = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
        double diff = a[t] - b[t];
        acc += diff * diff;
    }
    return acc;
}

struct LloydResult {
    Tensor centroids;
    double inertia = std::numeric_limits<double>::infinity();
};

LloydResult lloyd_run(const Tensor& z, std::size_t k, Rng& rng, std::size_t max_iters) {
    std::size_t n = z.dim(0), d = z.dim(1);
    const double* zp = z.data.data();

    // k-means++ seeding
    Tensor centroids({k, d});
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.index(n);
    std::copy(zp + first * d, zp + (first + 1) * d, centroids.data.begin());
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double dist = sq_dist(zp + i * d, centroids.data.data() + (c - 1) * d, d);
            min_d2[i] = std::min(min_d2[i], dist);
            total += min_d2[i];
        }
        std::size_t chosen;
        if (total <= 0.0) {
            chosen = rng.index(n);  // all remaining points coincide with chosen centroids
        } else {
            double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += min_d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        std::copy(zp + chosen * d, zp + (chosen + 1) * d, centroids.data.begin() + c * d);
    }

    std::vector<std::size_t> assign(n, k);
    std::vector<std::size_t> counts(k);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(zp + i * d, centroids.data.data(), d);
            for (std::size_t c = 1; c < k; ++c) {
                double dist = sq_dist(zp + i * d, centroids.data.data() + c * d, d);
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            ++counts[best];
        }
        // empty clusters grab the point farthest from its assigned centroid
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[assign[i]] <= 1) continue;
                double dist = sq_dist(zp + i * d, centroids.data.data() + assign[i] * d, d);
                if (dist > far_d) {
                    far_d = dist;
                    far = i;
                }
            }
            --counts[assign[far]];
            assign[far] = c;
            counts[c] = 1;
            changed = true;
        }
        if (!changed && iter > 0) break;
        Tensor sums({k, d});
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.data.data() + assign[i] * d;
            const double* zi = zp + i * d;
            for (std::size_t t = 0; t < d; ++t) s[t] += zi[t];
        }
        for (std::size_t c = 0; c < k; ++c) {
            double inv = 1.0 / static_cast<double>(counts[c]);
            for (std::size_t t = 0; t < d; ++t) centroids.at2(c, t) = sums.at2(c, t) * inv;
        }
    }

    LloydResult r;
    r.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            best = std::min(best, sq_dist(zp + i * d, centroids.data.data() + c * d, d));
        }
        r.inertia += best;
    }
    r.centroids = std::move(centroids);
    return r;
}

std::size_t count_distinct_rows(const Tensor& z) {
    std::size_t n = z.dim(0), d = z.dim(1);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const double* zp = z.data.data();
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(zp + a * d, zp + (a + 1) * d, zp + b * d, zp + (b + 1) * d);
    });
    std::size_t distinct = n == 0 ? 0 : 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (!std::equal(zp + idx[i] * d, zp + (idx[i] + 1) * d, zp + idx[i - 1] * d)) ++distinct;
    }
    return distinct;
}

}  // namespace

ClusterModel init_centroids(const Tensor& features, std::size_t k, std::uint64_t seed,
                            std::size_t restarts, std::size_t max_iters) {
    if (features.rank() != 2) {
        throw std::invalid_argument("init_centroids: features must be (N, dim), got " + features.shape_str());
    }
    if (k < 2) throw std::invalid_argument("init_centroids: cluster count must be at least 2");
    std::size_t n = features.dim(0);
    if (n < k) {
        throw std::invalid_argument("init_centroids: " + std::to_string(n) + " samples for " +
                                    std::to_string(k) + " clusters");
    }
    if (count_distinct_rows(features) < k) {
        throw std::invalid_argument("init_centroids: fewer than " + std::to_string(k) + " distinct points");
    }
    if (restarts == 0) restarts = 1;

    LloydResult best;
    for (std::size_t r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, "kmeans-restart-" + std::to_string(r)));
        LloydResult run = lloyd_run(features, k, rng, max_iters);
        if (run.inertia < best.inertia) best = std::move(run);
    }
    ClusterModel model{std::move(best.centroids)};
    model.validate();
    return model;
}

Tensor soft_assign(const Tensor& features, const ClusterModel& model) {
    if (features.rank() != 2 || features.dim(1) != model.dim()) {
        throw std::invalid_argument("soft_assign: features " + features.shape_str() +
                                    " do not match centroid dimension " + std::to_string(model.dim()));
    }
    std::size_t n = features.dim(0), k = model.k(), d = model.dim();
    Tensor q({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = features.data.data() + i * d;
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double u = 1.0 / (1.0 + sq_dist(zi, model.centroids.data.data() + j * d, d));
            q.at2(i, j) = u;
            sum += u;
        }
        for (std::size_t j = 0; j < k; ++j) q.at2(i, j) /= sum;
    }
    return q;
}

Tensor soft_assign_row(const Tensor& z, const ClusterModel& model) {
    if (z.rank() != 1 || z.dim(0) != model.dim()) {
        throw std::invalid_argument("soft_assign_row: latent vector " + z.shape_str() +
                                    " does not match centroid dimension " + std::to_string(model.dim()));
    }
    Tensor q = soft_assign(Tensor({1, z.dim(0)}, z.data), model);
    return Tensor({model.k()}, std::move(q.data));
}

Tensor target_distribution(const Tensor& q) {
    if (q.rank() != 2) throw std::invalid_argument("target_distribution: q must be (N, K)");
    std::size_t n = q.dim(0), k = q.dim(1);
    std::vector<double> freq(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) freq[j] += q.at2(i, j);
    }
    Tensor p({n, k});
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double w = q.at2(i, j) * q.at2(i, j) / freq[j];
            p.at2(i, j) = w;
            sum += w;
        }
        for (std::size_t j = 0; j < k; ++j) p.at2(i, j) /= sum;
    }
    return p;
}

double kl_loss(const Tensor& p, const Tensor& q) {
    if (p.shape != q.shape) {
        throw std::invalid_argument("kl_loss: shape mismatch " + p.shape_str() + " vs " + q.shape_str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < p.numel(); ++i) {
        if (p[i] <= 0.0) continue;  // 0 log 0 := 0
        acc += p[i] * (std::log(std::max(p[i], 1e-12)) - std::log(std::max(q[i], 1e-12)));
    }
    return acc;
}

KlGradients kl_gradients(const Tensor& features, const Tensor& centroids, const Tensor& p) {
    if (features.rank() != 2 || centroids.rank() != 2 || features.dim(1) != centroids.dim(1)) {
        throw std::invalid_argument("kl_gradients: incompatible feature/centroid shapes");
    }
    std::size_t n = features.dim(0), k = centroids.dim(0), d = features.dim(1);
    if (p.shape != std::vector<std::size_t>{n, k}) {
        throw std::invalid_argument("kl_gradients: target distribution must be (N, K)");
    }

    KlGradients out;
    out.feature_grad = Tensor({n, d});
    out.centroid_grad = Tensor({k, d});

    std::vector<double> u(k), qr(k);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = features.data.data() + i * d;
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            u[j] = 1.0 / (1.0 + sq_dist(zi, centroids.data.data() + j * d, d));
            s += u[j];
        }
        for (std::size_t j = 0; j < k; ++j) {
            qr[j] = u[j] / s;
            double pij = p.at2(i, j);
            if (pij > 0.0) {
                out.loss += pij * (std::log(std::max(pij, 1e-12)) - std::log(std::max(qr[j], 1e-12)));
            }
        }
        // dL/d(dist2_ij) = -u^2 (1 - p/q) / s; chain through dist2 to z and mu
        for (std::size_t j = 0; j < k; ++j) {
            double dl_du = (1.0 - p.at2(i, j) / qr[j]) / s;
            double coeff = -2.0 * u[j] * u[j] * dl_du;
            const double* mu = centroids.data.data() + j * d;
            double* gz = out.feature_grad.data.data() + i * d;
            double* gm = out.centroid_grad.data.data() + j * d;
            for (std::size_t t = 0; t < d; ++t) {
                double diff = zi[t] - mu[t];
                gz[t] += coeff * diff;
                gm[t] -= coeff * diff;
            }
        }
    }
    return out;
}

double KlClusterLoss::value(const Tensor& output) const {
    ClusterModel m{centroids_};
    return kl_loss(p_, soft_assign(output, m));
}

Tensor KlClusterLoss::output_grad(const Tensor& output) const {
    return kl_gradients(output, centroids_, p_).feature_grad;
}

std::vector<Tensor> KlClusterLoss::param_grads(const Tensor& output) const {
    std::vector<Tensor> g;
    g.push_back(kl_gradients(output, centroids_, p_).centroid_grad);
    return g;
}

RefineResult refine(AutoencoderModel& ae, ClusterModel& model, const std::vector<Tensor>& x_tr,
                    const RefineConfig& cfg) {
    if (x_tr.empty()) throw std::invalid_argument("refine: empty training set");
    if (cfg.batch_size == 0) throw std::invalid_argument("refine: batch size must be positive");
    model.validate();

    std::size_t n = x_tr.size(), k = model.k();
    std::vector<Tensor> scaled;
    scaled.reserve(n);
    for (const Tensor& x : x_tr) scaled.push_back(ae.scaler.apply(x));

    std::vector<Tensor*> params = ae.encoder.parameters();
    params.push_back(&model.centroids);

    Optimizer opt({.algo = OptAlgo::sgd_momentum,
                   .learning_rate = cfg.learning_rate,
                   .momentum = cfg.momentum});
    Rng shuffle_rng(derive_seed(cfg.seed, "refine-shuffle"));

    RefineResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Tensor z = eval_forward_value(ae.encoder, stack_batch(scaled));
        z = Tensor({n, ae.hidden_dim}, std::move(z.data));
        Tensor q = soft_assign(z, model);

        // epoch-boundary empty-cluster handling
        std::vector<std::size_t> hard_counts(k, 0);
        std::vector<std::size_t> argmax(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < k; ++j) {
                if (q.at2(i, j) > q.at2(i, best)) best = j;
            }
            argmax[i] = best;
            ++hard_counts[best];
        }
        bool reseeded = false;
        for (std::size_t j = 0; j < k; ++j) {
            if (hard_counts[j] != 0) continue;
            std::size_t weakest = 0;
            double weakest_max = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                double mx = q.at2(i, argmax[i]);
                if (mx < weakest_max) {
                    weakest_max = mx;
                    weakest = i;
                }
            }
            for (std::size_t t = 0; t < model.dim(); ++t) {
                model.centroids.at2(j, t) = z.at2(weakest, t);
            }
            reseeded = true;
        }
        if (reseeded) {
            result.reseeds.push_back(epoch);
            q = soft_assign(z, model);
        }

        Tensor p = target_distribution(q);
        result.kl_history.push_back(kl_loss(p, q));

        std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            std::size_t end = std::min(start + cfg.batch_size, n);
            std::vector<std::size_t> idx(order.begin() + start, order.begin() + end);

            ForwardResult enc = eval_forward(ae.encoder, stack_batch(scaled, idx));
            Tensor zb({idx.size(), ae.hidden_dim}, std::move(enc.output.data));
            Tensor pb({idx.size(), k});
            for (std::size_t r = 0; r < idx.size(); ++r) {
                for (std::size_t j = 0; j < k; ++j) pb.at2(r, j) = p.at2(idx[r], j);
            }

            KlGradients kg = kl_gradients(zb, model.centroids, pb);
            Tensor out_grad(enc.trace.output_shape, std::move(kg.feature_grad.data));
            BackwardResult br = backward(ae.encoder, enc.trace, out_grad);

            std::vector<Tensor> grads = std::move(br.param_grads);
            grads.push_back(std::move(kg.centroid_grad));
            opt.step(params, grads);
        }
        model.centroids.check_finite("refined centroids");
    }
    return result;
}

PseudoLabels assign_pseudo_labels(const AutoencoderModel& ae, const ClusterModel& model,
                                  const std::vector<Tensor>& x_tr) {
    if (x_tr.empty()) throw std::invalid_argument("assign_pseudo_labels: empty sample list");
    Tensor z = encode_batch(ae, x_tr);
    Tensor q = soft_assign(z, model);
    PseudoLabels out;
    out.label_count = model.k();
    out.cluster_counts.assign(model.k(), 0);
    out.labels.reserve(x_tr.size());
    for (std::size_t i = 0; i < x_tr.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < model.k(); ++j) {
            if (q.at2(i, j) > q.at2(i, best)) best = j;  // ties keep the lowest index
        }
        out.labels.push_back(static_cast<int>(best) + 1);
        ++out.cluster_counts[best];
    }
    return out;
}

void export_pseudo_labels_csv(const PseudoLabels& labels, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "sample_index,pseudo_label\n";
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        out << i << "," << labels.labels[i] << "\n";
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

PseudoLabels import_pseudo_labels_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("sample_index,", 0) != 0) {
        throw std::runtime_error("'" + path + "': missing pseudo-label CSV header");
    }
    PseudoLabels out;
    int max_label = 0;
    std::size_t expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t idx;
        char comma;
        int label;
        if (!(ss >> idx >> comma >> label) || comma != ',') {
            throw std::runtime_error("'" + path + "': malformed row '" + line + "'");
        }
        if (idx != expected) {
            throw std::runtime_error("'" + path + "': sample indices must be consecutive from 0");
        }
        ++expected;
        if (label < 1) throw std::runtime_error("'" + path + "': pseudo-labels are 1-based");
        out.labels.push_back(label);
        max_label = std::max(max_label, label);
    }
    out.label_count = static_cast<std::size_t>(max_label);
    out.cluster_counts.assign(out.label_count, 0);
    for (int l : out.labels) ++out.cluster_counts[static_cast<std::size_t>(l - 1)];
    return out;
}

json cluster_model_to_json(const ClusterModel& m) {
    return json{{"format", "clad-model"},
                {"kind", "clusters"},
                {"version", 1},
                {"centroids", tensor_to_json(m.centroids)}};
}

ClusterModel cluster_model_from_json(const json& j) {
    if (j.value("kind", "") != "clusters") throw std::runtime_error("not a cluster container");
    return ClusterModel{tensor_from_json(j.at("centroids"))};
}

}  // namespace clad
