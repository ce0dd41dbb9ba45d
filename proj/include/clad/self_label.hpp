#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "clad/autoencoder.hpp"
#include "clad/losses.hpp"

namespace clad {

/// K cluster centroids in latent space, stored as one (K, hidden_dim) tensor
/// so refinement can treat them as a single trainable parameter.
struct ClusterModel {
    Tensor centroids;

    std::size_t k() const { return centroids.rank() == 2 ? centroids.dim(0) : 0; }
    std::size_t dim() const { return centroids.rank() == 2 ? centroids.dim(1) : 0; }

    /// Enforces: k >= 2, finite centroids, no two centroids within 1e-9.
    void validate() const;
};

/// k-means with k-means++ seeding; the best of `restarts` runs by inertia.
/// Deterministic given the seed. Requires at least K distinct rows.
ClusterModel init_centroids(const Tensor& features, std::size_t k, std::uint64_t seed,
                            std::size_t restarts = 20, std::size_t max_iters = 100);

/// Student-t similarity with one degree of freedom: q_j proportional to
/// (1 + ||z - mu_j||^2)^-1, normalized per row. `features` is (N, dim).
Tensor soft_assign(const Tensor& features, const ClusterModel& model);
/// Single latent vector variant; returns a length-K row.
Tensor soft_assign_row(const Tensor& z, const ClusterModel& model);

/// Sharpened target: p_ij = (q_ij^2 / f_j) / sum_j'(q_ij'^2 / f_j'), f_j = sum_i q_ij.
Tensor target_distribution(const Tensor& q);

/// sum_ij p_ij log(p_ij / q_ij) with 0 log 0 := 0; q clamped at 1e-12 before the log.
double kl_loss(const Tensor& p, const Tensor& q);

struct KlGradients {
    double loss = 0.0;
    Tensor feature_grad;   // dL/dZ, shape (N, dim)
    Tensor centroid_grad;  // dL/dCentroids, shape (K, dim)
};

/// Loss and analytic gradients of kl_loss(P, soft_assign(Z)) w.r.t. Z and the centroids.
KlGradients kl_gradients(const Tensor& features, const Tensor& centroids, const Tensor& p);

/// Adapter exposing the clustering objective to grad_check: the network output
/// is taken as the latent features; the centroids are the loss's own parameter.
class KlClusterLoss final : public LossFn {
public:
    KlClusterLoss(Tensor target_p, Tensor centroids)
        : p_(std::move(target_p)), centroids_(std::move(centroids)) {}
    std::string name() const override { return "kl_clustering"; }
    double value(const Tensor& output) const override;
    Tensor output_grad(const Tensor& output) const override;
    std::vector<Tensor*> params() override { return {&centroids_}; }
    std::vector<Tensor> param_grads(const Tensor& output) const override;
    const Tensor& centroids() const { return centroids_; }

private:
    Tensor p_;
    Tensor centroids_;
};

struct RefineConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 256;
    std::uint64_t seed = 1;
};

struct RefineResult {
    std::vector<double> kl_history;      // objective over the full set at each epoch start
    std::vector<std::size_t> reseeds;    // epochs at which an empty cluster was reseeded
};

/// Joint gradient descent on the KL objective over encoder parameters and
/// centroids. The target distribution is recomputed once per epoch. A cluster
/// with zero hard assignments at an epoch boundary is reseeded at the sample
/// with the lowest max-membership.
RefineResult refine(AutoencoderModel& ae, ClusterModel& model, const std::vector<Tensor>& x_tr,
                    const RefineConfig& cfg);

struct PseudoLabels {
    std::vector<int> labels;                  // values in 1..label_count
    std::size_t label_count = 0;              // L == K
    std::vector<std::size_t> cluster_counts;  // per-label sample counts
};

/// y*_i = argmax_j q_ij; ties resolve to the lowest cluster index.
PseudoLabels assign_pseudo_labels(const AutoencoderModel& ae, const ClusterModel& model,
                                  const std::vector<Tensor>& x_tr);

void export_pseudo_labels_csv(const PseudoLabels& labels, const std::string& path);
PseudoLabels import_pseudo_labels_csv(const std::string& path);

nlohmann::json cluster_model_to_json(const ClusterModel& m);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

}  // namespace clad
