#include "akgc/model.hpp"

#include "akgc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace akgc {

namespace {

TensorView view(const char* name, Mat& m) {
    return TensorView{name, m.data(),
                      {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}};
}

TensorView view(const char* name, Vec& v) {
    return TensorView{name, v.data(), {static_cast<std::uint64_t>(v.size())}};
}

TensorView view(const char* name, double& s) { return TensorView{name, &s, {1}}; }

} // namespace

std::vector<TensorView> tensor_views(Model& model) {
    return {
        view("anchors.A", model.anchors.A),
        view("anchors.T", model.anchors.T),
        view("anchors.R", model.anchors.R),
        view("encoder.token_table", model.enc.token_table),
        view("encoder.sep", model.enc.sep_vector),
        view("encoder.position_table", model.enc.position_table),
        view("encoder.W1", model.enc.W1),
        view("encoder.b1", model.enc.b1),
        view("encoder.W2", model.enc.W2),
        view("encoder.b2", model.enc.b2),
        view("encoder.anchor_proj", model.enc.anchor_proj),
        view("encoder.anchor_table", model.enc.anchor_table),
        view("projection.G", model.proj.G),
        view("projection.b", model.proj.b),
        view("temperature.log_tau", model.temperature.log_tau),
    };
}

std::vector<TensorView> tensor_views(ModelGrads& grads) {
    return {
        view("anchors.A", grads.A),
        view("anchors.T", grads.T),
        view("anchors.R", grads.R),
        view("encoder.token_table", grads.token_table),
        view("encoder.sep", grads.sep),
        view("encoder.position_table", grads.position_table),
        view("encoder.W1", grads.W1),
        view("encoder.b1", grads.b1),
        view("encoder.W2", grads.W2),
        view("encoder.b2", grads.b2),
        view("encoder.anchor_proj", grads.anchor_proj),
        view("encoder.anchor_table", grads.anchor_table),
        view("projection.G", grads.G),
        view("projection.b", grads.g_b),
        view("temperature.log_tau", grads.log_tau),
    };
}

Model build_model(const TrainConfig& config, const KnowledgeGraph& graph) {
    validate(config);
    const std::int32_t V = graph.num_entities();
    const std::int32_t num_relations = graph.num_relations();
    if (V < 1 || num_relations < 1) {
        throw std::invalid_argument("build_model: graph has no entities or relations");
    }

    Model model;
    if (config.anchor_init == AnchorInit::Random) {
        model.anchors = init_random(V, config.n_anchors, config.d_structure, num_relations,
                                    derive_seed(config.seed, "anchors"));
    } else {
        if (V < config.n_anchors) {
            throw std::invalid_argument("build_model: k-means anchor init needs at least " +
                                        std::to_string(config.n_anchors) + " entities, graph has " +
                                        std::to_string(V));
        }
        const TextFeatures features =
            text_feature_matrix(graph, config.d_structure, config.hash_vocab);
        const KMeansResult km = init_kmeans(features.rows, config.n_anchors, config.kmeans_iters,
                                            derive_seed(config.seed, "kmeans"));
        model.anchors.A = km.centroids;
        model.anchors.T = fit_transform(features.rows, model.anchors.A, config.ridge);
        const double b = 6.0 / std::sqrt(static_cast<double>(config.d_structure));
        Rng rng(derive_seed(config.seed, "relations"));
        model.anchors.R.resize(num_relations, config.d_structure);
        for (Eigen::Index i = 0; i < model.anchors.R.rows(); ++i) {
            for (Eigen::Index j = 0; j < model.anchors.R.cols(); ++j) {
                model.anchors.R(i, j) = rng.uniform(-b, b);
            }
        }
    }
    model.enc = init_encoder(config.hash_vocab, config.max_len, config.d_unified,
                             config.d_structure, config.n_anchors, config.tie_anchors,
                             derive_seed(config.seed, "encoder"));
    model.proj =
        init_projection(config.d_structure, config.d_unified, derive_seed(config.seed, "projection"));
    model.temperature = make_temperature(config.tau_init);
    return model;
}

} // namespace akgc
