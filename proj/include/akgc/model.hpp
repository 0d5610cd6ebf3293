#pragma once

#include "akgc/anchors.hpp"
#include "akgc/config.hpp"
#include "akgc/encoder.hpp"
#include "akgc/grads.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace akgc {

struct Model {
    AnchorDecomposition anchors;
    EncoderParams enc;
    ProjectionHead proj;
    Temperature temperature;
};

// Stable name + shape + storage for one parameter tensor. The enumeration
// order is fixed; checkpoints and the optimizer both rely on it.
struct TensorView {
    std::string name;
    double* data = nullptr;
    std::vector<std::uint64_t> dims;

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }
};

std::vector<TensorView> tensor_views(Model& model);
// Gradient tensors, same names/order/shapes as the model's.
std::vector<TensorView> tensor_views(ModelGrads& grads);

// Anchors per config (random, or k-means over hashed text features with the
// transformation recovered by least squares), encoder, projection head, and
// temperature. All randomness derives from config.seed.
Model build_model(const TrainConfig& config, const KnowledgeGraph& graph);

} // namespace akgc
