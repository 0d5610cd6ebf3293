#pragma once

#include "akgc/grads.hpp"
#include "akgc/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace akgc {

struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<double> values; // row-major
};

// Little-endian binary container (magic "AKGC"): format version, step
// counter, config snapshot, RNG state, then length-prefixed named tensors.
// Any subset of tensors is a valid file; anchor-only exports and full
// training checkpoints share the format.
struct Checkpoint {
    std::uint64_t step = 0;
    std::string config_text;
    std::string rng_state;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(std::string_view name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

// Captures every model tensor under its stable name.
Checkpoint snapshot_model(Model& model, std::uint64_t step, const std::string& config_text,
                          const std::string& rng_state);
// Adds optimizer-moment tensors under `prefix` ("adam.m." / "adam.v.").
void append_tensors(Checkpoint& ckpt, ModelGrads& grads, const std::string& prefix);

// Copies stored tensors back into the model, resizing to the stored shapes.
// With require_all, every model tensor must be present (anchors.T exempt when
// drop_entity_weights is set). drop_entity_weights leaves T physically empty —
// the inductive serving view. Unknown names (e.g. optimizer moments) are
// ignored here.
void restore_model(const Checkpoint& ckpt, Model& model, bool require_all = true,
                   bool drop_entity_weights = false);

// Restores "adam.m."/"adam.v." tensors into moment buffers already shaped
// like the model. Returns false when the checkpoint holds no moments.
bool restore_moments(const Checkpoint& ckpt, ModelGrads& m, ModelGrads& v);

} // namespace akgc
