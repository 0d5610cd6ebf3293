#pragma once

#include "akgc/dataset.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace akgc {

enum class NegativeMode { InBatch, InBatchPlusUniform };

inline const char* negative_mode_name(NegativeMode m) {
    return m == NegativeMode::InBatch ? "in_batch" : "in_batch_plus_uniform";
}

inline NegativeMode parse_negative_mode(std::string_view name) {
    if (name == "in_batch") return NegativeMode::InBatch;
    if (name == "in_batch_plus_uniform") return NegativeMode::InBatchPlusUniform;
    throw std::invalid_argument("unknown negatives mode '" + std::string(name) +
                                "' (expected in_batch|in_batch_plus_uniform)");
}

// Per-query negatives: the other queries' gold tails, optionally followed by a
// block of uniform draws shared across the batch. mask[q][i] != 0 marks an
// entry that must contribute nothing downstream.
struct NegativeBatch {
    std::vector<Triple> queries;
    std::vector<std::vector<std::int32_t>> negative_ids;
    std::vector<std::vector<char>> mask;
    std::vector<std::int32_t> uniform_ids; // the shared uniform block (may be empty)
};

// A negative is masked when it equals the query's own gold tail, or — with
// `mask_false_negatives` — when (h, r, negative) is a known training triple.
// Duplicated uniform draws are kept (each occurrence weighs in separately).
NegativeBatch build_negatives(std::span<const Triple> batch, std::int32_t num_train_entities,
                              const FilterIndex& train_filter, NegativeMode mode,
                              bool mask_false_negatives, std::uint64_t seed);

} // namespace akgc
