#include "akgc/sampling.hpp"

#include "akgc/rng.hpp"

namespace akgc {

NegativeBatch build_negatives(std::span<const Triple> batch, std::int32_t num_train_entities,
                              const FilterIndex& train_filter, NegativeMode mode,
                              bool mask_false_negatives, std::uint64_t seed) {
    const std::size_t B = batch.size();
    if (B < 2) {
        throw std::invalid_argument("build_negatives: need a batch of at least 2 queries");
    }
    if (num_train_entities < 1) {
        throw std::invalid_argument("build_negatives: no training entities to draw from");
    }

    NegativeBatch out;
    out.queries.assign(batch.begin(), batch.end());

    if (mode == NegativeMode::InBatchPlusUniform) {
        Rng rng(seed);
        out.uniform_ids.resize(B);
        for (auto& id : out.uniform_ids) {
            id = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_train_entities)));
        }
    }

    const std::size_t per_query = (B - 1) + out.uniform_ids.size();
    out.negative_ids.assign(B, {});
    out.mask.assign(B, {});
    for (std::size_t q = 0; q < B; ++q) {
        auto& ids = out.negative_ids[q];
        auto& mask = out.mask[q];
        ids.reserve(per_query);
        for (std::size_t other = 0; other < B; ++other) {
            if (other != q) ids.push_back(batch[other].tail);
        }
        ids.insert(ids.end(), out.uniform_ids.begin(), out.uniform_ids.end());
        mask.resize(ids.size());
        const Triple& query = batch[q];
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const bool gold = ids[i] == query.tail;
            const bool known =
                mask_false_negatives && train_filter.contains(query.head, query.relation, ids[i]);
            mask[i] = (gold || known) ? 1 : 0;
        }
    }
    return out;
}

} // namespace akgc
