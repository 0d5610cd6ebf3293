#pragma once

#include "akgc/config.hpp"
#include "akgc/dataset.hpp"
#include "akgc/model.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace akgc {

struct DirectionMetrics {
    double mrr = 0.0;
    double hits1 = 0.0;
    double hits3 = 0.0;
    double hits10 = 0.0;
    std::size_t count = 0;
};

struct RelationErrors {
    std::int32_t relation = 0;
    std::uint64_t errors = 0; // queries with rank > 1
    std::uint64_t total = 0;
};

struct RankingReport {
    DirectionMetrics all;
    DirectionMetrics forward; // base relations
    DirectionMetrics inverse; // inverse-augmented relations
    std::vector<RelationErrors> relations; // ascending relation id
    std::vector<std::uint32_t> ranks;      // per query, split order
};

// score'(t) = score(t) + alpha·1[t ∈ E_k(head)] − beta·1[t = head]. For an
// unseen head (no training edges) the k-hop set degenerates to {head}.
void rerank_scores(std::span<double> scores, std::int32_t head, const NeighborIndex& neighbors,
                   double alpha, double beta, bool unseen_head);

// Filtered rank of the gold candidate: competitors known true for (head,
// relation) are removed, ties count against gold.
std::uint32_t filtered_rank(std::span<const double> scores, std::int32_t gold, std::int32_t head,
                            std::int32_t relation, const FilterIndex& filter);

// Scores every candidate tail for one (head, relation) query and ranks the
// split. Candidate embeddings (t_u and g(t_u)) are computed once at
// construction; queries never touch the structure branch, so inductive
// evaluation works against a model whose entity weights were dropped.
class Evaluator {
public:
    Evaluator(const PreparedData& data, const Model& model, const TrainConfig& config,
              int threads = 1);

    std::int32_t num_candidates() const { return static_cast<std::int32_t>(cand_tu_.rows()); }

    // score(t) = cos(c_u, t_u) − lambda·‖g(c_u) − g(t_u)‖², before re-ranking.
    std::vector<double> score_all(std::int32_t head, std::int32_t relation) const;
    // score_all + the re-ranking rule, sorted descending (ties by entity id).
    std::vector<std::pair<double, std::int32_t>> rank_candidates(std::int32_t head,
                                                                 std::int32_t relation) const;

    RankingReport evaluate(Split split) const;

private:
    const PreparedData& data_;
    const Model& model_;
    TrainConfig config_;
    int threads_;
    bool inductive_;
    Mat cand_tu_; // C×D_u
    Mat cand_gt_; // C×D_s
};

std::string report_table(const RankingReport& report);
// Flat `metric = value` lines, full precision, no timestamps.
std::string report_metrics_text(const RankingReport& report);
// "relation_id,errors,total" rows.
std::string report_relation_csv(const RankingReport& report);

} // namespace akgc
