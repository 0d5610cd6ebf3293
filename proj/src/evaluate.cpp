#include "akgc/evaluate.hpp"

#include "akgc/encoder.hpp"
#include "akgc/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace akgc {

void rerank_scores(std::span<double> scores, std::int32_t head, const NeighborIndex& neighbors,
                   double alpha, double beta, bool unseen_head) {
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const auto candidate = static_cast<std::int32_t>(t);
        const bool in_khop =
            unseen_head ? candidate == head : neighbors.contains(head, candidate);
        if (in_khop) scores[t] += alpha;
        if (candidate == head) scores[t] -= beta;
    }
}

std::uint32_t filtered_rank(std::span<const double> scores, std::int32_t gold, std::int32_t head,
                            std::int32_t relation, const FilterIndex& filter) {
    if (gold < 0 || static_cast<std::size_t>(gold) >= scores.size()) {
        throw std::out_of_range("filtered_rank: gold candidate not in the score vector");
    }
    const double gold_score = scores[static_cast<std::size_t>(gold)];
    std::uint32_t rank = 1;
    for (std::size_t t = 0; t < scores.size(); ++t) {
        const auto candidate = static_cast<std::int32_t>(t);
        if (candidate == gold) continue;
        if (filter.contains(head, relation, candidate)) continue; // known true: filtered out
        if (scores[t] >= gold_score) ++rank;                      // ties count against gold
    }
    return rank;
}

Evaluator::Evaluator(const PreparedData& data, const Model& model, const TrainConfig& config,
                     int threads)
    : data_(data),
      model_(model),
      config_(config),
      threads_(resolve_threads(threads)),
      inductive_(data.graph.mode == GraphMode::Inductive) {
    const std::int32_t C =
        inductive_ ? data_.graph.num_inductive_entities() : data_.graph.num_entities();
    if (C < 1) throw std::invalid_argument("no candidate entities to evaluate against");
    cand_tu_.resize(C, model_.enc.d_unified());
    cand_gt_.resize(C, model_.proj.G.rows());
    const std::size_t n_chunks = chunk_count(static_cast<std::size_t>(C));
    parallel_chunks(n_chunks, threads_, [&](std::size_t c) {
        const auto [lo, hi] = chunk_range(static_cast<std::size_t>(C), n_chunks, c);
        for (std::size_t e = lo; e < hi; ++e) {
            const auto entity = static_cast<std::int32_t>(e);
            const Vec t_u =
                encode_entity(data_.graph, entity, model_.anchors.A, model_.enc, inductive_);
            cand_tu_.row(entity) = t_u.transpose();
            cand_gt_.row(entity) = project(model_.proj, t_u).transpose();
        }
    });
}

std::vector<double> Evaluator::score_all(std::int32_t head, std::int32_t relation) const {
    const Vec c_u =
        encode_context(data_.graph, head, relation, model_.anchors.A, model_.enc, inductive_);
    const Vec g_c = project(model_.proj, c_u);
    const double c_norm = c_u.norm();
    if (c_norm == 0.0) throw std::invalid_argument("score_all: zero-norm context embedding");
    std::vector<double> scores(static_cast<std::size_t>(cand_tu_.rows()));
    for (Eigen::Index t = 0; t < cand_tu_.rows(); ++t) {
        const double t_norm = cand_tu_.row(t).norm();
        if (t_norm == 0.0) throw std::invalid_argument("score_all: zero-norm tail embedding");
        const double cos = cand_tu_.row(t).dot(c_u) / (c_norm * t_norm);
        const double misalign = (g_c.transpose() - cand_gt_.row(t)).squaredNorm();
        scores[static_cast<std::size_t>(t)] = cos - config_.lambda * misalign;
    }
    return scores;
}

std::vector<std::pair<double, std::int32_t>> Evaluator::rank_candidates(
    std::int32_t head, std::int32_t relation) const {
    std::vector<double> scores = score_all(head, relation);
    rerank_scores(scores, head, data_.neighbors, config_.alpha, config_.beta, inductive_);
    std::vector<std::pair<double, std::int32_t>> ranked(scores.size());
    for (std::size_t t = 0; t < scores.size(); ++t) {
        ranked[t] = {scores[t], static_cast<std::int32_t>(t)};
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    return ranked;
}

RankingReport Evaluator::evaluate(Split split) const {
    if (inductive_ && split == Split::Train) {
        throw std::invalid_argument(
            "train split is not evaluable in inductive mode: candidates are the held-out "
            "vocabulary and train triples index the training one");
    }
    const std::vector<Triple>& queries = data_.graph.split(split);
    if (queries.empty()) {
        throw std::invalid_argument(std::string("cannot evaluate empty split '") +
                                    split_name(split) + "'");
    }
    RankingReport report;
    report.ranks.resize(queries.size());
    const std::size_t n_chunks = chunk_count(queries.size());
    parallel_chunks(n_chunks, threads_, [&](std::size_t c) {
        const auto [lo, hi] = chunk_range(queries.size(), n_chunks, c);
        for (std::size_t q = lo; q < hi; ++q) {
            const Triple& query = queries[q];
            std::vector<double> scores = score_all(query.head, query.relation);
            rerank_scores(scores, query.head, data_.neighbors, config_.alpha, config_.beta,
                          inductive_);
            report.ranks[q] =
                filtered_rank(scores, query.tail, query.head, query.relation, data_.filter);
        }
    });

    std::map<std::int32_t, RelationErrors> by_relation;
    const auto tally = [](DirectionMetrics& m, std::uint32_t rank) {
        m.mrr += 1.0 / static_cast<double>(rank);
        m.hits1 += rank <= 1 ? 1.0 : 0.0;
        m.hits3 += rank <= 3 ? 1.0 : 0.0;
        m.hits10 += rank <= 10 ? 1.0 : 0.0;
        ++m.count;
    };
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const std::uint32_t rank = report.ranks[q];
        const std::int32_t relation = queries[q].relation;
        tally(report.all, rank);
        tally(relation < data_.graph.raw_relation_count ? report.forward : report.inverse, rank);
        auto& rel = by_relation[relation];
        rel.relation = relation;
        ++rel.total;
        if (rank > 1) ++rel.errors;
    }
    const auto finish = [](DirectionMetrics& m) {
        if (m.count == 0) return;
        const double n = static_cast<double>(m.count);
        m.mrr /= n;
        m.hits1 /= n;
        m.hits3 /= n;
        m.hits10 /= n;
    };
    finish(report.all);
    finish(report.forward);
    finish(report.inverse);
    report.relations.reserve(by_relation.size());
    for (const auto& [relation, errors] : by_relation) report.relations.push_back(errors);
    return report;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void metric_block(std::ostringstream& out, const char* prefix, const DirectionMetrics& m) {
    out << prefix << ".mrr = " << fmt(m.mrr) << '\n'
        << prefix << ".hits1 = " << fmt(m.hits1) << '\n'
        << prefix << ".hits3 = " << fmt(m.hits3) << '\n'
        << prefix << ".hits10 = " << fmt(m.hits10) << '\n'
        << prefix << ".count = " << m.count << '\n';
}

} // namespace

std::string report_table(const RankingReport& report) {
    std::ostringstream out;
    char line[160];
    out << "split        MRR    Hits@1  Hits@3  Hits@10  queries\n";
    const auto row = [&](const char* name, const DirectionMetrics& m) {
        std::snprintf(line, sizeof line, "%-9s %7.4f  %6.4f  %6.4f  %7.4f  %7zu\n", name, m.mrr,
                      m.hits1, m.hits3, m.hits10, m.count);
        out << line;
    };
    row("all", report.all);
    if (report.forward.count > 0) row("forward", report.forward);
    if (report.inverse.count > 0) row("inverse", report.inverse);
    return out.str();
}

std::string report_metrics_text(const RankingReport& report) {
    std::ostringstream out;
    metric_block(out, "all", report.all);
    metric_block(out, "forward", report.forward);
    metric_block(out, "inverse", report.inverse);
    return out.str();
}

std::string report_relation_csv(const RankingReport& report) {
    std::ostringstream out;
    out << "relation_id,errors,total\n";
    for (const auto& rel : report.relations) {
        out << rel.relation << ',' << rel.errors << ',' << rel.total << '\n';
    }
    return out.str();
}

} // namespace akgc
