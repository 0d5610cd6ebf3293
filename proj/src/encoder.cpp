#include "akgc/encoder.hpp"

#include "akgc/grads.hpp"
#include "akgc/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace akgc {

using text::Tag;
using text::build_sequence;

namespace {

void fill_uniform(Mat& m, Rng& rng, double bound) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
    }
}

void fill_uniform(Vec& v, Rng& rng, double bound) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

double glorot_bound(Eigen::Index fan_in, Eigen::Index fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Token-vector half of x_p (position embedding added by the caller).
Vec token_part(const TokenSequence& seq, std::size_t p, const Mat& A, const EncoderParams& params) {
    const std::int32_t id = seq.ids[p];
    switch (seq.tags[p]) {
        case Tag::Anchor:
            if (id < 0 || id >= params.anchor_table.rows()) {
                throw std::out_of_range("anchor slot index " + std::to_string(id) + " out of range");
            }
            if (params.tie_anchors) {
                if (id >= A.rows()) {
                    throw std::out_of_range("anchor matrix has no row " + std::to_string(id));
                }
                return params.anchor_proj * A.row(id).transpose();
            }
            return params.anchor_table.row(id).transpose();
        case Tag::Separator:
            return params.sep_vector;
        default:
            if (id < 0 || id >= params.token_table.rows()) {
                throw std::out_of_range("token id " + std::to_string(id) +
                                        " outside the hashed vocabulary");
            }
            return params.token_table.row(id).transpose();
    }
}

Mat input_matrix(const TokenSequence& seq, const Mat& A, const EncoderParams& params) {
    const auto L = static_cast<Eigen::Index>(seq.size());
    if (L == 0) throw std::invalid_argument("cannot encode an empty sequence");
    if (L > params.max_len()) {
        throw std::invalid_argument("sequence length " + std::to_string(L) +
                                    " exceeds the position table (" +
                                    std::to_string(params.max_len()) + ")");
    }
    Mat x(L, params.d_unified());
    for (Eigen::Index p = 0; p < L; ++p) {
        x.row(p) = token_part(seq, static_cast<std::size_t>(p), A, params).transpose() +
                   params.position_table.row(p);
    }
    return x;
}

} // namespace

EncoderParams init_encoder(std::int32_t hash_vocab, std::int32_t max_len, std::int32_t d_unified,
                           std::int32_t d_structure, std::int32_t n_anchors, bool tie_anchors,
                           std::uint64_t seed) {
    if (hash_vocab < 2 || max_len < 1 || d_unified < 1 || d_structure < 1 || n_anchors < 1) {
        throw std::invalid_argument("init_encoder: all dimensions must be positive (hash_vocab >= 2)");
    }
    Rng rng(seed);
    EncoderParams p;
    p.tie_anchors = tie_anchors;
    const double emb = 0.05; // embeddings start small so tanh stays near-linear
    p.token_table.resize(hash_vocab, d_unified);
    fill_uniform(p.token_table, rng, emb);
    p.sep_vector.resize(d_unified);
    fill_uniform(p.sep_vector, rng, emb);
    p.position_table.resize(max_len, d_unified);
    fill_uniform(p.position_table, rng, emb);
    p.W1.resize(d_unified, d_unified);
    fill_uniform(p.W1, rng, glorot_bound(d_unified, d_unified));
    p.b1 = Vec::Zero(d_unified);
    p.W2.resize(d_unified, d_unified);
    fill_uniform(p.W2, rng, glorot_bound(d_unified, d_unified));
    p.b2 = Vec::Zero(d_unified);
    p.anchor_proj.resize(d_unified, d_structure);
    fill_uniform(p.anchor_proj, rng, glorot_bound(d_structure, d_unified));
    p.anchor_table.resize(n_anchors, d_unified);
    fill_uniform(p.anchor_table, rng, emb);
    return p;
}

Vec embed_sequence(const TokenSequence& seq, const Mat& A, const EncoderParams& p) {
    const Mat x = input_matrix(seq, A, p);
    const Mat y = ((x * p.W1.transpose()).rowwise() + p.b1.transpose()).array().tanh();
    const Vec pooled = y.colwise().mean().transpose();
    return p.W2 * pooled + p.b2;
}

Vec embed_sequence_traced(const TokenSequence& seq, const Mat& A, const EncoderParams& p,
                          SequenceTrace& trace) {
    const Mat x = input_matrix(seq, A, p);
    trace.seq = seq;
    trace.y = ((x * p.W1.transpose()).rowwise() + p.b1.transpose()).array().tanh();
    trace.pooled = trace.y.colwise().mean().transpose();
    return p.W2 * trace.pooled + p.b2;
}

void embed_sequence_backward(const SequenceTrace& trace, const Mat& A, const EncoderParams& p,
                             const Vec& d_out, GradBuffer& grads) {
    const auto L = static_cast<Eigen::Index>(trace.seq.size());
    const Eigen::Index d = p.d_unified();
    const Mat x = input_matrix(trace.seq, A, p); // rebuilt rather than stored

    grads.b2 += d_out;
    grads.W2 += d_out * trace.pooled.transpose();
    const Vec d_pooled = p.W2.transpose() * d_out;

    // d(pre-activation) row p = (d_pooled / L) ∘ (1 − y_p²)
    Mat d_pre = (1.0 - trace.y.array().square()).matrix();
    d_pre.array().rowwise() *= (d_pooled.transpose() / static_cast<double>(L)).array();

    grads.b1 += d_pre.colwise().sum().transpose();
    grads.W1 += d_pre.transpose() * x;
    const Mat d_x = d_pre * p.W1;

    for (Eigen::Index pos = 0; pos < L; ++pos) {
        const Vec d_xp = d_x.row(pos).transpose();
        grads.position_table.row(pos) += d_xp.transpose();
        const std::int32_t id = trace.seq.ids[static_cast<std::size_t>(pos)];
        switch (trace.seq.tags[static_cast<std::size_t>(pos)]) {
            case Tag::Anchor:
                if (p.tie_anchors) {
                    grads.anchor_proj += d_xp * A.row(id);
                    grads.A.row(id) += (p.anchor_proj.transpose() * d_xp).transpose();
                } else {
                    grads.anchor_table.row(id) += d_xp.transpose();
                }
                break;
            case Tag::Separator:
                grads.sep += d_xp;
                break;
            default:
                grads.token_row(id, d) += d_xp;
                break;
        }
    }
}

TokenSequence context_sequence(const KnowledgeGraph& graph, std::int32_t head,
                               std::int32_t relation, const EncoderParams& p, bool inductive) {
    if (relation < 0 || relation >= graph.num_relations()) {
        throw std::out_of_range("relation index " + std::to_string(relation) + " out of range");
    }
    const EntityRecord& rec = graph.entity_record(head, inductive);
    const std::string& rel_text = graph.relations[static_cast<std::size_t>(relation)].name;
    return build_sequence(rec.name, rec.description, &rel_text,
                          static_cast<std::int32_t>(p.n_anchors()),
                          static_cast<std::int32_t>(p.max_len()),
                          static_cast<std::int32_t>(p.hash_vocab()));
}

TokenSequence entity_sequence(const KnowledgeGraph& graph, std::int32_t entity,
                              const EncoderParams& p, bool inductive) {
    const EntityRecord& rec = graph.entity_record(entity, inductive);
    return build_sequence(rec.name, rec.description, nullptr,
                          static_cast<std::int32_t>(p.n_anchors()),
                          static_cast<std::int32_t>(p.max_len()),
                          static_cast<std::int32_t>(p.hash_vocab()));
}

Vec encode_context(const KnowledgeGraph& graph, std::int32_t head, std::int32_t relation,
                   const Mat& A, const EncoderParams& p, bool inductive) {
    return embed_sequence(context_sequence(graph, head, relation, p, inductive), A, p);
}

Vec encode_entity(const KnowledgeGraph& graph, std::int32_t entity, const Mat& A,
                  const EncoderParams& p, bool inductive) {
    return embed_sequence(entity_sequence(graph, entity, p, inductive), A, p);
}

double cosine(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero-norm input");
    return a.dot(b) / (na * nb);
}

double cosine_grad(const Vec& a, const Vec& b, double upstream, Vec& d_a, Vec& d_b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_grad: dimension mismatch");
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_grad: zero-norm input");
    const double inv = 1.0 / (na * nb);
    const double c = a.dot(b) * inv;
    d_a += upstream * (b * inv - (c / (na * na)) * a);
    d_b += upstream * (a * inv - (c / (nb * nb)) * b);
    return c;
}

ProjectionHead init_projection(std::int32_t d_structure, std::int32_t d_unified,
                               std::uint64_t seed) {
    if (d_structure < 1 || d_unified < 1) {
        throw std::invalid_argument("init_projection: dimensions must be positive");
    }
    Rng rng(seed);
    ProjectionHead g;
    g.G.resize(d_structure, d_unified);
    fill_uniform(g.G, rng, glorot_bound(d_unified, d_structure));
    g.b = Vec::Zero(d_structure);
    return g;
}

Vec project(const ProjectionHead& g, const Vec& x) {
    if (x.size() != g.G.cols()) throw std::invalid_argument("project: dimension mismatch");
    return g.G * x + g.b;
}

void project_backward(const ProjectionHead& g, const Vec& x, const Vec& d_out, GradBuffer& grads,
                      Vec& d_x) {
    if (x.size() != g.G.cols() || d_out.size() != g.G.rows()) {
        throw std::invalid_argument("project_backward: dimension mismatch");
    }
    grads.G += d_out * x.transpose();
    grads.g_b += d_out;
    d_x += g.G.transpose() * d_out;
}

double Temperature::tau() const { return std::exp(log_tau); }

Temperature make_temperature(double initial_tau) {
    if (!(initial_tau > 0.0)) {
        throw std::invalid_argument("temperature must be strictly positive");
    }
    return Temperature{std::log(initial_tau)};
}

} // namespace akgc
