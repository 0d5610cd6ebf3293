#pragma once

#include "akgc/dataset.hpp"
#include "akgc/linalg.hpp"
#include "akgc/text.hpp"

#include <cstdint>

namespace akgc {

using text::TokenSequence;

struct GradBuffer;

// One shared parameter set encodes contexts (head + relation) and tails alike.
// Anchor slots at the front of every sequence are filled either from the live
// anchor matrix through `anchor_proj` (tied, the default) or from the
// independent `anchor_table` (untied).
struct EncoderParams {
    Mat token_table;    // H×D_u hashed text tokens
    Vec sep_vector;     // D_u separator embedding
    Mat position_table; // max_len×D_u learned positions
    Mat W1;             // D_u×D_u per-token transform
    Vec b1;
    Mat W2;             // D_u×D_u output head
    Vec b2;
    Mat anchor_proj;    // D_u×D_s, maps structure-space anchors into the encoder
    Mat anchor_table;   // N×D_u, used instead of anchor_proj·A when untied
    bool tie_anchors = true;

    Eigen::Index d_unified() const { return W1.rows(); }
    Eigen::Index max_len() const { return position_table.rows(); }
    Eigen::Index hash_vocab() const { return token_table.rows(); }
    Eigen::Index n_anchors() const { return anchor_table.rows(); }
};

EncoderParams init_encoder(std::int32_t hash_vocab, std::int32_t max_len, std::int32_t d_unified,
                           std::int32_t d_structure, std::int32_t n_anchors, bool tie_anchors,
                           std::uint64_t seed);

// Activations kept from a traced forward pass; inputs are cheap to rebuild
// from the sequence, so only the post-tanh matrix is stored.
struct SequenceTrace {
    TokenSequence seq;
    Mat y;      // L×D_u
    Vec pooled; // D_u
};

// x_p = token vector + position_table[p]; y_p = tanh(W1·x_p + b1);
// output = W2·mean_p(y_p) + b2.
Vec embed_sequence(const TokenSequence& seq, const Mat& A, const EncoderParams& p);
Vec embed_sequence_traced(const TokenSequence& seq, const Mat& A, const EncoderParams& p,
                          SequenceTrace& trace);
// Accumulates d(out)·upstream into the gradient buffer, including the anchor
// rows of A when anchors are tied.
void embed_sequence_backward(const SequenceTrace& trace, const Mat& A, const EncoderParams& p,
                             const Vec& d_out, GradBuffer& grads);

// Context c_u over [anchors ++ head text ++ SEP ++ relation text]; tail t_u
// over [anchors ++ tail text]. `inductive` selects the held-out vocabulary.
TokenSequence context_sequence(const KnowledgeGraph& graph, std::int32_t head,
                               std::int32_t relation, const EncoderParams& p,
                               bool inductive = false);
TokenSequence entity_sequence(const KnowledgeGraph& graph, std::int32_t entity,
                              const EncoderParams& p, bool inductive = false);
Vec encode_context(const KnowledgeGraph& graph, std::int32_t head, std::int32_t relation,
                   const Mat& A, const EncoderParams& p, bool inductive = false);
Vec encode_entity(const KnowledgeGraph& graph, std::int32_t entity, const Mat& A,
                  const EncoderParams& p, bool inductive = false);

// cos(a, b) = a·b / (‖a‖‖b‖). Zero-norm inputs are an error.
double cosine(const Vec& a, const Vec& b);
// Accumulates upstream·∂cos/∂a and upstream·∂cos/∂b.
double cosine_grad(const Vec& a, const Vec& b, double upstream, Vec& d_a, Vec& d_b);

// Linear map g(·) from unified space into structure space.
struct ProjectionHead {
    Mat G; // D_s×D_u
    Vec b; // D_s
};

ProjectionHead init_projection(std::int32_t d_structure, std::int32_t d_unified,
                               std::uint64_t seed);

Vec project(const ProjectionHead& g, const Vec& x);
// d_x accumulates Gᵀ·d_out; G/b gradients go into the buffer.
void project_backward(const ProjectionHead& g, const Vec& x, const Vec& d_out, GradBuffer& grads,
                      Vec& d_x);

// Contrastive temperature, trained through its logarithm so it stays positive.
struct Temperature {
    double log_tau = 0.0;
    double tau() const;
};

Temperature make_temperature(double initial_tau);

} // namespace akgc
