#pragma once

#include "akgc/anchors.hpp"
#include "akgc/encoder.hpp"
#include "akgc/linalg.hpp"

#include <cstdint>
#include <map>

namespace akgc {

// Per-chunk gradient accumulator. Small parameter groups are dense; the two
// row-sparse groups (entity weights T and the hashed token table) collect only
// touched rows, keyed by std::map so reduction order is deterministic.
struct GradBuffer {
    Mat A;
    Mat R;
    Mat position_table;
    Mat W1, W2;
    Mat anchor_proj;
    Mat anchor_table;
    Mat G;
    Vec sep, b1, b2, g_b;
    double log_tau = 0.0;
    std::map<std::int32_t, Vec> T_rows;     // entity -> d(T row), length N
    std::map<std::int32_t, Vec> token_rows; // token id -> d(token_table row), length D_u

    void init(const AnchorDecomposition& anchors, const EncoderParams& enc,
              const ProjectionHead& proj);
    void clear();

    Vec& t_row(std::int32_t entity, Eigen::Index n);
    Vec& token_row(std::int32_t token, Eigen::Index d);
};

// Dense whole-model gradient, reduced from chunk buffers in chunk order so the
// result is bit-identical for any thread count.
struct ModelGrads {
    Mat A, T, R;
    Mat token_table, position_table;
    Mat W1, W2;
    Mat anchor_proj, anchor_table;
    Mat G;
    Vec sep, b1, b2, g_b;
    double log_tau = 0.0;

    void init(const AnchorDecomposition& anchors, const EncoderParams& enc,
              const ProjectionHead& proj);
    void set_zero();
    void add(const GradBuffer& chunk);
    void scale(double factor);
    bool all_finite() const;
};

} // namespace akgc
