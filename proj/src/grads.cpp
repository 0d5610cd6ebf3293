#include "akgc/grads.hpp"

namespace akgc {

void GradBuffer::init(const AnchorDecomposition& anchors, const EncoderParams& enc,
                      const ProjectionHead& proj) {
    A = Mat::Zero(anchors.A.rows(), anchors.A.cols());
    R = Mat::Zero(anchors.R.rows(), anchors.R.cols());
    position_table = Mat::Zero(enc.position_table.rows(), enc.position_table.cols());
    W1 = Mat::Zero(enc.W1.rows(), enc.W1.cols());
    W2 = Mat::Zero(enc.W2.rows(), enc.W2.cols());
    anchor_proj = Mat::Zero(enc.anchor_proj.rows(), enc.anchor_proj.cols());
    anchor_table = Mat::Zero(enc.anchor_table.rows(), enc.anchor_table.cols());
    G = Mat::Zero(proj.G.rows(), proj.G.cols());
    sep = Vec::Zero(enc.sep_vector.size());
    b1 = Vec::Zero(enc.b1.size());
    b2 = Vec::Zero(enc.b2.size());
    g_b = Vec::Zero(proj.b.size());
    log_tau = 0.0;
    T_rows.clear();
    token_rows.clear();
}

void GradBuffer::clear() {
    A.setZero();
    R.setZero();
    position_table.setZero();
    W1.setZero();
    W2.setZero();
    anchor_proj.setZero();
    anchor_table.setZero();
    G.setZero();
    sep.setZero();
    b1.setZero();
    b2.setZero();
    g_b.setZero();
    log_tau = 0.0;
    T_rows.clear();
    token_rows.clear();
}

Vec& GradBuffer::t_row(std::int32_t entity, Eigen::Index n) {
    auto it = T_rows.find(entity);
    if (it == T_rows.end()) it = T_rows.emplace(entity, Vec::Zero(n)).first;
    return it->second;
}

Vec& GradBuffer::token_row(std::int32_t token, Eigen::Index d) {
    auto it = token_rows.find(token);
    if (it == token_rows.end()) it = token_rows.emplace(token, Vec::Zero(d)).first;
    return it->second;
}

void ModelGrads::init(const AnchorDecomposition& anchors, const EncoderParams& enc,
                      const ProjectionHead& proj) {
    A = Mat::Zero(anchors.A.rows(), anchors.A.cols());
    T = Mat::Zero(anchors.T.rows(), anchors.T.cols());
    R = Mat::Zero(anchors.R.rows(), anchors.R.cols());
    token_table = Mat::Zero(enc.token_table.rows(), enc.token_table.cols());
    position_table = Mat::Zero(enc.position_table.rows(), enc.position_table.cols());
    W1 = Mat::Zero(enc.W1.rows(), enc.W1.cols());
    W2 = Mat::Zero(enc.W2.rows(), enc.W2.cols());
    anchor_proj = Mat::Zero(enc.anchor_proj.rows(), enc.anchor_proj.cols());
    anchor_table = Mat::Zero(enc.anchor_table.rows(), enc.anchor_table.cols());
    G = Mat::Zero(proj.G.rows(), proj.G.cols());
    sep = Vec::Zero(enc.sep_vector.size());
    b1 = Vec::Zero(enc.b1.size());
    b2 = Vec::Zero(enc.b2.size());
    g_b = Vec::Zero(proj.b.size());
    log_tau = 0.0;
}

void ModelGrads::set_zero() {
    A.setZero();
    T.setZero();
    R.setZero();
    token_table.setZero();
    position_table.setZero();
    W1.setZero();
    W2.setZero();
    anchor_proj.setZero();
    anchor_table.setZero();
    G.setZero();
    sep.setZero();
    b1.setZero();
    b2.setZero();
    g_b.setZero();
    log_tau = 0.0;
}

void ModelGrads::add(const GradBuffer& chunk) {
    A += chunk.A;
    R += chunk.R;
    position_table += chunk.position_table;
    W1 += chunk.W1;
    W2 += chunk.W2;
    anchor_proj += chunk.anchor_proj;
    anchor_table += chunk.anchor_table;
    G += chunk.G;
    sep += chunk.sep;
    b1 += chunk.b1;
    b2 += chunk.b2;
    g_b += chunk.g_b;
    log_tau += chunk.log_tau;
    for (const auto& [entity, row] : chunk.T_rows) T.row(entity) += row.transpose();
    for (const auto& [token, row] : chunk.token_rows) token_table.row(token) += row.transpose();
}

void ModelGrads::scale(double factor) {
    A *= factor;
    T *= factor;
    R *= factor;
    token_table *= factor;
    position_table *= factor;
    W1 *= factor;
    W2 *= factor;
    anchor_proj *= factor;
    anchor_table *= factor;
    G *= factor;
    sep *= factor;
    b1 *= factor;
    b2 *= factor;
    g_b *= factor;
    log_tau *= factor;
}

bool ModelGrads::all_finite() const {
    const auto ok = [](const auto& m) { return m.allFinite(); };
    return ok(A) && ok(T) && ok(R) && ok(token_table) && ok(position_table) && ok(W1) && ok(W2) &&
           ok(anchor_proj) && ok(anchor_table) && ok(G) && ok(sep) && ok(b1) && ok(b2) && ok(g_b) &&
           std::isfinite(log_tau);
}

} // namespace akgc
