#pragma once

#include "akgc/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace akgc {

// Structure-space triple scorers. Higher score = more plausible; the
// translational/rotational families return negated distances so that all four
// share that convention. Complex-valued models use a split-half layout:
// x[0..D/2) is the real part, x[D/2..D) the imaginary part. RotatE relations
// store rotation phases (radians) in the first half; the second half is
// unused and receives zero gradient.
enum class KgeModel { TransE, DistMult, ComplEx, RotatE };

inline const char* kge_model_name(KgeModel m) {
    switch (m) {
        case KgeModel::TransE: return "transe";
        case KgeModel::DistMult: return "distmult";
        case KgeModel::ComplEx: return "complex";
        case KgeModel::RotatE: return "rotate";
    }
    return "?";
}

inline KgeModel parse_kge_model(std::string_view name) {
    if (name == "transe") return KgeModel::TransE;
    if (name == "distmult") return KgeModel::DistMult;
    if (name == "complex") return KgeModel::ComplEx;
    if (name == "rotate") return KgeModel::RotatE;
    throw std::invalid_argument("unknown structure scorer '" + std::string(name) +
                                "' (expected transe|distmult|complex|rotate)");
}

template <typename Scalar>
using KgeVec = Eigen::Vector<Scalar, Eigen::Dynamic>;

namespace detail {

template <typename DH, typename DR, typename DT>
void check_kge_dims(KgeModel model, const Eigen::MatrixBase<DH>& h, const Eigen::MatrixBase<DR>& r,
                    const Eigen::MatrixBase<DT>& t) {
    if (h.size() != r.size() || h.size() != t.size()) {
        throw std::invalid_argument("kge_score: h/r/t dimension mismatch");
    }
    if ((model == KgeModel::ComplEx || model == KgeModel::RotatE) && h.size() % 2 != 0) {
        throw std::invalid_argument("kge_score: complex-valued scorers need an even dimension");
    }
}

} // namespace detail

template <typename DH, typename DR, typename DT>
typename DH::Scalar kge_score(KgeModel model, const Eigen::MatrixBase<DH>& h,
                              const Eigen::MatrixBase<DR>& r, const Eigen::MatrixBase<DT>& t) {
    using Scalar = typename DH::Scalar;
    detail::check_kge_dims(model, h, r, t);
    const Eigen::Index d = h.size();
    const Eigen::Index half = d / 2;
    switch (model) {
        case KgeModel::TransE:
            return -(h + r - t).norm();
        case KgeModel::DistMult:
            return h.cwiseProduct(r).dot(t);
        case KgeModel::ComplEx: {
            const auto hr = h.head(half), hi = h.tail(half);
            const auto rr = r.head(half), ri = r.tail(half);
            const auto tr = t.head(half), ti = t.tail(half);
            return (hr.cwiseProduct(rr) - hi.cwiseProduct(ri)).dot(tr) +
                   (hr.cwiseProduct(ri) + hi.cwiseProduct(rr)).dot(ti);
        }
        case KgeModel::RotatE: {
            const auto hr = h.head(half), hi = h.tail(half);
            const auto theta = r.head(half);
            const KgeVec<Scalar> c = theta.array().cos();
            const KgeVec<Scalar> s = theta.array().sin();
            const KgeVec<Scalar> u =
                hr.cwiseProduct(c) - hi.cwiseProduct(s) - t.head(half);
            const KgeVec<Scalar> v =
                hr.cwiseProduct(s) + hi.cwiseProduct(c) - t.tail(half);
            return -std::sqrt(u.squaredNorm() + v.squaredNorm());
        }
    }
    throw std::logic_error("unreachable kge model");
}

// Score plus analytic gradients, accumulated (+=) into the provided buffers
// scaled by `upstream`. Norm-based models take the zero subgradient at a zero
// residual.
template <typename Scalar>
Scalar kge_score_grad(KgeModel model, const KgeVec<Scalar>& h, const KgeVec<Scalar>& r,
                      const KgeVec<Scalar>& t, std::type_identity_t<Scalar> upstream,
                      Eigen::Ref<KgeVec<std::type_identity_t<Scalar>>> d_head,
                      Eigen::Ref<KgeVec<std::type_identity_t<Scalar>>> d_rel,
                      Eigen::Ref<KgeVec<std::type_identity_t<Scalar>>> d_tail) {
    detail::check_kge_dims(model, h, r, t);
    const Eigen::Index d = h.size();
    const Eigen::Index half = d / 2;
    if (d_head.size() != d || d_rel.size() != d || d_tail.size() != d) {
        throw std::invalid_argument("kge_score_grad: gradient buffer dimension mismatch");
    }
    switch (model) {
        case KgeModel::TransE: {
            const KgeVec<Scalar> diff = h + r - t;
            const Scalar n = diff.norm();
            if (n > Scalar(0)) {
                const KgeVec<Scalar> g = (upstream / n) * diff;
                d_head -= g;
                d_rel -= g;
                d_tail += g;
            }
            return -n;
        }
        case KgeModel::DistMult: {
            d_head += upstream * r.cwiseProduct(t);
            d_rel += upstream * h.cwiseProduct(t);
            d_tail += upstream * h.cwiseProduct(r);
            return h.cwiseProduct(r).dot(t);
        }
        case KgeModel::ComplEx: {
            const auto hr = h.head(half), hi = h.tail(half);
            const auto rr = r.head(half), ri = r.tail(half);
            const auto tr = t.head(half), ti = t.tail(half);
            d_head.head(half) += upstream * (rr.cwiseProduct(tr) + ri.cwiseProduct(ti));
            d_head.tail(half) += upstream * (rr.cwiseProduct(ti) - ri.cwiseProduct(tr));
            d_rel.head(half) += upstream * (hr.cwiseProduct(tr) + hi.cwiseProduct(ti));
            d_rel.tail(half) += upstream * (hr.cwiseProduct(ti) - hi.cwiseProduct(tr));
            d_tail.head(half) += upstream * (hr.cwiseProduct(rr) - hi.cwiseProduct(ri));
            d_tail.tail(half) += upstream * (hr.cwiseProduct(ri) + hi.cwiseProduct(rr));
            return (hr.cwiseProduct(rr) - hi.cwiseProduct(ri)).dot(tr) +
                   (hr.cwiseProduct(ri) + hi.cwiseProduct(rr)).dot(ti);
        }
        case KgeModel::RotatE: {
            const auto hr = h.head(half), hi = h.tail(half);
            const KgeVec<Scalar> c = r.head(half).array().cos();
            const KgeVec<Scalar> s = r.head(half).array().sin();
            const KgeVec<Scalar> u = hr.cwiseProduct(c) - hi.cwiseProduct(s) - t.head(half);
            const KgeVec<Scalar> v = hr.cwiseProduct(s) + hi.cwiseProduct(c) - t.tail(half);
            const Scalar n = std::sqrt(u.squaredNorm() + v.squaredNorm());
            if (n > Scalar(0)) {
                const KgeVec<Scalar> du = (-upstream / n) * u; // d(score)/du scaled
                const KgeVec<Scalar> dv = (-upstream / n) * v;
                d_head.head(half) += du.cwiseProduct(c) + dv.cwiseProduct(s);
                d_head.tail(half) += dv.cwiseProduct(c) - du.cwiseProduct(s);
                d_rel.head(half) += du.cwiseProduct(-hr.cwiseProduct(s) - hi.cwiseProduct(c)) +
                                    dv.cwiseProduct(hr.cwiseProduct(c) - hi.cwiseProduct(s));
                d_tail.head(half) -= du;
                d_tail.tail(half) -= dv;
            }
            return -n;
        }
    }
    throw std::logic_error("unreachable kge model");
}

} // namespace akgc
