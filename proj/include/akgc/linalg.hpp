#pragma once

#include <Eigen/Dense>

namespace akgc {

template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VecT = Eigen::Vector<Scalar, Eigen::Dynamic>;

// Row-major so that per-entity / per-token rows are contiguous.
using Mat = MatT<double>;
using Vec = VecT<double>;

} // namespace akgc
