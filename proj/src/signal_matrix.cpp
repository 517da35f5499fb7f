#include "wsngsp/signal_matrix.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace wsngsp {

SignalMatrix::SignalMatrix(Matrix values, BoolMatrix observed)
    : values_(std::move(values)), observed_(std::move(observed)) {
  if (values_.rows() != observed_.rows() || values_.cols() != observed_.cols()) {
    throw std::invalid_argument("SignalMatrix: value and mask shapes differ");
  }
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index t = 0; t < values_.rows(); ++t) {
      if (observed_(t, j) && !std::isfinite(values_(t, j))) {
        throw std::invalid_argument("SignalMatrix: observed cell (" + std::to_string(t) + ", " +
                                    std::to_string(j) + ") is not finite");
      }
    }
  }
}

SignalMatrix SignalMatrix::fully_observed(Matrix values) {
  BoolMatrix mask = BoolMatrix::Constant(values.rows(), values.cols(), true);
  return SignalMatrix(std::move(values), std::move(mask));
}

SignalMatrix SignalMatrix::from_finite(Matrix values) {
  BoolMatrix mask = values.array().isFinite();
  return SignalMatrix(std::move(values), std::move(mask));
}

SignalMatrix SignalMatrix::slice(int first, int count) const {
  if (first < 0 || count < 0 || first + count > snapshots()) {
    throw std::out_of_range("SignalMatrix::slice: row range out of bounds");
  }
  return SignalMatrix(values_.middleRows(first, count), observed_.middleRows(first, count));
}

Matrix SignalMatrix::complete_rows() const {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t < values_.rows(); ++t) {
    if (values_.row(t).allFinite()) keep.push_back(t);
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), values_.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = values_.row(keep[r]);
  return out;
}

}  // namespace wsngsp
