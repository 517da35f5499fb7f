#pragma once

#include "wsngsp/graph.hpp"

namespace wsngsp {

/// T x N measurements: one row per snapshot (epoch), one column per node.
///
/// `observed` marks genuine receipts. Every observed cell holds a finite
/// value; unobserved cells are NaN unless a fill policy supplied a value.
class SignalMatrix {
 public:
  SignalMatrix() = default;
  SignalMatrix(Matrix values, BoolMatrix observed);

  /// Every entry observed; all values must be finite.
  static SignalMatrix fully_observed(Matrix values);
  /// Observed exactly where the value is finite.
  static SignalMatrix from_finite(Matrix values);

  int snapshots() const { return static_cast<int>(values_.rows()); }
  int nodes() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  const BoolMatrix& observed() const { return observed_; }

  /// Rows [first, first + count).
  SignalMatrix slice(int first, int count) const;
  /// Rows whose every value is finite, in order.
  Matrix complete_rows() const;
  bool all_finite() const { return values_.allFinite(); }

 private:
  Matrix values_;
  BoolMatrix observed_;
};

}  // namespace wsngsp
