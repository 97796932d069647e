#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "abode/ad/array.hpp"

namespace abode::ad {

class Tape;

enum class OpKind : std::uint8_t {
  Leaf,
  Constant,
  Add,
  Sub,
  Mul,
  Div,
  Scale,
  ScaleRows,
  MatMul,
  Transpose,
  ConcatCols,
  ConcatRows,
  SliceRows,
  SliceCols,
  GatherRows,
  SegmentSum,
  Sum,
  RowSum,
  SoftmaxRows,
  LogSoftmaxRows,
  Exp,
  Log,
  Cos,
  Sin,
  Tanh,
  Sqrt,
  AcosClamped,
  Atan2,
  NormRows,
  Cross3,
};

std::string_view op_name(OpKind kind);

/// Clamp margin applied by acos_clamped: the argument is limited to [-1+eps, 1-eps].
inline constexpr double kAcosClampEps = 1e-7;

using IndexList = std::shared_ptr<const std::vector<std::size_t>>;

IndexList make_index(std::vector<std::size_t> indices);

/// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Array& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Adjoints returned by Tape::backward, indexed by leaf.
class Gradients {
 public:
  /// Adjoint of a leaf. Leaves the loss does not depend on have zero adjoints.
  const Array& operator[](Var leaf) const;
  const Array& at(int id) const;

 private:
  friend class Tape;
  std::vector<Array> adjoints_;
  std::vector<std::uint8_t> is_leaf_;
};

/// Define-by-run tape: every primitive application is appended in execution
/// order, so operands always precede their results.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable leaf (a parameter or an input).
  Var leaf(Array value);
  /// Non-differentiable value.
  Var constant(Array value);
  Var constant(double value) { return constant(Array::scalar(value)); }

  const Array& value(Var v) const;
  OpKind kind(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Reverse sweep from a 1×1 value recorded on this tape.
  Gradients backward(Var loss) const;

  /// Re-evaluates every recorded primitive from the stored leaf and constant
  /// values. Used to check that a recorded tape is reproducible.
  std::vector<Array> replay() const;

 private:
  struct Node {
    OpKind kind = OpKind::Constant;
    bool needs_grad = false;
    std::vector<int> args;
    Array value;
    double scalar = 0.0;
    std::size_t begin = 0;
    std::size_t count = 0;
    IndexList index;
  };

  Var push(Node node);
  static Array evaluate(const Node& node, std::span<const Array* const> operands);
  void propagate(const Node& node, int id, const Array& adjoint, std::vector<Array>& adj) const;

  friend class Recorder;
  std::vector<Node> nodes_;
};

// Primitives. All operands must live on the same tape.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double factor);
/// Multiplies row r of `a` by factors(r, 0); factors is rows×1.
Var scale_rows(Var a, Var factors);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
/// result row k = a row index[k].
Var gather_rows(Var a, IndexList index);
/// result row s = sum of a rows k with segment[k] == s.
Var segment_sum(Var a, IndexList segment, std::size_t segments);
/// Sum of all entries, 1×1.
Var sum(Var a);
/// Per-row sum, rows×1.
Var row_sum(Var a);
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
Var exp(Var a);
Var log(Var a);
Var cos(Var a);
Var sin(Var a);
Var tanh(Var a);
Var sqrt(Var a);
Var acos_clamped(Var a);
/// Element-wise atan2(y, x).
Var atan2(Var y, Var x);
/// Euclidean norm of each row, rows×1. The adjoint of a zero row is zero.
Var norm_rows(Var a);
/// Row-wise cross product of n×3 arrays.
Var cross3(Var a, Var b);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator/(Var a, Var b) { return div(a, b); }
inline Var operator*(double f, Var a) { return scale(a, f); }
inline Var operator*(Var a, double f) { return scale(a, f); }
inline Var operator-(Var a) { return scale(a, -1.0); }

inline Var concat_cols(std::initializer_list<Var> parts) {
  return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
}
inline Var concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}

}  // namespace abode::ad
