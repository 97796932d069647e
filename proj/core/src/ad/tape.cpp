#include "abode/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "abode/error.hpp"

namespace abode::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const Array& a) { return ConstMap(a.data(), a.rows(), a.cols()); }
MutMap view(Array& a) { return MutMap(a.data(), a.rows(), a.cols()); }

double clamp_unit(double x) { return std::clamp(x, -1.0 + kAcosClampEps, 1.0 - kAcosClampEps); }

[[noreturn]] void shape_fail(OpKind kind, const Array& a, const Array& b) {
  throw ShapeError(std::string(op_name(kind)) + ": incompatible shapes " + shape_string(a) +
                   " and " + shape_string(b));
}

void require_same(OpKind kind, const Array& a, const Array& b) {
  if (!a.same_shape(b)) shape_fail(kind, a, b);
}

template <class F>
Array map_unary(const Array& a, F f) {
  Array out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

void accumulate(std::vector<Array>& adj, int id, const Array& src, const Array& like) {
  if (like.size() == 0) return;
  Array& dst = adj[static_cast<std::size_t>(id)];
  if (dst.empty()) dst = Array(like.rows(), like.cols());
  dst += src;
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::Scale: return "scale";
    case OpKind::ScaleRows: return "scale_rows";
    case OpKind::MatMul: return "matmul";
    case OpKind::Transpose: return "transpose";
    case OpKind::ConcatCols: return "concat_cols";
    case OpKind::ConcatRows: return "concat_rows";
    case OpKind::SliceRows: return "slice_rows";
    case OpKind::SliceCols: return "slice_cols";
    case OpKind::GatherRows: return "gather_rows";
    case OpKind::SegmentSum: return "segment_sum";
    case OpKind::Sum: return "sum";
    case OpKind::RowSum: return "row_sum";
    case OpKind::SoftmaxRows: return "softmax_rows";
    case OpKind::LogSoftmaxRows: return "log_softmax_rows";
    case OpKind::Exp: return "exp";
    case OpKind::Log: return "log";
    case OpKind::Cos: return "cos";
    case OpKind::Sin: return "sin";
    case OpKind::Tanh: return "tanh";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::AcosClamped: return "acos_clamped";
    case OpKind::Atan2: return "atan2";
    case OpKind::NormRows: return "norm_rows";
    case OpKind::Cross3: return "cross3";
  }
  return "unknown";
}

IndexList make_index(std::vector<std::size_t> indices) {
  return std::make_shared<const std::vector<std::size_t>>(std::move(indices));
}

const Array& Var::value() const {
  if (tape_ == nullptr) throw Error("value() on an unbound Var");
  return tape_->value(*this);
}

const Array& Gradients::operator[](Var leaf) const { return at(leaf.id()); }

const Array& Gradients::at(int id) const {
  const auto i = static_cast<std::size_t>(id);
  if (id < 0 || i >= adjoints_.size() || !is_leaf_[i]) {
    throw Error("gradient requested for a value that is not a leaf of this tape");
  }
  return adjoints_[i];
}

Var Tape::leaf(Array value) {
  Node node;
  node.kind = OpKind::Leaf;
  node.needs_grad = true;
  node.value = std::move(value);
  return push(std::move(node));
}

Var Tape::constant(Array value) {
  Node node;
  node.kind = OpKind::Constant;
  node.value = std::move(value);
  return push(std::move(node));
}

const Array& Tape::value(Var v) const {
  if (v.tape() != this) throw Error("Var belongs to a different tape");
  return nodes_[static_cast<std::size_t>(v.id())].value;
}

OpKind Tape::kind(Var v) const { return nodes_[static_cast<std::size_t>(v.id())].kind; }

Var Tape::push(Node node) {
  if (!node.value.all_finite()) {
    throw NonFiniteError(std::string(op_name(node.kind)) + " produced a non-finite value (node " +
                         std::to_string(nodes_.size()) + ")");
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

// Forward rule for every primitive; operands[k] is the value of n.args[k].
Array Tape::evaluate(const Node& n, std::span<const Array* const> operands) {
  auto arg = [&](std::size_t k) -> const Array& { return *operands[k]; };
  switch (n.kind) {
    case OpKind::Leaf:
    case OpKind::Constant:
      return n.value;
    case OpKind::Add: {
      require_same(n.kind, arg(0), arg(1));
      return arg(0) + arg(1);
    }
    case OpKind::Sub: {
      require_same(n.kind, arg(0), arg(1));
      return arg(0) - arg(1);
    }
    case OpKind::Mul: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      require_same(n.kind, a, b);
      Array out(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
      return out;
    }
    case OpKind::Div: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      require_same(n.kind, a, b);
      Array out(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / b[i];
      return out;
    }
    case OpKind::Scale:
      return n.scalar * arg(0);
    case OpKind::ScaleRows: {
      const Array& a = arg(0);
      const Array& f = arg(1);
      if (f.rows() != a.rows() || f.cols() != 1) shape_fail(n.kind, a, f);
      Array out(a.rows(), a.cols());
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) * f(r, 0);
      return out;
    }
    case OpKind::MatMul: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      if (a.cols() != b.rows()) shape_fail(n.kind, a, b);
      Array out(a.rows(), b.cols());
      if (a.cols() > 0) view(out).noalias() = view(a) * view(b);
      return out;
    }
    case OpKind::Transpose: {
      const Array& a = arg(0);
      Array out(a.cols(), a.rows());
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
      return out;
    }
    case OpKind::ConcatCols: {
      const std::size_t rows = arg(0).rows();
      std::size_t cols = 0;
      for (std::size_t k = 0; k < n.args.size(); ++k) {
        if (arg(k).rows() != rows) shape_fail(n.kind, arg(0), arg(k));
        cols += arg(k).cols();
      }
      Array out(rows, cols);
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.args.size(); ++k) {
        const Array& p = arg(k);
        for (std::size_t r = 0; r < rows; ++r)
          std::copy_n(p.data() + r * p.cols(), p.cols(), out.data() + r * cols + offset);
        offset += p.cols();
      }
      return out;
    }
    case OpKind::ConcatRows: {
      const std::size_t cols = arg(0).cols();
      std::size_t rows = 0;
      for (std::size_t k = 0; k < n.args.size(); ++k) {
        if (arg(k).cols() != cols) shape_fail(n.kind, arg(0), arg(k));
        rows += arg(k).rows();
      }
      Array out(rows, cols);
      double* dst = out.data();
      for (std::size_t k = 0; k < n.args.size(); ++k) dst = std::copy_n(arg(k).data(), arg(k).size(), dst);
      return out;
    }
    case OpKind::SliceRows: {
      const Array& a = arg(0);
      if (n.begin + n.count > a.rows()) throw ShapeError("slice_rows out of range on " + shape_string(a));
      Array out(n.count, a.cols());
      std::copy_n(a.data() + n.begin * a.cols(), n.count * a.cols(), out.data());
      return out;
    }
    case OpKind::SliceCols: {
      const Array& a = arg(0);
      if (n.begin + n.count > a.cols()) throw ShapeError("slice_cols out of range on " + shape_string(a));
      Array out(a.rows(), n.count);
      for (std::size_t r = 0; r < a.rows(); ++r)
        std::copy_n(a.data() + r * a.cols() + n.begin, n.count, out.data() + r * n.count);
      return out;
    }
    case OpKind::GatherRows: {
      const Array& a = arg(0);
      const auto& idx = *n.index;
      Array out(idx.size(), a.cols());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= a.rows()) throw ShapeError("gather_rows index out of range");
        std::copy_n(a.data() + idx[k] * a.cols(), a.cols(), out.data() + k * a.cols());
      }
      return out;
    }
    case OpKind::SegmentSum: {
      const Array& a = arg(0);
      const auto& seg = *n.index;
      if (seg.size() != a.rows()) throw ShapeError("segment_sum: one segment id per row required");
      Array out(n.count, a.cols());
      for (std::size_t k = 0; k < seg.size(); ++k) {
        if (seg[k] >= n.count) throw ShapeError("segment_sum: segment id out of range");
        for (std::size_t c = 0; c < a.cols(); ++c) out(seg[k], c) += a(k, c);
      }
      return out;
    }
    case OpKind::Sum: {
      double s = 0.0;
      for (double v : arg(0).values()) s += v;
      return Array::scalar(s);
    }
    case OpKind::RowSum: {
      const Array& a = arg(0);
      Array out(a.rows(), 1);
      for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c);
        out(r, 0) = s;
      }
      return out;
    }
    case OpKind::SoftmaxRows:
    case OpKind::LogSoftmaxRows: {
      const Array& a = arg(0);
      Array out(a.rows(), a.cols());
      for (std::size_t r = 0; r < a.rows(); ++r) {
        double mx = -INFINITY;
        for (std::size_t c = 0; c < a.cols(); ++c) mx = std::max(mx, a(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) z += std::exp(a(r, c) - mx);
        if (n.kind == OpKind::SoftmaxRows) {
          for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = std::exp(a(r, c) - mx) / z;
        } else {
          const double lz = mx + std::log(z);
          for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = a(r, c) - lz;
        }
      }
      return out;
    }
    case OpKind::Exp: return map_unary(arg(0), [](double x) { return std::exp(x); });
    case OpKind::Log: return map_unary(arg(0), [](double x) { return std::log(x); });
    case OpKind::Cos: return map_unary(arg(0), [](double x) { return std::cos(x); });
    case OpKind::Sin: return map_unary(arg(0), [](double x) { return std::sin(x); });
    case OpKind::Tanh: return map_unary(arg(0), [](double x) { return std::tanh(x); });
    case OpKind::Sqrt: return map_unary(arg(0), [](double x) { return std::sqrt(x); });
    case OpKind::AcosClamped: return map_unary(arg(0), [](double x) { return std::acos(clamp_unit(x)); });
    case OpKind::Atan2: {
      const Array& y = arg(0);
      const Array& x = arg(1);
      require_same(n.kind, y, x);
      Array out(y.rows(), y.cols());
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::atan2(y[i], x[i]);
      return out;
    }
    case OpKind::NormRows: {
      const Array& a = arg(0);
      Array out(a.rows(), 1);
      for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += a(r, c) * a(r, c);
        out(r, 0) = std::sqrt(s);
      }
      return out;
    }
    case OpKind::Cross3: {
      const Array& a = arg(0);
      const Array& b = arg(1);
      if (a.cols() != 3 || !a.same_shape(b)) shape_fail(n.kind, a, b);
      Array out(a.rows(), 3);
      for (std::size_t r = 0; r < a.rows(); ++r) {
        out(r, 0) = a(r, 1) * b(r, 2) - a(r, 2) * b(r, 1);
        out(r, 1) = a(r, 2) * b(r, 0) - a(r, 0) * b(r, 2);
        out(r, 2) = a(r, 0) * b(r, 1) - a(r, 1) * b(r, 0);
      }
      return out;
    }
  }
  throw Error("unknown op");
}

// Local adjoint rules: push `g` (adjoint of node `id`) onto the operands.
void Tape::propagate(const Node& n, int id, const Array& g, std::vector<Array>& adj) const {
  auto arg_node = [&](std::size_t k) -> const Node& { return nodes_[static_cast<std::size_t>(n.args[k])]; };
  auto val = [&](std::size_t k) -> const Array& { return arg_node(k).value; };
  auto wants = [&](std::size_t k) { return arg_node(k).needs_grad; };
  auto push_to = [&](std::size_t k, const Array& contribution) {
    accumulate(adj, n.args[k], contribution, val(k));
  };
  const Array& y = nodes_[static_cast<std::size_t>(id)].value;

  switch (n.kind) {
    case OpKind::Leaf:
    case OpKind::Constant:
      return;
    case OpKind::Add:
      if (wants(0)) push_to(0, g);
      if (wants(1)) push_to(1, g);
      return;
    case OpKind::Sub:
      if (wants(0)) push_to(0, g);
      if (wants(1)) push_to(1, -1.0 * g);
      return;
    case OpKind::Mul: {
      const Array& a = val(0);
      const Array& b = val(1);
      if (wants(0)) {
        Array d(a.rows(), a.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * b[i];
        push_to(0, d);
      }
      if (wants(1)) {
        Array d(b.rows(), b.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] * a[i];
        push_to(1, d);
      }
      return;
    }
    case OpKind::Div: {
      const Array& a = val(0);
      const Array& b = val(1);
      if (wants(0)) {
        Array d(a.rows(), a.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = g[i] / b[i];
        push_to(0, d);
      }
      if (wants(1)) {
        Array d(b.rows(), b.cols());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i] * a[i] / (b[i] * b[i]);
        push_to(1, d);
      }
      return;
    }
    case OpKind::Scale:
      if (wants(0)) push_to(0, n.scalar * g);
      return;
    case OpKind::ScaleRows: {
      const Array& a = val(0);
      const Array& f = val(1);
      if (wants(0)) {
        Array d(a.rows(), a.cols());
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) d(r, c) = g(r, c) * f(r, 0);
        push_to(0, d);
      }
      if (wants(1)) {
        Array d(f.rows(), 1);
        for (std::size_t r = 0; r < a.rows(); ++r) {
          double s = 0.0;
          for (std::size_t c = 0; c < a.cols(); ++c) s += g(r, c) * a(r, c);
          d(r, 0) = s;
        }
        push_to(1, d);
      }
      return;
    }
    case OpKind::MatMul: {
      const Array& a = val(0);
      const Array& b = val(1);
      if (wants(0)) {
        Array d(a.rows(), a.cols());
        if (b.cols() > 0) view(d).noalias() = view(g) * view(b).transpose();
        push_to(0, d);
      }
      if (wants(1)) {
        Array d(b.rows(), b.cols());
        if (a.rows() > 0) view(d).noalias() = view(a).transpose() * view(g);
        push_to(1, d);
      }
      return;
    }
    case OpKind::Transpose: {
      if (!wants(0)) return;
      Array d(g.cols(), g.rows());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) d(c, r) = g(r, c);
      push_to(0, d);
      return;
    }
    case OpKind::ConcatCols: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < n.args.size(); ++k) {
        const Array& p = val(k);
        if (wants(k)) {
          Array d(p.rows(), p.cols());
          for (std::size_t r = 0; r < p.rows(); ++r)
            std::copy_n(g.data() + r * g.cols() + offset, p.cols(), d.data() + r * p.cols());
          push_to(k, d);
        }
        offset += p.cols();
      }
      return;
    }
    case OpKind::ConcatRows: {
      const double* src = g.data();
      for (std::size_t k = 0; k < n.args.size(); ++k) {
        const Array& p = val(k);
        if (wants(k)) {
          Array d(p.rows(), p.cols());
          std::copy_n(src, p.size(), d.data());
          push_to(k, d);
        }
        src += p.size();
      }
      return;
    }
    case OpKind::SliceRows: {
      if (!wants(0)) return;
      const Array& a = val(0);
      Array d(a.rows(), a.cols());
      std::copy_n(g.data(), g.size(), d.data() + n.begin * a.cols());
      push_to(0, d);
      return;
    }
    case OpKind::SliceCols: {
      if (!wants(0)) return;
      const Array& a = val(0);
      Array d(a.rows(), a.cols());
      for (std::size_t r = 0; r < a.rows(); ++r)
        std::copy_n(g.data() + r * n.count, n.count, d.data() + r * a.cols() + n.begin);
      push_to(0, d);
      return;
    }
    case OpKind::GatherRows: {
      if (!wants(0)) return;
      const Array& a = val(0);
      const auto& idx = *n.index;
      Array d(a.rows(), a.cols());
      for (std::size_t k = 0; k < idx.size(); ++k)
        for (std::size_t c = 0; c < a.cols(); ++c) d(idx[k], c) += g(k, c);
      push_to(0, d);
      return;
    }
    case OpKind::SegmentSum: {
      if (!wants(0)) return;
      const Array& a = val(0);
      const auto& seg = *n.index;
      Array d(a.rows(), a.cols());
      for (std::size_t k = 0; k < seg.size(); ++k)
        std::copy_n(g.data() + seg[k] * a.cols(), a.cols(), d.data() + k * a.cols());
      push_to(0, d);
      return;
    }
    case OpKind::Sum: {
      if (!wants(0)) return;
      const Array& a = val(0);
      push_to(0, Array(a.rows(), a.cols(), g.item()));
      return;
    }
    case OpKind::RowSum: {
      if (!wants(0)) return;
      const Array& a = val(0);
      Array d(a.rows(), a.cols());
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) d(r, c) = g(r, 0);
      push_to(0, d);
      return;
    }
    case OpKind::SoftmaxRows: {
      if (!wants(0)) return;
      Array d(y.rows(), y.cols());
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) d(r, c) = y(r, c) * (g(r, c) - dot);
      }
      push_to(0, d);
      return;
    }
    case OpKind::LogSoftmaxRows: {
      if (!wants(0)) return;
      Array d(y.rows(), y.cols());
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double gs = 0.0;
        for (std::size_t c = 0; c < y.cols(); ++c) gs += g(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) d(r, c) = g(r, c) - std::exp(y(r, c)) * gs;
      }
      push_to(0, d);
      return;
    }
    case OpKind::Exp:
    case OpKind::Log:
    case OpKind::Cos:
    case OpKind::Sin:
    case OpKind::Tanh:
    case OpKind::Sqrt:
    case OpKind::AcosClamped: {
      if (!wants(0)) return;
      const Array& x = val(0);
      Array d(x.rows(), x.cols());
      for (std::size_t i = 0; i < x.size(); ++i) {
        double local = 0.0;
        switch (n.kind) {
          case OpKind::Exp: local = y[i]; break;
          case OpKind::Log: local = 1.0 / x[i]; break;
          case OpKind::Cos: local = -std::sin(x[i]); break;
          case OpKind::Sin: local = std::cos(x[i]); break;
          case OpKind::Tanh: local = 1.0 - y[i] * y[i]; break;
          case OpKind::Sqrt: local = y[i] > 0.0 ? 0.5 / y[i] : 0.0; break;
          case OpKind::AcosClamped: {
            // Derivative taken at the clamped argument so it stays finite.
            const double c = clamp_unit(x[i]);
            local = -1.0 / std::sqrt(1.0 - c * c);
            break;
          }
          default: break;
        }
        d[i] = g[i] * local;
      }
      push_to(0, d);
      return;
    }
    case OpKind::Atan2: {
      const Array& yy = val(0);
      const Array& xx = val(1);
      Array dy(yy.rows(), yy.cols());
      Array dx(xx.rows(), xx.cols());
      for (std::size_t i = 0; i < yy.size(); ++i) {
        const double r2 = xx[i] * xx[i] + yy[i] * yy[i];
        if (r2 == 0.0) continue;
        dy[i] = g[i] * xx[i] / r2;
        dx[i] = -g[i] * yy[i] / r2;
      }
      if (wants(0)) push_to(0, dy);
      if (wants(1)) push_to(1, dx);
      return;
    }
    case OpKind::NormRows: {
      if (!wants(0)) return;
      const Array& a = val(0);
      Array d(a.rows(), a.cols());
      for (std::size_t r = 0; r < a.rows(); ++r) {
        if (y(r, 0) == 0.0) continue;
        const double f = g(r, 0) / y(r, 0);
        for (std::size_t c = 0; c < a.cols(); ++c) d(r, c) = f * a(r, c);
      }
      push_to(0, d);
      return;
    }
    case OpKind::Cross3: {
      const Array& a = val(0);
      const Array& b = val(1);
      // d/da <g, a x b> = b x g ; d/db <g, a x b> = g x a
      if (wants(0)) {
        Array d(a.rows(), 3);
        for (std::size_t r = 0; r < a.rows(); ++r) {
          d(r, 0) = b(r, 1) * g(r, 2) - b(r, 2) * g(r, 1);
          d(r, 1) = b(r, 2) * g(r, 0) - b(r, 0) * g(r, 2);
          d(r, 2) = b(r, 0) * g(r, 1) - b(r, 1) * g(r, 0);
        }
        push_to(0, d);
      }
      if (wants(1)) {
        Array d(b.rows(), 3);
        for (std::size_t r = 0; r < b.rows(); ++r) {
          d(r, 0) = g(r, 1) * a(r, 2) - g(r, 2) * a(r, 1);
          d(r, 1) = g(r, 2) * a(r, 0) - g(r, 0) * a(r, 2);
          d(r, 2) = g(r, 0) * a(r, 1) - g(r, 1) * a(r, 0);
        }
        push_to(1, d);
      }
      return;
    }
  }
}

Gradients Tape::backward(Var loss) const {
  if (loss.tape() != this) throw Error("backward: loss is not recorded on this tape");
  const Array& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward: loss must be 1x1, got " + shape_string(lv));
  }
  const auto count = static_cast<std::size_t>(loss.id()) + 1;
  std::vector<Array> adj(nodes_.size());
  adj[static_cast<std::size_t>(loss.id())] = Array::scalar(1.0);
  for (std::size_t i = count; i-- > 0;) {
    const Node& n = nodes_[i];
    if (adj[i].empty() || !n.needs_grad) continue;
    if (n.kind != OpKind::Leaf) {
      propagate(n, static_cast<int>(i), adj[i], adj);
      adj[i] = Array();
    }
  }
  Gradients out;
  out.adjoints_.resize(nodes_.size());
  out.is_leaf_.assign(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind != OpKind::Leaf) continue;
    out.is_leaf_[i] = 1;
    out.adjoints_[i] = adj[i].empty() ? Array(nodes_[i].value.rows(), nodes_[i].value.cols())
                                      : std::move(adj[i]);
    if (!out.adjoints_[i].all_finite()) {
      throw NonFiniteError("backward produced a non-finite adjoint for leaf " + std::to_string(i));
    }
  }
  return out;
}

std::vector<Array> Tape::replay() const {
  std::vector<Array> values;
  values.reserve(nodes_.size());
  std::vector<const Array*> operands;
  for (const Node& n : nodes_) {
    operands.clear();
    for (int a : n.args) operands.push_back(&values[static_cast<std::size_t>(a)]);
    values.push_back(evaluate(n, operands));
  }
  return values;
}

// Records primitive applications. Every public op funnels through `apply`.
class Recorder {
 public:
  static Var apply(OpKind kind, std::span<const Var> operands, double scalar = 0.0, std::size_t begin = 0,
                   std::size_t count = 0, IndexList index = nullptr) {
    if (operands.empty() || operands.front().tape() == nullptr) throw Error("operation on an unbound Var");
    Tape* tape = operands.front().tape();
    Tape::Node node;
    node.kind = kind;
    node.args.reserve(operands.size());
    std::vector<const Array*> values;
    values.reserve(operands.size());
    for (const Var& v : operands) {
      if (v.tape() != tape) throw Error(std::string(op_name(kind)) + ": operands live on different tapes");
      const Tape::Node& src = tape->nodes_[static_cast<std::size_t>(v.id())];
      node.args.push_back(v.id());
      node.needs_grad = node.needs_grad || src.needs_grad;
      values.push_back(&src.value);
    }
    node.scalar = scalar;
    node.begin = begin;
    node.count = count;
    node.index = std::move(index);
    node.value = Tape::evaluate(node, values);
    return tape->push(std::move(node));
  }
};

namespace {

Var unary(OpKind kind, Var a) { return Recorder::apply(kind, std::span<const Var>(&a, 1)); }

Var binary(OpKind kind, Var a, Var b) {
  const Var ops[2] = {a, b};
  return Recorder::apply(kind, ops);
}

}  // namespace

Var add(Var a, Var b) { return binary(OpKind::Add, a, b); }
Var sub(Var a, Var b) { return binary(OpKind::Sub, a, b); }
Var mul(Var a, Var b) { return binary(OpKind::Mul, a, b); }
Var div(Var a, Var b) { return binary(OpKind::Div, a, b); }
Var scale(Var a, double factor) { return Recorder::apply(OpKind::Scale, std::span<const Var>(&a, 1), factor); }
Var scale_rows(Var a, Var factors) { return binary(OpKind::ScaleRows, a, factors); }
Var matmul(Var a, Var b) { return binary(OpKind::MatMul, a, b); }
Var transpose(Var a) { return unary(OpKind::Transpose, a); }

Var concat_cols(std::span<const Var> parts) {
  if (parts.size() == 1) return parts.front();
  return Recorder::apply(OpKind::ConcatCols, parts);
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.size() == 1) return parts.front();
  return Recorder::apply(OpKind::ConcatRows, parts);
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  return Recorder::apply(OpKind::SliceRows, std::span<const Var>(&a, 1), 0.0, begin, count);
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  return Recorder::apply(OpKind::SliceCols, std::span<const Var>(&a, 1), 0.0, begin, count);
}

Var gather_rows(Var a, IndexList index) {
  return Recorder::apply(OpKind::GatherRows, std::span<const Var>(&a, 1), 0.0, 0, 0, std::move(index));
}

Var segment_sum(Var a, IndexList segment, std::size_t segments) {
  return Recorder::apply(OpKind::SegmentSum, std::span<const Var>(&a, 1), 0.0, 0, segments, std::move(segment));
}

Var sum(Var a) { return unary(OpKind::Sum, a); }
Var row_sum(Var a) { return unary(OpKind::RowSum, a); }
Var softmax_rows(Var a) { return unary(OpKind::SoftmaxRows, a); }
Var log_softmax_rows(Var a) { return unary(OpKind::LogSoftmaxRows, a); }
Var exp(Var a) { return unary(OpKind::Exp, a); }
Var log(Var a) { return unary(OpKind::Log, a); }
Var cos(Var a) { return unary(OpKind::Cos, a); }
Var sin(Var a) { return unary(OpKind::Sin, a); }
Var tanh(Var a) { return unary(OpKind::Tanh, a); }
Var sqrt(Var a) { return unary(OpKind::Sqrt, a); }
Var acos_clamped(Var a) { return unary(OpKind::AcosClamped, a); }
Var atan2(Var y, Var x) { return binary(OpKind::Atan2, y, x); }
Var norm_rows(Var a) { return unary(OpKind::NormRows, a); }
Var cross3(Var a, Var b) { return binary(OpKind::Cross3, a, b); }

}  // namespace abode::ad
