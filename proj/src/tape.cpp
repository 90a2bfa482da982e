#include "pegnn/tape.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pegnn/errors.hpp"

namespace pegnn {

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

// How the second operand of a binary elementwise op maps onto the first.
enum class Bcast { same, row, col, scalar };

Bcast broadcast_mode(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Bcast::same;
  if (b.rows() == 1 && b.cols() == 1) return Bcast::scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Bcast::row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Bcast::col;
  throw DimensionError(std::string(op) + ": cannot broadcast " + shape_str(b) +
                       " over " + shape_str(a));
}

inline std::size_t bcast_index(Bcast mode, int i, int j, int cols) {
  switch (mode) {
    case Bcast::same:
      return static_cast<std::size_t>(i) * cols + j;
    case Bcast::row:
      return static_cast<std::size_t>(j);
    case Bcast::col:
      return static_cast<std::size_t>(i);
    case Bcast::scalar:
      return 0;
  }
  return 0;
}

void check_segment_ids(std::span<const int> ids, int n_rows, int n_segments,
                       const char* op) {
  if (static_cast<int>(ids.size()) != n_rows) {
    throw DimensionError(std::string(op) + ": " + std::to_string(ids.size()) +
                         " segment ids for " + std::to_string(n_rows) + " rows");
  }
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= n_segments) {
      throw IndexError(std::string(op) + ": segment id " +
                       std::to_string(ids[r]) + " at row " + std::to_string(r) +
                       " outside [0, " + std::to_string(n_segments) + ")");
    }
  }
}

}  // namespace

int Tape::intern(const Tensor& t) {
  auto [it, inserted] = ids_.emplace(t.id(), next_id_);
  if (inserted) ++next_id_;
  return it->second;
}

int Tape::node_id(const Tensor& t) const {
  auto it = ids_.find(t.id());
  return it == ids_.end() ? -1 : it->second;
}

void Tape::record(std::initializer_list<Tensor> inputs, const Tensor& output,
                  std::function<void()> pull) {
  Record rec;
  for (const Tensor& t : inputs) rec.inputs.push_back(intern(t));
  rec.output = intern(output);
  rec.pull = std::move(pull);
  records_.push_back(std::move(rec));
  outputs_.push_back(output);
}

Tensor Tape::result_like(int rows, int cols, bool requires_grad) {
  return Tensor::zeros(rows, cols, requires_grad);
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a) +
                         " by " + shape_str(b));
  }
  const int n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = result_like(n, m, a.requires_grad() || b.requires_grad());
  const double* av = a.values().data();
  const double* bv = b.values().data();
  double* ov = out.values().data();
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aij = av[i * k + p];
      const double* brow = bv + static_cast<std::size_t>(p) * m;
      double* orow = ov + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) orow[j] += aij * brow[j];
    }
  }
  record({a, b}, out, [a, b, out, n, k, m]() {
    if (!out.has_grad()) return;
    const double* g = out.d_->grad.data();
    if (a.requires_grad()) {
      auto& ga = a.d_->grad;
      if (ga.empty()) ga.assign(a.size(), 0.0);
      const double* bv = b.values().data();
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < k; ++p) {
          double s = 0.0;
          for (int j = 0; j < m; ++j) s += g[i * m + j] * bv[p * m + j];
          ga[static_cast<std::size_t>(i) * k + p] += s;
        }
    }
    if (b.requires_grad()) {
      auto& gb = b.d_->grad;
      if (gb.empty()) gb.assign(b.size(), 0.0);
      const double* av = a.values().data();
      for (int p = 0; p < k; ++p)
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += av[i * k + p] * g[i * m + j];
          gb[static_cast<std::size_t>(p) * m + j] += s;
        }
    }
  });
  return out;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  const Bcast mode = broadcast_mode(a, b, "add");
  const int n = a.rows(), m = a.cols();
  Tensor out = result_like(n, m, a.requires_grad() || b.requires_grad());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out.at(i, j) = a.at(i, j) + b.values()[bcast_index(mode, i, j, m)];
  record({a, b}, out, [a, b, out, mode, n, m]() {
    if (!out.has_grad()) return;
    const auto& g = out.d_->grad;
    if (a.requires_grad()) {
      auto& ga = a.d_->grad;
      if (ga.empty()) ga.assign(a.size(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.d_->grad;
      if (gb.empty()) gb.assign(b.size(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          gb[bcast_index(mode, i, j, m)] += g[static_cast<std::size_t>(i) * m + j];
    }
  });
  return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  const Bcast mode = broadcast_mode(a, b, "sub");
  const int n = a.rows(), m = a.cols();
  Tensor out = result_like(n, m, a.requires_grad() || b.requires_grad());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out.at(i, j) = a.at(i, j) - b.values()[bcast_index(mode, i, j, m)];
  record({a, b}, out, [a, b, out, mode, n, m]() {
    if (!out.has_grad()) return;
    const auto& g = out.d_->grad;
    if (a.requires_grad()) {
      auto& ga = a.d_->grad;
      if (ga.empty()) ga.assign(a.size(), 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.d_->grad;
      if (gb.empty()) gb.assign(b.size(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          gb[bcast_index(mode, i, j, m)] -= g[static_cast<std::size_t>(i) * m + j];
    }
  });
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  const Bcast mode = broadcast_mode(a, b, "mul");
  const int n = a.rows(), m = a.cols();
  Tensor out = result_like(n, m, a.requires_grad() || b.requires_grad());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      out.at(i, j) = a.at(i, j) * b.values()[bcast_index(mode, i, j, m)];
  record({a, b}, out, [a, b, out, mode, n, m]() {
    if (!out.has_grad()) return;
    const auto& g = out.d_->grad;
    if (a.requires_grad()) {
      auto& ga = a.d_->grad;
      if (ga.empty()) ga.assign(a.size(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          ga[static_cast<std::size_t>(i) * m + j] +=
              g[static_cast<std::size_t>(i) * m + j] *
              b.values()[bcast_index(mode, i, j, m)];
    }
    if (b.requires_grad()) {
      auto& gb = b.d_->grad;
      if (gb.empty()) gb.assign(b.size(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          gb[bcast_index(mode, i, j, m)] +=
              g[static_cast<std::size_t>(i) * m + j] * a.at(i, j);
    }
  });
  return out;
}

Tensor Tape::relu(const Tensor& a) {
  Tensor out = result_like(a.rows(), a.cols(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values()[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
  record({a}, out, [a, out]() {
    if (!out.has_grad() || !a.requires_grad()) return;
    auto& ga = a.d_->grad;
    if (ga.empty()) ga.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.values()[i] > 0.0) ga[i] += out.d_->grad[i];
  });
  return out;
}

Tensor Tape::leaky_relu(const Tensor& a, double slope) {
  Tensor out = result_like(a.rows(), a.cols(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double v = a.values()[i];
    out.values()[i] = v > 0.0 ? v : slope * v;
  }
  record({a}, out, [a, out, slope]() {
    if (!out.has_grad() || !a.requires_grad()) return;
    auto& ga = a.d_->grad;
    if (ga.empty()) ga.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      ga[i] += out.d_->grad[i] * (a.values()[i] > 0.0 ? 1.0 : slope);
  });
  return out;
}

Tensor Tape::exp(const Tensor& a) {
  Tensor out = result_like(a.rows(), a.cols(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values()[i] = std::exp(a.values()[i]);
  record({a}, out, [a, out]() {
    if (!out.has_grad() || !a.requires_grad()) return;
    auto& ga = a.d_->grad;
    if (ga.empty()) ga.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      ga[i] += out.d_->grad[i] * out.values()[i];
  });
  return out;
}

Tensor Tape::log(const Tensor& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (!(a.at(i, j) > 0.0)) {
        throw DomainError("log: non-positive entry " + std::to_string(a.at(i, j)) +
                          " at (" + std::to_string(i) + ", " + std::to_string(j) +
                          ")");
      }
  Tensor out = result_like(a.rows(), a.cols(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.values()[i] = std::log(a.values()[i]);
  record({a}, out, [a, out]() {
    if (!out.has_grad() || !a.requires_grad()) return;
    auto& ga = a.d_->grad;
    if (ga.empty()) ga.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      ga[i] += out.d_->grad[i] / a.values()[i];
  });
  return out;
}

Tensor Tape::scale(const Tensor& a, double c) {
  Tensor out = result_like(a.rows(), a.cols(), a.requires_grad());
  for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = c * a.values()[i];
  record({a}, out, [a, out, c]() {
    if (!out.has_grad() || !a.requires_grad()) return;
    auto& ga = a.d_->grad;
    if (ga.empty()) ga.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) ga[i] += c * out.d_->grad[i];
  });
  return out;
}

Tensor Tape::segment_reduce(Reduce kind, const Tensor& source,
                            std::span<const int> segment_ids, int n_segments) {
  const int n = source.rows(), m = source.cols();
  check_segment_ids(segment_ids, n, n_segments, "segment_reduce");
  Tensor out = result_like(n_segments, m, source.requires_grad());

  std::vector<int> count(static_cast<std::size_t>(n_segments), 0);
  for (int r = 0; r < n; ++r) ++count[segment_ids[r]];

  // Gradient routing for max: first maximal row per (segment, column).
  std::vector<int> argmax;
  if (kind == Reduce::max) {
    argmax.assign(static_cast<std::size_t>(n_segments) * m, -1);
    for (int r = 0; r < n; ++r) {
      const int s = segment_ids[r];
      for (int j = 0; j < m; ++j) {
        const std::size_t sj = static_cast<std::size_t>(s) * m + j;
        if (argmax[sj] < 0 || source.at(r, j) > out.at(s, j)) {
          argmax[sj] = r;
          out.at(s, j) = source.at(r, j);
        }
      }
    }
    // Untouched (empty) segments keep their zero rows.
  } else {
    for (int r = 0; r < n; ++r) {
      const int s = segment_ids[r];
      for (int j = 0; j < m; ++j) out.at(s, j) += source.at(r, j);
    }
    if (kind == Reduce::mean) {
      for (int s = 0; s < n_segments; ++s)
        if (count[s] > 0)
          for (int j = 0; j < m; ++j) out.at(s, j) /= count[s];
    }
  }

  std::vector<int> ids(segment_ids.begin(), segment_ids.end());
  record({source}, out,
         [source, out, kind, ids = std::move(ids), count = std::move(count),
          argmax = std::move(argmax), m]() {
           if (!out.has_grad() || !source.requires_grad()) return;
           auto& gs = source.d_->grad;
           if (gs.empty()) gs.assign(source.size(), 0.0);
           const auto& g = out.d_->grad;
           switch (kind) {
             case Reduce::sum:
               for (std::size_t r = 0; r < ids.size(); ++r)
                 for (int j = 0; j < m; ++j)
                   gs[r * m + j] += g[static_cast<std::size_t>(ids[r]) * m + j];
               break;
             case Reduce::mean:
               for (std::size_t r = 0; r < ids.size(); ++r)
                 for (int j = 0; j < m; ++j)
                   gs[r * m + j] += g[static_cast<std::size_t>(ids[r]) * m + j] /
                                    count[ids[r]];
               break;
             case Reduce::max:
               for (std::size_t sj = 0; sj < argmax.size(); ++sj)
                 if (argmax[sj] >= 0)
                   gs[static_cast<std::size_t>(argmax[sj]) * m + sj % m] += g[sj];
               break;
           }
         });
  return out;
}

Tensor Tape::segment_softmax(const Tensor& scores, std::span<const int> segment_ids,
                             int n_segments) {
  if (scores.cols() != 1) {
    throw ContractError("segment_softmax: scores must be a column vector, got " +
                        shape_str(scores));
  }
  const int n = scores.rows();
  check_segment_ids(segment_ids, n, n_segments, "segment_softmax");
  Tensor out = result_like(n, 1, scores.requires_grad());
  if (n == 0) {
    record({scores}, out, []() {});
    return out;
  }

  std::vector<double> seg_max(static_cast<std::size_t>(n_segments),
                              -std::numeric_limits<double>::infinity());
  for (int r = 0; r < n; ++r)
    seg_max[segment_ids[r]] = std::max(seg_max[segment_ids[r]], scores.at(r, 0));
  std::vector<double> seg_sum(static_cast<std::size_t>(n_segments), 0.0);
  for (int r = 0; r < n; ++r) {
    out.at(r, 0) = std::exp(scores.at(r, 0) - seg_max[segment_ids[r]]);
    seg_sum[segment_ids[r]] += out.at(r, 0);
  }
  for (int r = 0; r < n; ++r) out.at(r, 0) /= seg_sum[segment_ids[r]];

  std::vector<int> ids(segment_ids.begin(), segment_ids.end());
  record({scores}, out, [scores, out, ids = std::move(ids), n_segments]() {
    if (!out.has_grad() || !scores.requires_grad()) return;
    auto& gs = scores.d_->grad;
    if (gs.empty()) gs.assign(scores.size(), 0.0);
    const auto& g = out.d_->grad;
    // d z_r = y_r (g_r - sum_k g_k y_k) within the segment of r.
    std::vector<double> seg_dot(static_cast<std::size_t>(n_segments), 0.0);
    for (std::size_t r = 0; r < ids.size(); ++r)
      seg_dot[ids[r]] += g[r] * out.values()[r];
    for (std::size_t r = 0; r < ids.size(); ++r)
      gs[r] += out.values()[r] * (g[r] - seg_dot[ids[r]]);
  });
  return out;
}

Tensor Tape::gather_rows(const Tensor& x, std::span<const int> indices) {
  const int n = static_cast<int>(indices.size());
  const int m = x.cols();
  for (int r = 0; r < n; ++r) {
    if (indices[r] < 0 || indices[r] >= x.rows()) {
      throw IndexError("gather_rows: index " + std::to_string(indices[r]) +
                       " at position " + std::to_string(r) + " outside [0, " +
                       std::to_string(x.rows()) + ")");
    }
  }
  Tensor out = result_like(n, m, x.requires_grad());
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < m; ++j) out.at(r, j) = x.at(indices[r], j);
  std::vector<int> idx(indices.begin(), indices.end());
  record({x}, out, [x, out, idx = std::move(idx), m]() {
    if (!out.has_grad() || !x.requires_grad()) return;
    auto& gx = x.d_->grad;
    if (gx.empty()) gx.assign(x.size(), 0.0);
    const auto& g = out.d_->grad;
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (int j = 0; j < m; ++j)
        gx[static_cast<std::size_t>(idx[r]) * m + j] += g[r * m + j];
  });
  return out;
}

Tensor Tape::concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts disagree, " + shape_str(a) +
                         " and " + shape_str(b));
  }
  const int n = a.rows(), p = a.cols(), q = b.cols();
  Tensor out = result_like(n, p + q, a.requires_grad() || b.requires_grad());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) out.at(i, j) = a.at(i, j);
    for (int j = 0; j < q; ++j) out.at(i, p + j) = b.at(i, j);
  }
  record({a, b}, out, [a, b, out, n, p, q]() {
    if (!out.has_grad()) return;
    const auto& g = out.d_->grad;
    const int w = p + q;
    if (a.requires_grad()) {
      auto& ga = a.d_->grad;
      if (ga.empty()) ga.assign(a.size(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
          ga[static_cast<std::size_t>(i) * p + j] +=
              g[static_cast<std::size_t>(i) * w + j];
    }
    if (b.requires_grad()) {
      auto& gb = b.d_->grad;
      if (gb.empty()) gb.assign(b.size(), 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j)
          gb[static_cast<std::size_t>(i) * q + j] +=
              g[static_cast<std::size_t>(i) * w + p + j];
    }
  });
  return out;
}

Tensor Tape::sum_all(const Tensor& a) {
  Tensor out = result_like(1, 1, a.requires_grad());
  double s = 0.0;
  for (double v : a.values()) s += v;
  out.at(0, 0) = s;
  record({a}, out, [a, out]() {
    if (!out.has_grad() || !a.requires_grad()) return;
    auto& ga = a.d_->grad;
    if (ga.empty()) ga.assign(a.size(), 0.0);
    const double g = out.d_->grad[0];
    for (std::size_t i = 0; i < a.size(); ++i) ga[i] += g;
  });
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("backward: loss must be a 1x1 scalar" +
                        (loss.defined() ? ", got " + shape_str(loss) : ""));
  }
  if (ids_.find(loss.id()) == ids_.end()) {
    throw ContractError("backward: loss tensor is not on this tape");
  }
  // Interior gradients are scoped to one traversal; leaf gradients (the
  // tensors fed into the tape) accumulate across calls.
  for (Tensor& out : outputs_) out.d_->grad.clear();
  auto& g = loss.d_->grad;
  if (g.empty()) g.assign(1, 0.0);
  g[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->pull();
}

}  // namespace pegnn
