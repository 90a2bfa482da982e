#pragma once

#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pegnn/tensor.hpp"

namespace pegnn {

enum class Reduce { sum, mean, max };

/// Define-by-run reverse-mode differentiation tape.
///
/// Every operation records its inputs, its output and a local gradient rule;
/// records are appended in execution order, so the list is topologically
/// sorted by construction and backward() replays it once, in reverse. A tape
/// is rebuilt for every forward pass (batch graphs change topology each
/// step) and is confined to one thread together with its tensors; distinct
/// tapes are independent.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // c = a · b. Backward: ga += g·bᵀ, gb += aᵀ·g.
  Tensor matmul(const Tensor& a, const Tensor& b);

  // Binary elementwise ops accept equal shapes or a row (1×c), column (r×1)
  // or scalar (1×1) second operand broadcast over the first.
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);

  Tensor relu(const Tensor& a);
  Tensor leaky_relu(const Tensor& a, double slope);
  Tensor exp(const Tensor& a);
  Tensor log(const Tensor& a);

  // Multiply by a compile-time constant; gradient is scaled by the same.
  Tensor scale(const Tensor& a, double c);

  // Row i of the output aggregates source rows whose segment id is i.
  // Empty segments yield zero rows; mean divides by the segment size; max
  // routes the gradient to the first maximal row per column.
  Tensor segment_reduce(Reduce kind, const Tensor& source,
                        std::span<const int> segment_ids, int n_segments);

  // Per-segment exp-normalization of a column of scores, with the segment
  // max subtracted first. Each non-empty segment's outputs sum to 1.
  Tensor segment_softmax(const Tensor& scores, std::span<const int> segment_ids,
                         int n_segments);

  // Output row r is x row indices[r]; backward scatter-adds.
  Tensor gather_rows(const Tensor& x, std::span<const int> indices);

  // Horizontal concatenation [a | b]; rows must match.
  Tensor concat_cols(const Tensor& a, const Tensor& b);

  // 1×1 sum of all entries.
  Tensor sum_all(const Tensor& a);

  // Seeds d(loss)/d(loss) = 1 and replays all records in reverse, adding
  // into the grad buffers of every requires_grad participant. Repeated
  // calls without zero_grad accumulate.
  void backward(const Tensor& loss);

  std::size_t n_records() const { return records_.size(); }
  int node_id(const Tensor& t) const;

 private:
  struct Record {
    std::vector<int> inputs;
    int output;
    std::function<void()> pull;
  };

  int intern(const Tensor& t);
  void record(std::initializer_list<Tensor> inputs, const Tensor& output,
              std::function<void()> pull);
  Tensor result_like(int rows, int cols, bool requires_grad);

  std::vector<Record> records_;
  std::vector<Tensor> outputs_;  // op results; their grads are per-backward
  std::unordered_map<const void*, int> ids_;
  int next_id_ = 0;
};

// Free-function spelling used throughout the spec's contracts.
inline void backward(const Tensor& loss, Tape& tape) { tape.backward(loss); }

}  // namespace pegnn
