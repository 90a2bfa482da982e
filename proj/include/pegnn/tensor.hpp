#pragma once

#include <initializer_list>
#include <memory>
#include <vector>

namespace pegnn {

class Tape;

/// Dense 2-D matrix of doubles with an optional gradient buffer.
///
/// A Tensor is a cheap shared handle: copies alias the same storage, which
/// is what lets a Tape's backward closures write gradients that the caller
/// observes. Values are written at construction (and by the optimizer
/// between passes); the gradient buffer is allocated lazily on first
/// accumulation and grows by accumulation only.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor full(int rows, int cols, double value, bool requires_grad = false);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows,
                          bool requires_grad = false);
  static Tensor from_vector(std::vector<double> values, int rows, int cols,
                            bool requires_grad = false);
  // n×1 column from a flat vector.
  static Tensor column(std::vector<double> values, bool requires_grad = false);

  bool defined() const { return d_ != nullptr; }
  int rows() const { return d_->rows; }
  int cols() const { return d_->cols; }
  std::size_t size() const { return d_->values.size(); }

  double at(int r, int c) const { return d_->values[index(r, c)]; }
  double& at(int r, int c) { return d_->values[index(r, c)]; }
  const std::vector<double>& values() const { return d_->values; }
  std::vector<double>& values() { return d_->values; }

  bool requires_grad() const { return d_->requires_grad; }

  // Gradient access. Reading the gradient of a tensor that never received
  // one yields zeros of the right size.
  bool has_grad() const { return !d_->grad.empty(); }
  const std::vector<double>& grad() const;
  double grad_at(int r, int c) const;
  void zero_grad() const { d_->grad.clear(); }

  // Identity of the underlying storage; two handles alias iff equal.
  const void* id() const { return d_.get(); }

 private:
  struct Data {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    std::vector<double> grad;  // empty until a backward pass touches it
    bool requires_grad = false;
  };

  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(d_->cols) +
           static_cast<std::size_t>(c);
  }

  std::shared_ptr<Data> d_;

  friend class Tape;
};

}  // namespace pegnn
