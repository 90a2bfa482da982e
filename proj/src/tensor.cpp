#include "pegnn/tensor.hpp"

#include "pegnn/errors.hpp"

namespace pegnn {

namespace {

void check_shape(int rows, int cols) {
  if (rows < 0 || cols < 0) {
    throw DimensionError("tensor shape must be non-negative, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  check_shape(rows, cols);
  Tensor t;
  t.d_ = std::make_shared<Data>();
  t.d_->rows = rows;
  t.d_->cols = cols;
  t.d_->values.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  t.d_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::full(int rows, int cols, double value, bool requires_grad) {
  Tensor t = zeros(rows, cols, requires_grad);
  for (double& v : t.d_->values) v = value;
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows,
                         bool requires_grad) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.begin()->size());
  Tensor t = zeros(r, c, requires_grad);
  int i = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != c) {
      throw DimensionError("ragged initializer: row " + std::to_string(i) +
                           " has " + std::to_string(row.size()) +
                           " entries, expected " + std::to_string(c));
    }
    int j = 0;
    for (double v : row) t.at(i, j++) = v;
    ++i;
  }
  return t;
}

Tensor Tensor::from_vector(std::vector<double> values, int rows, int cols,
                           bool requires_grad) {
  check_shape(rows, cols);
  if (values.size() != static_cast<std::size_t>(rows) * cols) {
    throw DimensionError("vector of length " + std::to_string(values.size()) +
                         " cannot fill a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " tensor");
  }
  Tensor t;
  t.d_ = std::make_shared<Data>();
  t.d_->rows = rows;
  t.d_->cols = cols;
  t.d_->values = std::move(values);
  t.d_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::column(std::vector<double> values, bool requires_grad) {
  const int n = static_cast<int>(values.size());
  return from_vector(std::move(values), n, 1, requires_grad);
}

const std::vector<double>& Tensor::grad() const {
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
  return d_->grad;
}

double Tensor::grad_at(int r, int c) const {
  if (d_->grad.empty()) return 0.0;
  return d_->grad[index(r, c)];
}

}  // namespace pegnn
