#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gnids {

/// Dense row-major array of 64-bit floats. Rank 1 ([n]) and rank 2
/// ([rows x cols]) are the only shapes the layers use.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  /// Throws ShapeError when data.size() != product(shape).
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor scalar(double v) { return vector({v}); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape(), 0.0); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;

  bool all_finite() const;
  std::string shape_string() const;
  /// Exact elementwise equality of shape and data.
  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

namespace kernel {
/// C[m x n] = A[m x k] * B[k x n]
void matmul(const Tensor& a, const Tensor& b, Tensor& c);
/// C[k x n] += A[m x k]^T * B[m x n]
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c);
/// C[m x k] += A[m x n] * B[k x n]^T
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
}  // namespace kernel

}  // namespace gnids
