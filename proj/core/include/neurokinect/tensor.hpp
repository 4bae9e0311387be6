#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace nk {

// Dense row-major tensor of doubles. Double precision everywhere: the models
// here are tiny and gradient-check fidelity matters more than speed.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0);
  }
  Tensor(std::vector<int> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {}

  static std::int64_t numel_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  bool is_scalar() const { return data.size() == 1; }

  // 2-D accessors (row-major).
  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols() + c]; }

  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }

  std::string shape_str() const;
};

bool same_shape(const Tensor& a, const Tensor& b);

// C (+)= A * B with A: m x k, B: k x n. `accumulate` keeps existing C.
void gemm_nn(Tensor& c, const Tensor& a, const Tensor& b, bool accumulate);
// C (+)= A^T * B with A: k x m, B: k x n.
void gemm_tn(Tensor& c, const Tensor& a, const Tensor& b, bool accumulate);
// C (+)= A * B^T with A: m x k, B: n x k.
void gemm_nt(Tensor& c, const Tensor& a, const Tensor& b, bool accumulate);

bool all_finite(const Tensor& t);

}  // namespace nk
