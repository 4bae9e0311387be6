#include "neurokinect/tensor.hpp"

#include <cmath>
#include <sstream>

#include "neurokinect/errors.hpp"

namespace nk {

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

namespace {

void require_2d(const Tensor& t, const char* name) {
  if (t.shape.size() != 2) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(name) + " must be 2-D, got " + t.shape_str());
  }
}

}  // namespace

void gemm_nn(Tensor& c, const Tensor& a, const Tensor& b, bool accumulate) {
  require_2d(a, "gemm A");
  require_2d(b, "gemm B");
  const int m = a.shape[0], k = a.shape[1], n = b.shape[1];
  if (b.shape[0] != k) {
    throw Error(ErrorKind::ShapeMismatch,
                "gemm_nn " + a.shape_str() + " * " + b.shape_str());
  }
  if (c.shape != std::vector<int>{m, n}) c = Tensor({m, n});
  if (!accumulate) std::fill(c.data.begin(), c.data.end(), 0.0);
  const double* __restrict__ pa = a.ptr();
  const double* __restrict__ pb = b.ptr();
  double* __restrict__ pc = c.ptr();
  for (int i = 0; i < m; ++i) {
    const double* ai = pa + static_cast<std::size_t>(i) * k;
    double* ci = pc + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = pb + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_tn(Tensor& c, const Tensor& a, const Tensor& b, bool accumulate) {
  require_2d(a, "gemm A");
  require_2d(b, "gemm B");
  const int k = a.shape[0], m = a.shape[1], n = b.shape[1];
  if (b.shape[0] != k) {
    throw Error(ErrorKind::ShapeMismatch,
                "gemm_tn " + a.shape_str() + "^T * " + b.shape_str());
  }
  if (c.shape != std::vector<int>{m, n}) c = Tensor({m, n});
  if (!accumulate) std::fill(c.data.begin(), c.data.end(), 0.0);
  const double* __restrict__ pa = a.ptr();
  const double* __restrict__ pb = b.ptr();
  double* __restrict__ pc = c.ptr();
  for (int p = 0; p < k; ++p) {
    const double* ap = pa + static_cast<std::size_t>(p) * m;
    const double* bp = pb + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double av = ap[i];
      double* ci = pc + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void gemm_nt(Tensor& c, const Tensor& a, const Tensor& b, bool accumulate) {
  require_2d(a, "gemm A");
  require_2d(b, "gemm B");
  const int m = a.shape[0], k = a.shape[1], n = b.shape[0];
  if (b.shape[1] != k) {
    throw Error(ErrorKind::ShapeMismatch,
                "gemm_nt " + a.shape_str() + " * " + b.shape_str() + "^T");
  }
  if (c.shape != std::vector<int>{m, n}) c = Tensor({m, n});
  if (!accumulate) std::fill(c.data.begin(), c.data.end(), 0.0);
  const double* __restrict__ pa = a.ptr();
  const double* __restrict__ pb = b.ptr();
  double* __restrict__ pc = c.ptr();
  for (int i = 0; i < m; ++i) {
    const double* ai = pa + static_cast<std::size_t>(i) * k;
    double* ci = pc + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = pb + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] += acc;
    }
  }
}

bool all_finite(const Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace nk
