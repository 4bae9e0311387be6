#include "neurokinect/tape.hpp"

#include <cmath>

#include "neurokinect/errors.hpp"

namespace nk {

double apply_act(Act act, double x) {
  switch (act) {
    case Act::Relu: return x > 0.0 ? x : 0.0;
    case Act::Elu: return x > 0.0 ? x : kEluAlpha * (std::exp(x) - 1.0);
    case Act::Selu:
      return x > 0.0 ? kSeluLambda * x
                     : kSeluLambda * kSeluAlpha * (std::exp(x) - 1.0);
    case Act::LeakyRelu: return x > 0.0 ? x : kLeakySlope * x;
    case Act::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Act::Tanh: return std::tanh(x);
  }
  return x;
}

Tensor Tape::alloc(std::vector<int> shape) {
  const std::size_t n = static_cast<std::size_t>(Tensor::numel_of(shape));
  auto it = pool_.find(n);
  if (it != pool_.end() && !it->second.empty()) {
    Tensor t;
    t.shape = std::move(shape);
    t.data = std::move(it->second.back());
    it->second.pop_back();
    return t;
  }
  Tensor t;
  t.shape = std::move(shape);
  t.data.resize(n);
  return t;
}

void Tape::recycle(Tensor& t) {
  if (t.data.empty()) return;
  pool_[t.data.size()].push_back(std::move(t.data));
  t.data.clear();
  t.shape.clear();
}

void Tape::reset() {
  for (auto& v : vals_) recycle(v);
  for (auto& g : grads_) recycle(g);
  vals_.clear();
  grads_.clear();
  nodes_.clear();
}

Tape::ValueId Tape::push(Tensor v, std::function<void(Tape&)> backprop) {
  vals_.push_back(std::move(v));
  nodes_.push_back(Node{std::move(backprop)});
  return static_cast<ValueId>(vals_.size() - 1);
}

Tensor& Tape::grad_buf(ValueId id) {
  if (grads_.size() < vals_.size()) grads_.resize(vals_.size());
  auto& g = grads_[static_cast<std::size_t>(id)];
  if (g.data.empty()) {
    g = alloc(vals_[static_cast<std::size_t>(id)].shape);
    std::fill(g.data.begin(), g.data.end(), 0.0);
  }
  return g;
}

const Tensor& Tape::grad(ValueId id) { return grad_buf(id); }

Tape::ValueId Tape::leaf(Tensor v) { return push(std::move(v), nullptr); }

Tape::ValueId Tape::matmul(ValueId a, ValueId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.shape.size() != 2 || vb.shape.size() != 2 || va.shape[1] != vb.shape[0]) {
    throw Error(ErrorKind::ShapeMismatch,
                "matmul " + va.shape_str() + " * " + vb.shape_str());
  }
  Tensor out = alloc({va.shape[0], vb.shape[1]});
  std::fill(out.data.begin(), out.data.end(), 0.0);
  gemm_nn(out, va, vb, true);
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [a, b, id](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    gemm_nt(t.grad_buf(a), go, t.value(b), true);
    gemm_tn(t.grad_buf(b), t.value(a), go, true);
  };
  return id;
}

Tape::ValueId Tape::add(ValueId a, ValueId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  const bool bias = !same_shape(va, vb);
  if (bias && vb.numel() != va.cols()) {
    throw Error(ErrorKind::ShapeMismatch,
                "add " + va.shape_str() + " + " + vb.shape_str());
  }
  Tensor out = alloc(va.shape);
  const int rows = va.rows(), cols = va.cols();
  if (bias) {
    for (int r = 0; r < rows; ++r) {
      const double* x = va.ptr() + static_cast<std::size_t>(r) * cols;
      double* o = out.ptr() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) o[c] = x[c] + vb.data[static_cast<std::size_t>(c)];
    }
  } else {
    for (std::size_t i = 0; i < va.data.size(); ++i) out.data[i] = va.data[i] + vb.data[i];
  }
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [a, b, bias, id](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    Tensor& ga = t.grad_buf(a);
    for (std::size_t i = 0; i < go.data.size(); ++i) ga.data[i] += go.data[i];
    Tensor& gb = t.grad_buf(b);
    if (bias) {
      const int rows = go.rows(), cols = go.cols();
      for (int r = 0; r < rows; ++r) {
        const double* g = go.ptr() + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) gb.data[static_cast<std::size_t>(c)] += g[c];
      }
    } else {
      for (std::size_t i = 0; i < go.data.size(); ++i) gb.data[i] += go.data[i];
    }
  };
  return id;
}

Tape::ValueId Tape::mul(ValueId a, ValueId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!same_shape(va, vb)) {
    throw Error(ErrorKind::ShapeMismatch,
                "mul " + va.shape_str() + " * " + vb.shape_str());
  }
  Tensor out = alloc(va.shape);
  for (std::size_t i = 0; i < va.data.size(); ++i) out.data[i] = va.data[i] * vb.data[i];
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [a, b, id](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_buf(a);
    Tensor& gb = t.grad_buf(b);
    for (std::size_t i = 0; i < go.data.size(); ++i) {
      ga.data[i] += go.data[i] * vb.data[i];
      gb.data[i] += go.data[i] * va.data[i];
    }
  };
  return id;
}

Tape::ValueId Tape::activation(Act act, ValueId x) {
  const Tensor& vx = value(x);
  Tensor out = alloc(vx.shape);
  for (std::size_t i = 0; i < vx.data.size(); ++i) out.data[i] = apply_act(act, vx.data[i]);
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [act, x, id](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    const Tensor& vx = t.value(x);
    const Tensor& vy = t.value(id);
    Tensor& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < go.data.size(); ++i) {
      double d = 0.0;
      switch (act) {
        case Act::Relu: d = vx.data[i] > 0.0 ? 1.0 : 0.0; break;
        case Act::Elu: d = vx.data[i] > 0.0 ? 1.0 : vy.data[i] + kEluAlpha; break;
        case Act::Selu:
          d = vx.data[i] > 0.0 ? kSeluLambda : vy.data[i] + kSeluLambda * kSeluAlpha;
          break;
        case Act::LeakyRelu: d = vx.data[i] > 0.0 ? 1.0 : kLeakySlope; break;
        case Act::Sigmoid: d = vy.data[i] * (1.0 - vy.data[i]); break;
        case Act::Tanh: d = 1.0 - vy.data[i] * vy.data[i]; break;
      }
      gx.data[i] += go.data[i] * d;
    }
  };
  return id;
}

Tape::ValueId Tape::softmax_rows(ValueId x) {
  const Tensor& vx = value(x);
  if (vx.shape.size() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "softmax expects 2-D, got " + vx.shape_str());
  }
  const int rows = vx.rows(), cols = vx.cols();
  Tensor out = alloc(vx.shape);
  for (int r = 0; r < rows; ++r) {
    const double* in = vx.ptr() + static_cast<std::size_t>(r) * cols;
    double* o = out.ptr() + static_cast<std::size_t>(r) * cols;
    double mx = in[0];
    for (int c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      o[c] = std::exp(in[c] - mx);
      sum += o[c];
    }
    const double inv = 1.0 / sum;
    for (int c = 0; c < cols; ++c) o[c] *= inv;
  }
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [x, id](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    const Tensor& vy = t.value(id);
    Tensor& gx = t.grad_buf(x);
    const int rows = vy.rows(), cols = vy.cols();
    for (int r = 0; r < rows; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += go.data[off + c] * vy.data[off + c];
      for (int c = 0; c < cols; ++c) {
        gx.data[off + c] += (go.data[off + c] - dot) * vy.data[off + c];
      }
    }
  };
  return id;
}

Tape::ValueId Tape::concat_cols(const std::vector<ValueId>& xs) {
  if (xs.empty()) throw Error(ErrorKind::EmptyInput, "concat of zero tensors");
  const int rows = value(xs[0]).rows();
  int total = 0;
  for (ValueId x : xs) {
    const Tensor& v = value(x);
    if (v.shape.size() != 2 || v.rows() != rows) {
      throw Error(ErrorKind::ShapeMismatch, "concat row mismatch " + v.shape_str());
    }
    total += v.cols();
  }
  Tensor out = alloc({rows, total});
  int at = 0;
  for (ValueId x : xs) {
    const Tensor& v = value(x);
    const int c = v.cols();
    for (int r = 0; r < rows; ++r) {
      const double* src = v.ptr() + static_cast<std::size_t>(r) * c;
      double* dst = out.ptr() + static_cast<std::size_t>(r) * total + at;
      for (int j = 0; j < c; ++j) dst[j] = src[j];
    }
    at += c;
  }
  ValueId id = push(std::move(out), nullptr);
  std::vector<ValueId> ins = xs;
  nodes_.back().backprop = [ins, id, rows, total](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    int at = 0;
    for (ValueId x : ins) {
      Tensor& gx = t.grad_buf(x);
      const int c = t.value(x).cols();
      for (int r = 0; r < rows; ++r) {
        const double* src = go.ptr() + static_cast<std::size_t>(r) * total + at;
        double* dst = gx.ptr() + static_cast<std::size_t>(r) * c;
        for (int j = 0; j < c; ++j) dst[j] += src[j];
      }
      at += c;
    }
  };
  return id;
}

Tape::ValueId Tape::slice_cols(ValueId x, int c0, int c1) {
  const Tensor& vx = value(x);
  if (vx.shape.size() != 2 || c0 < 0 || c1 > vx.cols() || c0 >= c1) {
    throw Error(ErrorKind::ShapeMismatch,
                "slice_cols [" + std::to_string(c0) + "," + std::to_string(c1) +
                    ") of " + vx.shape_str());
  }
  const int rows = vx.rows(), cols = vx.cols(), w = c1 - c0;
  Tensor out = alloc({rows, w});
  for (int r = 0; r < rows; ++r) {
    const double* src = vx.ptr() + static_cast<std::size_t>(r) * cols + c0;
    double* dst = out.ptr() + static_cast<std::size_t>(r) * w;
    for (int j = 0; j < w; ++j) dst[j] = src[j];
  }
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [x, id, c0, w](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    Tensor& gx = t.grad_buf(x);
    const int rows = go.rows(), cols = gx.cols();
    for (int r = 0; r < rows; ++r) {
      const double* src = go.ptr() + static_cast<std::size_t>(r) * w;
      double* dst = gx.ptr() + static_cast<std::size_t>(r) * cols + c0;
      for (int j = 0; j < w; ++j) dst[j] += src[j];
    }
  };
  return id;
}

Tape::ValueId Tape::slice_rows(ValueId x, int r0, int r1) {
  const Tensor& vx = value(x);
  if (vx.shape.size() != 2 || r0 < 0 || r1 > vx.rows() || r0 >= r1) {
    throw Error(ErrorKind::ShapeMismatch,
                "slice_rows [" + std::to_string(r0) + "," + std::to_string(r1) +
                    ") of " + vx.shape_str());
  }
  const int cols = vx.cols(), h = r1 - r0;
  Tensor out = alloc({h, cols});
  std::copy(vx.ptr() + static_cast<std::size_t>(r0) * cols,
            vx.ptr() + static_cast<std::size_t>(r1) * cols, out.ptr());
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [x, id, r0, cols, h](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    Tensor& gx = t.grad_buf(x);
    const double* src = go.ptr();
    double* dst = gx.ptr() + static_cast<std::size_t>(r0) * cols;
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * cols; ++i) dst[i] += src[i];
  };
  return id;
}

Tape::ValueId Tape::mean_all(ValueId x) {
  const Tensor& vx = value(x);
  double sum = 0.0;
  for (double v : vx.data) sum += v;
  Tensor out({1});
  out.data[0] = sum / static_cast<double>(vx.numel());
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [x, id](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    Tensor& gx = t.grad_buf(x);
    const double g = go.data[0] / static_cast<double>(gx.numel());
    for (auto& v : gx.data) v += g;
  };
  return id;
}

Tape::ValueId Tape::batch_norm(ValueId x, ValueId gamma, ValueId beta,
                               BatchNormState* state, bool train) {
  const Tensor& vx = value(x);
  if (vx.shape.size() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "batch_norm expects 2-D, got " + vx.shape_str());
  }
  const int rows = vx.rows(), cols = vx.cols();
  const Tensor& vg = value(gamma);
  const Tensor& vb = value(beta);
  if (vg.numel() != cols || vb.numel() != cols) {
    throw Error(ErrorKind::ShapeMismatch, "batch_norm parameter size != features");
  }
  const double eps = state->epsilon;

  Tensor xhat = alloc({rows, cols});
  Tensor invstd = alloc({cols});
  if (train) {
    for (int c = 0; c < cols; ++c) {
      double mu = 0.0;
      for (int r = 0; r < rows; ++r) mu += vx.at(r, c);
      mu /= rows;
      double var = 0.0;
      for (int r = 0; r < rows; ++r) {
        const double d = vx.at(r, c) - mu;
        var += d * d;
      }
      var /= rows;
      const double is = 1.0 / std::sqrt(var + eps);
      invstd.data[static_cast<std::size_t>(c)] = is;
      for (int r = 0; r < rows; ++r) xhat.at(r, c) = (vx.at(r, c) - mu) * is;
      state->running_mean.data[static_cast<std::size_t>(c)] =
          state->momentum * state->running_mean.data[static_cast<std::size_t>(c)] +
          (1.0 - state->momentum) * mu;
      state->running_var.data[static_cast<std::size_t>(c)] =
          state->momentum * state->running_var.data[static_cast<std::size_t>(c)] +
          (1.0 - state->momentum) * var;
    }
  } else {
    for (int c = 0; c < cols; ++c) {
      const double mu = state->running_mean.data[static_cast<std::size_t>(c)];
      const double is =
          1.0 / std::sqrt(state->running_var.data[static_cast<std::size_t>(c)] + eps);
      invstd.data[static_cast<std::size_t>(c)] = is;
      for (int r = 0; r < rows; ++r) xhat.at(r, c) = (vx.at(r, c) - mu) * is;
    }
  }
  Tensor out = alloc({rows, cols});
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out.at(r, c) = vg.data[static_cast<std::size_t>(c)] * xhat.at(r, c) +
                     vb.data[static_cast<std::size_t>(c)];
    }
  }
  ValueId id = push(std::move(out), nullptr);
  // xhat and invstd are moved into the closure for the backward pass.
  nodes_.back().backprop = [x, gamma, beta, id, train, xh = std::move(xhat),
                            is = std::move(invstd)](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    const int rows = go.rows(), cols = go.cols();
    const Tensor& vg = t.value(gamma);
    Tensor& gx = t.grad_buf(x);
    Tensor& gg = t.grad_buf(gamma);
    Tensor& gb = t.grad_buf(beta);
    for (int c = 0; c < cols; ++c) {
      double sum_g = 0.0, sum_gx = 0.0;
      for (int r = 0; r < rows; ++r) {
        const double g = go.at(r, c);
        sum_g += g;
        sum_gx += g * xh.at(r, c);
      }
      gg.data[static_cast<std::size_t>(c)] += sum_gx;
      gb.data[static_cast<std::size_t>(c)] += sum_g;
      const double gamma_is =
          vg.data[static_cast<std::size_t>(c)] * is.data[static_cast<std::size_t>(c)];
      if (train) {
        const double mean_g = sum_g / rows;
        const double mean_gx = sum_gx / rows;
        for (int r = 0; r < rows; ++r) {
          gx.at(r, c) += gamma_is * (go.at(r, c) - mean_g - xh.at(r, c) * mean_gx);
        }
      } else {
        for (int r = 0; r < rows; ++r) gx.at(r, c) += gamma_is * go.at(r, c);
      }
    }
  };
  return id;
}

Tape::ValueId Tape::dropout(ValueId x, double rate, bool train, Rng* rng) {
  if (!train || rate <= 0.0) return x;
  if (rate >= 1.0) {
    throw Error(ErrorKind::InvalidConfig, "dropout rate must be < 1");
  }
  const Tensor& vx = value(x);
  const double keep = 1.0 - rate;
  Tensor mask = alloc(vx.shape);
  for (auto& m : mask.data) m = (rng->uniform01() >= rate) ? 1.0 / keep : 0.0;
  Tensor out = alloc(vx.shape);
  for (std::size_t i = 0; i < vx.data.size(); ++i) out.data[i] = vx.data[i] * mask.data[i];
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [x, id, m = std::move(mask)](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    Tensor& gx = t.grad_buf(x);
    for (std::size_t i = 0; i < go.data.size(); ++i) gx.data[i] += go.data[i] * m.data[i];
  };
  return id;
}

Tape::ValueId Tape::stat_loss(ValueId pred, const Tensor& target, LossValue* report,
                              double eps_var) {
  const Tensor& vp = value(pred);
  if (!same_shape(vp, target)) {
    throw Error(ErrorKind::ShapeMismatch,
                "loss pred " + vp.shape_str() + " vs target " +
                    Tensor(target.shape).shape_str());
  }
  const int rows = vp.rows(), cols = vp.cols();
  std::vector<double> xcol(static_cast<std::size_t>(rows));
  std::vector<double> ycol(static_cast<std::size_t>(rows));
  Tensor colgrad = alloc({rows, cols});
  LossValue acc;
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      xcol[static_cast<std::size_t>(r)] = vp.at(r, c);
      ycol[static_cast<std::size_t>(r)] = target.at(r, c);
    }
    acc += loss_stat(xcol, ycol, eps_var);
    const auto g = loss_stat_grad(xcol, ycol, eps_var);
    for (int r = 0; r < rows; ++r) colgrad.at(r, c) = g[static_cast<std::size_t>(r)];
  }
  if (report) *report = acc;
  Tensor out({1});
  out.data[0] = acc.total;
  ValueId id = push(std::move(out), nullptr);
  nodes_.back().backprop = [pred, id, cg = std::move(colgrad)](Tape& t) {
    const Tensor& go = t.grads_[static_cast<std::size_t>(id)];
    if (go.data.empty()) return;
    Tensor& gp = t.grad_buf(pred);
    const double g = go.data[0];
    for (std::size_t i = 0; i < gp.data.size(); ++i) gp.data[i] += g * cg.data[i];
  };
  return id;
}

void Tape::backward(ValueId loss) {
  const Tensor& vl = value(loss);
  if (!vl.is_scalar()) {
    throw Error(ErrorKind::NonScalarLoss,
                "backward needs a scalar, got " + vl.shape_str());
  }
  grads_.resize(vals_.size());
  grad_buf(loss).data[0] = 1.0;
  for (std::size_t i = static_cast<std::size_t>(loss) + 1; i-- > 0;) {
    if (nodes_[i].backprop && !grads_[i].data.empty()) {
      nodes_[i].backprop(*this);
    }
  }
}

}  // namespace nk
