#pragma once

#include <cmath>
#include <vector>

#include "elemap/core.hpp"
#include "elemap/rng.hpp"

namespace elemap {

// Minimal CHW tensor used by the mapping model. Double precision so gradient
// checks against central differences are meaningful.
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(size_t(c_) * h_ * w_, 0.0) {}

  double& at(int ch, int y, int x) { return v[(size_t(ch) * h + y) * w + x]; }
  double at(int ch, int y, int x) const { return v[(size_t(ch) * h + y) * w + x]; }
  size_t size() const { return v.size(); }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

// 2-D convolution with square kernel, zero padding, stride 1 or 2.
struct ConvLayer {
  int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
  std::vector<double> weight;  // [out_c][in_c][k][k]
  std::vector<double> bias;    // [out_c]
  std::vector<double> grad_w;
  std::vector<double> grad_b;

  ConvLayer() = default;
  ConvLayer(int ic, int oc, int kk, int s)
      : in_c(ic), out_c(oc), k(kk), stride(s), pad(kk / 2),
        weight(size_t(oc) * ic * kk * kk, 0.0), bias(oc, 0.0),
        grad_w(weight.size(), 0.0), grad_b(oc, 0.0) {}

  size_t param_count() const { return weight.size() + bias.size(); }

  void init_he_uniform(Rng& rng) {
    const double limit = std::sqrt(6.0 / (double(in_c) * k * k));
    for (auto& w : weight) w = rng.uniform(-limit, limit);
    for (auto& b : bias) b = 0.0;
  }

  int out_h(int in_h) const { return (in_h + 2 * pad - k) / stride + 1; }
  int out_w(int in_w) const { return (in_w + 2 * pad - k) / stride + 1; }

  double wt(int oc, int ic, int ky, int kx) const {
    return weight[((size_t(oc) * in_c + ic) * k + ky) * k + kx];
  }
  double& gw(int oc, int ic, int ky, int kx) {
    return grad_w[((size_t(oc) * in_c + ic) * k + ky) * k + kx];
  }

  Tensor forward(const Tensor& in) const {
    Tensor out(out_c, out_h(in.h), out_w(in.w));
    for (int oc = 0; oc < out_c; ++oc) {
      for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(oc, y, x) = bias[oc];
      for (int ic = 0; ic < in_c; ++ic)
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const double w = wt(oc, ic, ky, kx);
            for (int y = 0; y < out.h; ++y) {
              const int iy = y * stride + ky - pad;
              if (iy < 0 || iy >= in.h) continue;
              for (int x = 0; x < out.w; ++x) {
                const int ix = x * stride + kx - pad;
                if (ix < 0 || ix >= in.w) continue;
                out.at(oc, y, x) += w * in.at(ic, iy, ix);
              }
            }
          }
    }
    return out;
  }

  // Accumulates parameter gradients and returns the input gradient.
  Tensor backward(const Tensor& in, const Tensor& grad_out) {
    Tensor grad_in(in.c, in.h, in.w);
    for (int oc = 0; oc < out_c; ++oc) {
      double gb = 0.0;
      for (int y = 0; y < grad_out.h; ++y)
        for (int x = 0; x < grad_out.w; ++x) gb += grad_out.at(oc, y, x);
      grad_b[oc] += gb;

      for (int ic = 0; ic < in_c; ++ic)
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const double w = wt(oc, ic, ky, kx);
            double gw_acc = 0.0;
            for (int y = 0; y < grad_out.h; ++y) {
              const int iy = y * stride + ky - pad;
              if (iy < 0 || iy >= in.h) continue;
              for (int x = 0; x < grad_out.w; ++x) {
                const int ix = x * stride + kx - pad;
                if (ix < 0 || ix >= in.w) continue;
                const double g = grad_out.at(oc, y, x);
                gw_acc += g * in.at(ic, iy, ix);
                grad_in.at(ic, iy, ix) += g * w;
              }
            }
            gw(oc, ic, ky, kx) += gw_acc;
          }
    }
    return grad_in;
  }

  void zero_grad() {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
  }
};

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad_from_output(double y) { return y > 0.0 ? 1.0 : y + 1.0; }

inline Tensor elu(const Tensor& t) {
  Tensor out = t;
  for (auto& v : out.v) v = elu(v);
  return out;
}

inline Tensor elu_backward(const Tensor& out, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (size_t i = 0; i < g.v.size(); ++i) g.v[i] *= elu_grad_from_output(out.v[i]);
  return g;
}

// Nearest-neighbor 2x upsample to an explicit target size (odd input sizes
// round down on the way in, so the exact target is passed back in).
inline Tensor upsample_to(const Tensor& in, int th, int tw) {
  Tensor out(in.c, th, tw);
  for (int c = 0; c < in.c; ++c)
    for (int y = 0; y < th; ++y) {
      const int sy = std::min(y / 2, in.h - 1);
      for (int x = 0; x < tw; ++x)
        out.at(c, y, x) = in.at(c, sy, std::min(x / 2, in.w - 1));
    }
  return out;
}

inline Tensor upsample_to_backward(const Tensor& grad_out, int sh, int sw) {
  Tensor g(grad_out.c, sh, sw);
  for (int c = 0; c < grad_out.c; ++c)
    for (int y = 0; y < grad_out.h; ++y) {
      const int sy = std::min(y / 2, sh - 1);
      for (int x = 0; x < grad_out.w; ++x)
        g.at(c, sy, std::min(x / 2, sw - 1)) += grad_out.at(c, y, x);
    }
  return g;
}

inline Tensor concat_channels(const Tensor& a, const Tensor& b) {
  Tensor out(a.c + b.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + std::ptrdiff_t(a.v.size()));
  return out;
}

inline void split_channels(const Tensor& grad, int c_a, Tensor& ga, Tensor& gb) {
  ga = Tensor(c_a, grad.h, grad.w);
  gb = Tensor(grad.c - c_a, grad.h, grad.w);
  std::copy(grad.v.begin(), grad.v.begin() + std::ptrdiff_t(ga.v.size()), ga.v.begin());
  std::copy(grad.v.begin() + std::ptrdiff_t(ga.v.size()), grad.v.end(), gb.v.begin());
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Adam over a flat parameter view.
struct Adam {
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step_count = 0;
  std::vector<double> m, v;

  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    step_count = 0;
  }

  void step(std::vector<double*>& params, std::vector<const double*>& grads,
            const std::vector<size_t>& sizes) {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, double(step_count));
    const double bc2 = 1.0 - std::pow(beta2, double(step_count));
    size_t off = 0;
    for (size_t blk = 0; blk < params.size(); ++blk) {
      double* p = params[blk];
      const double* g = grads[blk];
      for (size_t i = 0; i < sizes[blk]; ++i, ++off) {
        m[off] = beta1 * m[off] + (1.0 - beta1) * g[i];
        v[off] = beta2 * v[off] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[off] / bc1;
        const double vhat = v[off] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
      }
    }
  }
};

}  // namespace elemap
