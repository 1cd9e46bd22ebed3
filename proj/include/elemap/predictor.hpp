#pragma once

#include <chrono>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "elemap/core.hpp"
#include "elemap/nn.hpp"
#include "elemap/rng.hpp"
#include "elemap/sensing.hpp"

namespace elemap {

// Predicted variance is clamped to [1e-4, 25] m^2.
inline const double kLogVarMin = std::log(1e-4);
inline const double kLogVarMax = std::log(25.0);

struct ElevationEstimate {
  Grid mean;          // meters, base-relative
  Grid log_variance;  // log(m^2), clamped

  double variance(int r, int c) const { return std::exp(log_variance.at(r, c)); }
};

// Shallow encoder-decoder with two downsampling stages, skip connections and
// three heads: raw elevation, gating map, log-variance. The published mean is
// the gated combination of the raw head and the input elevations.
struct GatedNet {
  int rows = 31, cols = 31;
  int c1 = 8, c2 = 16, c3 = 32;

  ConvLayer conv_in, conv_d1, conv_d2, conv_b, conv_u1, conv_u0, head;

  GatedNet() = default;
  GatedNet(int rows_, int cols_, int c1_ = 8, int c2_ = 16, int c3_ = 32)
      : rows(rows_), cols(cols_), c1(c1_), c2(c2_), c3(c3_),
        conv_in(2, c1, 3, 1),
        conv_d1(c1, c2, 3, 2),
        conv_d2(c2, c3, 3, 2),
        conv_b(c3, c3, 3, 1),
        conv_u1(c3 + c2, c2, 3, 1),
        conv_u0(c2 + c1, c1, 3, 1),
        head(c1, 3, 1, 1) {}

  static GatedNet random_init(int rows, int cols, std::uint64_t seed,
                              int c1 = 8, int c2 = 16, int c3 = 32) {
    GatedNet net(rows, cols, c1, c2, c3);
    Rng rng(derive_seed(seed, 0x6e31));
    for (ConvLayer* l : net.layers()) l->init_he_uniform(rng);
    return net;
  }

  std::vector<ConvLayer*> layers() {
    return {&conv_in, &conv_d1, &conv_d2, &conv_b, &conv_u1, &conv_u0, &head};
  }
  std::vector<const ConvLayer*> layers() const {
    return {&conv_in, &conv_d1, &conv_d2, &conv_b, &conv_u1, &conv_u0, &head};
  }

  size_t param_count() const {
    size_t n = 0;
    for (const ConvLayer* l : layers()) n += l->param_count();
    return n;
  }

  void zero_grad() {
    for (ConvLayer* l : layers()) l->zero_grad();
  }
};

// Per-sample activations kept for the backward pass.
struct NetTrace {
  Tensor x, a0, a1, a2, b, c1, d1, c0, d0, h;
  Grid gate;      // sigmoid of the gate head
  Grid raw;       // raw elevation head
  Grid lv_raw;    // pre-clamp log-variance
};

namespace detail {

inline Tensor grid_to_input(const LocalGrid& g) {
  Tensor x(2, g.rows, g.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      x.at(0, r, c) = g.elevations.at(r, c);
      x.at(1, r, c) = g.is_valid(r, c) ? 1.0 : 0.0;
    }
  return x;
}

inline ElevationEstimate forward(const GatedNet& net, const LocalGrid& input,
                                 NetTrace* trace) {
  if (input.rows != net.rows || input.cols != net.cols)
    throw ShapeMismatch("input grid does not match net configuration");

  NetTrace local;
  NetTrace& t = trace ? *trace : local;
  t.x = grid_to_input(input);
  t.a0 = elu(net.conv_in.forward(t.x));
  t.a1 = elu(net.conv_d1.forward(t.a0));
  t.a2 = elu(net.conv_d2.forward(t.a1));
  t.b = elu(net.conv_b.forward(t.a2));
  t.c1 = concat_channels(upsample_to(t.b, t.a1.h, t.a1.w), t.a1);
  t.d1 = elu(net.conv_u1.forward(t.c1));
  t.c0 = concat_channels(upsample_to(t.d1, t.a0.h, t.a0.w), t.a0);
  t.d0 = elu(net.conv_u0.forward(t.c0));
  t.h = net.head.forward(t.d0);

  const int R = input.rows, C = input.cols;
  t.raw = Grid(R, C);
  t.gate = Grid(R, C);
  t.lv_raw = Grid(R, C);

  ElevationEstimate est;
  est.mean = Grid(R, C);
  est.log_variance = Grid(R, C);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const double raw = t.h.at(0, r, c);
      const double g = sigmoid(t.h.at(1, r, c));
      const double lv = t.h.at(2, r, c);
      t.raw.at(r, c) = raw;
      t.gate.at(r, c) = g;
      t.lv_raw.at(r, c) = lv;
      est.mean.at(r, c) = g * raw + (1.0 - g) * input.elevations.at(r, c);
      est.log_variance.at(r, c) = std::clamp(lv, kLogVarMin, kLogVarMax);
    }
  return est;
}

// Accumulates parameter gradients from loss gradients on (mean, log_variance).
inline void backward(GatedNet& net, const LocalGrid& input, const NetTrace& t,
                     const Grid& dmean, const Grid& dlogvar) {
  const int R = input.rows, C = input.cols;
  Tensor dh(3, R, C);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const double g = t.gate.at(r, c);
      const double raw = t.raw.at(r, c);
      const double dm = dmean.at(r, c);
      dh.at(0, r, c) = dm * g;
      dh.at(1, r, c) = dm * (raw - input.elevations.at(r, c)) * g * (1.0 - g);
      const double lv = t.lv_raw.at(r, c);
      dh.at(2, r, c) =
          (lv > kLogVarMin && lv < kLogVarMax) ? dlogvar.at(r, c) : 0.0;
    }

  Tensor dd0 = net.head.backward(t.d0, dh);
  Tensor dc0 = net.conv_u0.backward(t.c0, elu_backward(t.d0, dd0));
  Tensor du0, da0;
  split_channels(dc0, t.d1.c, du0, da0);
  Tensor dd1 = upsample_to_backward(du0, t.d1.h, t.d1.w);
  Tensor dc1 = net.conv_u1.backward(t.c1, elu_backward(t.d1, dd1));
  Tensor du1, da1;
  split_channels(dc1, t.b.c, du1, da1);
  Tensor db = upsample_to_backward(du1, t.b.h, t.b.w);
  Tensor da2 = net.conv_b.backward(t.a2, elu_backward(t.b, db));
  {
    Tensor g = net.conv_d2.backward(t.a1, elu_backward(t.a2, da2));
    for (size_t i = 0; i < da1.v.size(); ++i) da1.v[i] += g.v[i];
  }
  {
    Tensor g = net.conv_d1.backward(t.a0, elu_backward(t.a1, da1));
    for (size_t i = 0; i < da0.v.size(); ++i) da0.v[i] += g.v[i];
  }
  net.conv_in.backward(t.x, elu_backward(t.a0, da0));
}

}  // namespace detail

inline ElevationEstimate predict(const GatedNet& net, const LocalGrid& input) {
  return detail::forward(net, input, nullptr);
}

struct BetaNllResult {
  double loss = 0.0;
  Grid dmean;
  Grid dlogvar;
  int valid_cells = 0;
};

// Gaussian negative log-likelihood with a stop-gradient variance^beta factor,
// averaged over valid label cells. The factor scales both the loss value and
// the analytic gradients but is constant under differentiation.
inline BetaNllResult beta_nll(const ElevationEstimate& pred,
                              const LocalGrid& label, double beta) {
  if (!pred.mean.same_shape(label.elevations) ||
      !pred.log_variance.same_shape(label.elevations))
    throw ShapeMismatch("prediction and label shapes differ");
  if (beta < 0.0 || beta > 1.0) throw Error("beta must lie in [0, 1]");

  const int R = label.rows, C = label.cols;
  BetaNllResult res;
  res.dmean = Grid(R, C, 0.0);
  res.dlogvar = Grid(R, C, 0.0);

  int count = 0;
  for (const auto v : label.valid.data) count += v != 0;
  res.valid_cells = count;
  if (count == 0) return res;

  double loss = 0.0;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      if (!label.is_valid(r, c)) continue;
      const double y = label.elevations.at(r, c);
      const double mu = pred.mean.at(r, c);
      const double lv = pred.log_variance.at(r, c);
      const double var = std::exp(lv);
      const double weight = std::pow(var, beta);  // stop-gradient factor
      const double resid = y - mu;
      const double nll = 0.5 * lv + resid * resid / (2.0 * var);
      loss += weight * nll;
      // Base (beta = 0) gradients of the mean loss; the weight multiplies
      // them unchanged, preserving the stop-gradient semantics exactly.
      const double base_dmu = ((mu - y) / var) / count;
      const double base_dlv = (0.5 - resid * resid / (2.0 * var)) / count;
      res.dmean.at(r, c) = weight * base_dmu;
      res.dlogvar.at(r, c) = weight * base_dlv;
    }
  res.loss = loss / count;
  return res;
}

// Total variation of each label grid (mean absolute forward difference over
// valid cell pairs), normalized into batch weights w_b = TV_b / (sum + eps).
inline double total_variation(const LocalGrid& g) {
  double tv = 0.0;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      if (!g.is_valid(r, c)) continue;
      if (c + 1 < g.cols && g.is_valid(r, c + 1))
        tv += std::abs(g.elevations.at(r, c + 1) - g.elevations.at(r, c));
      if (r + 1 < g.rows && g.is_valid(r + 1, c))
        tv += std::abs(g.elevations.at(r + 1, c) - g.elevations.at(r, c));
    }
  return tv / (double(g.rows) * g.cols);
}

inline std::vector<double> tv_weights(const std::vector<const LocalGrid*>& labels,
                                      double epsilon) {
  if (labels.empty()) throw Error("tv_weights needs at least one sample");
  if (!(epsilon > 0.0)) throw Error("tv epsilon must be positive");
  std::vector<double> tv(labels.size());
  double sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    tv[i] = total_variation(*labels[i]);
    sum += tv[i];
  }
  for (auto& w : tv) w = w / (sum + epsilon);
  return tv;
}

struct TrainConfig {
  double beta = 0.5;
  double learning_rate = 2e-3;
  int batch_size = 32;
  int epochs = 24;
  double tv_epsilon = 1e-6;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  int c1 = 8, c2 = 16, c3 = 32;

  void validate() const {
    if (beta < 0.0 || beta > 1.0) throw Error("beta must lie in [0, 1]");
    if (!(tv_epsilon > 0.0)) throw Error("tv epsilon must be positive");
    if (batch_size < 1 || epochs < 1) throw Error("bad train config");
  }
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  GatedNet net;
  std::vector<EpochStats> curve;
  double seconds = 0.0;
};

// Plain (unweighted) mean beta-NLL of a net over a sample range.
inline double evaluate_loss(const GatedNet& net,
                            const std::vector<ScanPair>& samples,
                            const std::vector<size_t>& idx, double beta) {
  if (idx.empty()) return 0.0;
  double sum = 0.0;
  for (size_t i : idx)
    sum += beta_nll(predict(net, samples[i].input), samples[i].label, beta).loss;
  return sum / double(idx.size());
}

// Mini-batch training of the gated model with TV-re-weighted beta-NLL.
// Deterministic for a fixed config; throws Divergence on non-finite loss.
inline TrainResult train(const std::vector<ScanPair>& samples,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw Error("training dataset is empty");
  const auto t_start = std::chrono::steady_clock::now();

  const GridConfig grid = samples.front().input.config();
  Rng rng(derive_seed(cfg.seed, 0x7247));

  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);

  const size_t n_val = size_t(std::llround(cfg.val_fraction * double(samples.size())));
  std::vector<size_t> val_idx(order.begin(), order.begin() + std::ptrdiff_t(n_val));
  std::vector<size_t> train_idx(order.begin() + std::ptrdiff_t(n_val), order.end());
  if (train_idx.empty()) std::swap(train_idx, val_idx);
  if (val_idx.empty()) val_idx = train_idx;

  TrainResult result;
  result.net = GatedNet::random_init(grid.rows, grid.cols, cfg.seed, cfg.c1,
                                     cfg.c2, cfg.c3);
  GatedNet& net = result.net;

  Adam opt;
  opt.lr = cfg.learning_rate;
  opt.init(net.param_count());
  std::vector<double*> pblocks;
  std::vector<const double*> gblocks;
  std::vector<size_t> bsizes;
  for (ConvLayer* l : net.layers()) {
    pblocks.push_back(l->weight.data());
    gblocks.push_back(l->grad_w.data());
    bsizes.push_back(l->weight.size());
    pblocks.push_back(l->bias.data());
    gblocks.push_back(l->grad_b.data());
    bsizes.push_back(l->bias.size());
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = train_idx.size(); i > 1; --i)
      std::swap(train_idx[i - 1], train_idx[size_t(rng.uniform_int(0, std::int64_t(i) - 1))]);

    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t start = 0; start < train_idx.size(); start += size_t(cfg.batch_size)) {
      const size_t end = std::min(train_idx.size(), start + size_t(cfg.batch_size));
      const size_t bsz = end - start;

      std::vector<const LocalGrid*> labels(bsz);
      for (size_t b = 0; b < bsz; ++b)
        labels[b] = &samples[train_idx[start + b]].label;
      const std::vector<double> w = tv_weights(labels, cfg.tv_epsilon);

      net.zero_grad();
      double batch_loss = 0.0;
      for (size_t b = 0; b < bsz; ++b) {
        const ScanPair& s = samples[train_idx[start + b]];
        NetTrace trace;
        const ElevationEstimate est = detail::forward(net, s.input, &trace);
        BetaNllResult l = beta_nll(est, s.label, cfg.beta);
        // Objective: mean over the batch of (B * w_b) * L_b, i.e. w_b * L_b
        // summed, so an all-equal batch is weight-neutral.
        batch_loss += w[b] * l.loss;
        for (auto& v : l.dmean.data) v *= w[b];
        for (auto& v : l.dlogvar.data) v *= w[b];
        detail::backward(net, s.input, trace, l.dmean, l.dlogvar);
      }
      if (!std::isfinite(batch_loss))
        throw Divergence("training loss became non-finite at epoch " +
                         std::to_string(epoch));
      opt.step(pblocks, gblocks, bsizes);
      epoch_loss += batch_loss;
      ++batches;
    }

    EpochStats es;
    es.epoch = epoch;
    es.train_loss = batches > 0 ? epoch_loss / batches : 0.0;
    es.val_loss = evaluate_loss(net, samples, val_idx, cfg.beta);
    if (!std::isfinite(es.val_loss))
      throw Divergence("validation loss became non-finite");
    result.curve.push_back(es);
  }

  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

// Training-free stand-in: copies valid cells, fills the rest from the nearest
// valid cell (BFS), and grows the variance with fill distance up to the cap.
inline ElevationEstimate baseline_predict(const LocalGrid& input) {
  const int R = input.rows, C = input.cols;
  ElevationEstimate est;
  est.mean = Grid(R, C, 0.0);
  est.log_variance = Grid(R, C, kLogVarMax);

  std::deque<std::pair<int, int>> queue;
  GridT<int> dist(R, C, -1);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c)
      if (input.is_valid(r, c)) {
        est.mean.at(r, c) = input.elevations.at(r, c);
        dist.at(r, c) = 0;
        queue.push_back({r, c});
      }

  if (queue.empty()) return est;  // flat zero mean, capped variance

  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  while (!queue.empty()) {
    const auto [r, c] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (nr < 0 || nr >= R || nc < 0 || nc >= C || dist.at(nr, nc) >= 0) continue;
      dist.at(nr, nc) = dist.at(r, c) + 1;
      est.mean.at(nr, nc) = est.mean.at(r, c);
      queue.push_back({nr, nc});
    }
  }

  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      const double d = double(dist.at(r, c));
      const double var = std::min(0.01 * sq(1.0 + 0.5 * d), 25.0);
      est.log_variance.at(r, c) = std::log(var);
    }
  return est;
}

}  // namespace elemap
