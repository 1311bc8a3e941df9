#pragma once

// Trainable supernet for differentiable operator selection. One supernet
// layer per block site; candidate k at a site is a small dense map
//   O_k(x) = tanh(U_k V_k x + b_k)
// whose rank (and so parameter count) scales with the candidate's workload
// MAC count, or the identity for skip candidates. The layer output is a
// mixture of candidate outputs with Gumbel-Softmax coefficients on the
// architecture logits. A linear head plus cross-entropy closes the loss.
// Gradients for both the weight path and the logit path are computed
// analytically; hard (one-hot) mixing uses the straight-through estimator.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nacs/prng.hpp"
#include "nacs/sampling.hpp"
#include "nacs/workload.hpp"

namespace nacs {

inline constexpr int kMaxSupernetWidth = 64;

using OpCostTable = std::vector<std::vector<double>>;  // sites x candidates

// ------------------------------------------------------------ architecture

struct AlphaParams {
  std::vector<std::vector<double>> logits;  // sites x candidates

  static AlphaParams zeros(const NetworkSpace& space) {
    AlphaParams a;
    for (const auto& site : space.blocks) a.logits.emplace_back(site.candidates.size(), 0.0);
    return a;
  }
};

// Hard Gumbel noise bank, one entry per logit. Drawn once per step and
// shared by the whole batch; kept explicit so gradients can be checked
// against finite differences at fixed noise.
using GumbelNoise = std::vector<std::vector<double>>;

inline GumbelNoise draw_gumbel_noise(const AlphaParams& a, Rng& rng) {
  GumbelNoise g(a.logits.size());
  for (std::size_t l = 0; l < a.logits.size(); ++l) {
    g[l].resize(a.logits[l].size());
    for (auto& x : g[l]) x = gumbel_noise(rng);
  }
  return g;
}

// Per site: argmax candidate, ties to the lowest index.
inline std::vector<int> derive_choices(const AlphaParams& a) {
  std::vector<int> out;
  for (const auto& row : a.logits) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(row.size()); ++k)
      if (row[k] > row[best]) best = k;
    out.push_back(best);
  }
  return out;
}

inline NetworkDesc derive_network(const AlphaParams& a, const NetworkSpace& space) {
  return assemble_network(space, derive_choices(a));
}

// One hard Gumbel sample per site.
inline std::vector<int> sample_choices(const AlphaParams& a, double temp, Rng& rng) {
  std::vector<int> out;
  for (const auto& row : a.logits) {
    std::vector<int> act(row.size());
    for (std::size_t i = 0; i < act.size(); ++i) act[i] = static_cast<int>(i);
    out.push_back(gumbel_softmax_sample(row, act, temp, rng).choice);
  }
  return out;
}

// -------------------------------------------------------------- supernet

struct CandidateOp {
  bool is_skip = false;
  std::int64_t nominal_macs = 0;
  Eigen::MatrixXd u;  // width x rank
  Eigen::MatrixXd v;  // rank x width
  Eigen::VectorXd b;  // width
};

struct SupernetLayer {
  std::vector<CandidateOp> cands;
};

struct Supernet {
  int width = 0;
  int classes = 0;
  NetworkSpace space;
  std::vector<SupernetLayer> layers;
  Eigen::MatrixXd head_w;  // classes x width
  Eigen::VectorXd head_b;
};

inline std::int64_t candidate_macs(const BlockSite& site, const BlockChoice& cand) {
  std::int64_t total = 0;
  for (const auto& l :
       expand_block(cand, site.in_channels, site.out_channels, site.spatial, site.stride))
    total += macs(l);
  return total;
}

inline Supernet build_supernet(const NetworkSpace& space, int width, int classes,
                               std::uint64_t seed) {
  space.check();
  if (width < 1 || width > kMaxSupernetWidth)
    throw std::invalid_argument("supernet: width must be in [1, 64]");
  if (classes < 2) throw std::invalid_argument("supernet: need at least two classes");
  Supernet net;
  net.width = width;
  net.classes = classes;
  net.space = space;
  Rng rng = make_rng(seed, 0x536e6574);

  for (const auto& site : space.blocks) {
    SupernetLayer layer;
    std::int64_t max_macs = 1;
    for (const auto& cand : site.candidates)
      if (!cand.is_skip) max_macs = std::max(max_macs, candidate_macs(site, cand));
    for (const auto& cand : site.candidates) {
      CandidateOp op;
      op.is_skip = cand.is_skip;
      op.nominal_macs = cand.is_skip ? 0 : candidate_macs(site, cand);
      if (!cand.is_skip) {
        const double frac = static_cast<double>(op.nominal_macs) / static_cast<double>(max_macs);
        const int rank = std::clamp<int>(static_cast<int>(std::llround(frac * width)), 1, width);
        op.u.resize(width, rank);
        op.v.resize(rank, width);
        op.b = Eigen::VectorXd::Zero(width);
        const double su = 1.0 / std::sqrt(static_cast<double>(rank));
        const double sv = 1.0 / std::sqrt(static_cast<double>(width));
        for (int i = 0; i < op.u.rows(); ++i)
          for (int j = 0; j < op.u.cols(); ++j) op.u(i, j) = su * normal(rng);
        for (int i = 0; i < op.v.rows(); ++i)
          for (int j = 0; j < op.v.cols(); ++j) op.v(i, j) = sv * normal(rng);
      }
      layer.cands.push_back(std::move(op));
    }
    net.layers.push_back(std::move(layer));
  }
  net.head_w.resize(classes, width);
  const double sh = 1.0 / std::sqrt(static_cast<double>(width));
  for (int i = 0; i < classes; ++i)
    for (int j = 0; j < width; ++j) net.head_w(i, j) = sh * normal(rng);
  net.head_b = Eigen::VectorXd::Zero(classes);
  return net;
}

// --------------------------------------------------------------- datasets

struct Dataset {
  Eigen::MatrixXd x;       // dim x n
  std::vector<int> y;      // n labels
};

struct SyntheticTaskSpec {
  int input_dim = 16;
  int classes = 4;
  int train_size = 256;
  int val_size = 256;
  double center_scale = 3.0;   // cluster center spread
  double noise_sigma = 1.0;    // within-cluster spread
  bool xor_pairs = false;      // each class spans two opposite clusters (not linearly separable)
  std::uint64_t seed = 42;

  void check() const {
    if (input_dim < 1 || classes < 2 || train_size < classes || val_size < classes)
      throw std::invalid_argument("synthetic task: degenerate sizes");
    if (!(center_scale > 0.0) || !(noise_sigma >= 0.0))
      throw std::invalid_argument("synthetic task: bad spreads");
  }
};

struct SyntheticTask {
  Dataset train, val;
};

// Balanced Gaussian clusters: class j gets a random center, samples add
// isotropic noise. Train then val are drawn from one stream, so the splits
// are disjoint and the whole task is a pure function of the spec.
inline SyntheticTask make_synthetic_task(const SyntheticTaskSpec& spec) {
  spec.check();
  Rng rng = make_rng(spec.seed, 0x7461736b);
  Eigen::MatrixXd centers(spec.input_dim, spec.classes);
  for (int j = 0; j < spec.classes; ++j)
    for (int i = 0; i < spec.input_dim; ++i) centers(i, j) = spec.center_scale * normal(rng);

  auto fill = [&](Dataset& d, int n) {
    d.x.resize(spec.input_dim, n);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
      const int cls = i % spec.classes;
      d.y[i] = cls;
      const double sign = spec.xor_pairs && (uniform01(rng) < 0.5) ? -1.0 : 1.0;
      for (int r = 0; r < spec.input_dim; ++r)
        d.x(r, i) = sign * centers(r, cls) + spec.noise_sigma * normal(rng);
    }
  };
  SyntheticTask task;
  fill(task.train, spec.train_size);
  fill(task.val, spec.val_size);
  return task;
}

// ---------------------------------------------------------------- forward

// Everything the backward pass needs, captured during one mixed forward.
struct ForwardTrace {
  struct Layer {
    Eigen::MatrixXd x;                // input (width x batch)
    std::vector<Eigen::MatrixXd> h;   // V x, per candidate (empty for skip)
    std::vector<Eigen::MatrixXd> a;   // candidate outputs
    std::vector<double> soft;         // relaxed coefficients
    std::vector<double> w;            // coefficients actually mixed (one-hot when hard)
    int choice = 0;                   // argmax of perturbed logits
  };
  std::vector<Layer> layers;
  Eigen::MatrixXd y;        // final features
  Eigen::MatrixXd probs;    // head softmax (classes x batch)
};

// Mixing coefficients at fixed noise: relaxed softmax and the perturbed argmax.
inline void mixing_coefficients(const std::vector<double>& logits, const std::vector<double>& g,
                                double temp, bool hard, std::vector<double>& soft,
                                std::vector<double>& w, int& choice) {
  const int n = static_cast<int>(logits.size());
  std::vector<double> scores(n);
  std::vector<int> act(n);
  for (int i = 0; i < n; ++i) {
    scores[i] = logits[i] + g[i];
    act[i] = i;
  }
  soft = masked_softmax(scores, act, temp);
  choice = 0;
  for (int i = 1; i < n; ++i)
    if (scores[i] > scores[choice]) choice = i;
  if (hard) {
    w.assign(n, 0.0);
    w[choice] = 1.0;
  } else {
    w = soft;
  }
}

// Mixed forward through the whole supernet. Returns mean cross-entropy.
inline double supernet_forward(const Supernet& net, const AlphaParams& alpha,
                               const GumbelNoise& noise, double temp, bool hard,
                               const Eigen::MatrixXd& x, const std::vector<int>& labels,
                               ForwardTrace* trace) {
  if (x.rows() != net.width) throw std::invalid_argument("supernet: input width mismatch");
  if (alpha.logits.size() != net.layers.size() || noise.size() != net.layers.size())
    throw std::invalid_argument("supernet: alpha/noise shape mismatch");
  const auto batch = x.cols();
  if (batch == 0 || static_cast<std::size_t>(batch) != labels.size())
    throw std::invalid_argument("supernet: empty batch or label mismatch");

  Eigen::MatrixXd cur = x;
  if (trace) trace->layers.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    std::vector<double> soft, w;
    int choice = 0;
    mixing_coefficients(alpha.logits[l], noise[l], temp, hard, soft, w, choice);

    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(net.width, batch);
    ForwardTrace::Layer* tl = trace ? &trace->layers[l] : nullptr;
    if (tl) {
      tl->x = cur;
      tl->h.resize(layer.cands.size());
      tl->a.resize(layer.cands.size());
      tl->soft = soft;
      tl->w = w;
      tl->choice = choice;
    }
    for (std::size_t k = 0; k < layer.cands.size(); ++k) {
      const auto& op = layer.cands[k];
      Eigen::MatrixXd a;
      if (op.is_skip) {
        a = cur;
      } else {
        Eigen::MatrixXd h = op.v * cur;
        a = ((op.u * h).colwise() + op.b).array().tanh().matrix();
        if (tl) tl->h[k] = std::move(h);
      }
      out.noalias() += w[k] * a;
      if (tl) tl->a[k] = std::move(a);
    }
    cur = std::move(out);
  }

  Eigen::MatrixXd z = (net.head_w * cur).colwise() + net.head_b;
  double loss = 0.0;
  Eigen::MatrixXd probs(net.classes, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    const double m = z.col(j).maxCoeff();
    const Eigen::ArrayXd e = (z.col(j).array() - m).exp();
    const double denom = e.sum();
    probs.col(j) = (e / denom).matrix();
    loss += m + std::log(denom) - z(labels[j], j);
  }
  loss /= static_cast<double>(batch);
  if (trace) {
    trace->y = std::move(cur);
    trace->probs = std::move(probs);
  }
  return loss;
}

// Convenience single-vector mixed forward with explicit coefficients.
inline Eigen::VectorXd forward_mixed_layer(const SupernetLayer& layer,
                                           const std::vector<double>& w,
                                           const Eigen::VectorXd& x) {
  if (w.size() != layer.cands.size())
    throw std::invalid_argument("forward_mixed_layer: coefficient count mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < layer.cands.size(); ++k) {
    const auto& op = layer.cands[k];
    if (op.is_skip)
      out += w[k] * x;
    else
      out += w[k] * ((op.u * (op.v * x) + op.b).array().tanh().matrix());
  }
  return out;
}

// --------------------------------------------------------------- backward

struct OmegaGrads {
  std::vector<std::vector<Eigen::MatrixXd>> du, dv;
  std::vector<std::vector<Eigen::VectorXd>> db;
  Eigen::MatrixXd dhead_w;
  Eigen::VectorXd dhead_b;

  static OmegaGrads zeros(const Supernet& net) {
    OmegaGrads g;
    g.du.resize(net.layers.size());
    g.dv.resize(net.layers.size());
    g.db.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      for (const auto& op : net.layers[l].cands) {
        g.du[l].push_back(Eigen::MatrixXd::Zero(op.u.rows(), op.u.cols()));
        g.dv[l].push_back(Eigen::MatrixXd::Zero(op.v.rows(), op.v.cols()));
        g.db[l].push_back(Eigen::VectorXd::Zero(op.b.size()));
      }
    }
    g.dhead_w = Eigen::MatrixXd::Zero(net.classes, net.width);
    g.dhead_b = Eigen::VectorXd::Zero(net.classes);
    return g;
  }
};

// Backprop of the mean cross-entropy through the traced forward. Fills
// weight gradients and, when dmix is given, d(loss)/d(mixing coefficient)
// per layer and candidate (the hook for the logit path; for hard mixing this
// is the straight-through estimate).
inline void supernet_backward(const Supernet& net, const ForwardTrace& trace,
                              const std::vector<int>& labels, OmegaGrads* wgrads,
                              std::vector<std::vector<double>>* dmix) {
  const auto batch = trace.y.cols();
  Eigen::MatrixXd dz = trace.probs;
  for (Eigen::Index j = 0; j < batch; ++j) dz(labels[j], j) -= 1.0;
  dz /= static_cast<double>(batch);

  if (wgrads) {
    wgrads->dhead_w.noalias() += dz * trace.y.transpose();
    wgrads->dhead_b += dz.rowwise().sum();
  }
  Eigen::MatrixXd dy = net.head_w.transpose() * dz;

  if (dmix) dmix->assign(net.layers.size(), {});
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const auto& layer = net.layers[li];
    const auto& tl = trace.layers[li];
    Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(net.width, batch);
    if (dmix) (*dmix)[li].assign(layer.cands.size(), 0.0);
    for (std::size_t k = 0; k < layer.cands.size(); ++k) {
      const auto& op = layer.cands[k];
      if (dmix) (*dmix)[li][k] = (dy.array() * tl.a[k].array()).sum();
      const double wk = tl.w[k];
      if (op.is_skip) {
        if (wk != 0.0) dx.noalias() += wk * dy;
        continue;
      }
      if (wk == 0.0) continue;
      Eigen::MatrixXd da = wk * dy;
      Eigen::MatrixXd dzk = da.array() * (1.0 - tl.a[k].array().square());
      if (wgrads) {
        wgrads->du[li][k].noalias() += dzk * tl.h[k].transpose();
        wgrads->db[li][k] += dzk.rowwise().sum();
      }
      Eigen::MatrixXd dh = op.u.transpose() * dzk;
      if (wgrads) wgrads->dv[li][k].noalias() += dh * tl.x.transpose();
      dx.noalias() += op.v.transpose() * dh;
    }
    dy = std::move(dx);
  }
}

// Chain d(loss)/d(relaxed coefficient) through the softmax at fixed noise.
inline std::vector<std::vector<double>> alpha_grads_from_mix(
    const ForwardTrace& trace, double temp, const std::vector<std::vector<double>>& dmix) {
  std::vector<std::vector<double>> da(trace.layers.size());
  for (std::size_t l = 0; l < trace.layers.size(); ++l) {
    const auto& soft = trace.layers[l].soft;
    const auto& dw = dmix[l];
    const int n = static_cast<int>(soft.size());
    da[l].assign(n, 0.0);
    double inner = 0.0;
    for (int k = 0; k < n; ++k) inner += dw[k] * soft[k];
    for (int j = 0; j < n; ++j) da[l][j] = soft[j] * (dw[j] - inner) / temp;
  }
  return da;
}

// ---------------------------------------------------------- training steps

struct DnsConfig {
  double lr_omega = 0.05;
  double momentum = 0.9;
  double lr_alpha = 3e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double temp = 3.0;
  bool hard = false;
  int batch = 32;
};

struct OmegaOptState {
  OmegaGrads vel;  // same layout as the gradients
  static OmegaOptState init(const Supernet& net) { return {OmegaGrads::zeros(net)}; }
};

struct AlphaOptState {
  std::vector<std::vector<double>> m, v;
  long t = 0;
  static AlphaOptState init(const AlphaParams& a) {
    AlphaOptState s;
    s.m.resize(a.logits.size());
    s.v.resize(a.logits.size());
    for (std::size_t l = 0; l < a.logits.size(); ++l) {
      s.m[l].assign(a.logits[l].size(), 0.0);
      s.v[l].assign(a.logits[l].size(), 0.0);
    }
    return s;
  }
};

inline void take_batch(const Dataset& d, int batch, Rng& rng, Eigen::MatrixXd& x,
                       std::vector<int>& y) {
  const int n = static_cast<int>(d.y.size());
  const int b = std::min(batch, n);
  x.resize(d.x.rows(), b);
  y.resize(b);
  for (int j = 0; j < b; ++j) {
    const auto i = uniform_index(rng, static_cast<std::size_t>(n));
    x.col(j) = d.x.col(static_cast<Eigen::Index>(i));
    y[j] = d.y[i];
  }
}

// One descent step on the training cross-entropy w.r.t. the supernet weights
// (logits frozen). Returns the batch loss.
inline double train_step_weights(Supernet& net, const AlphaParams& alpha, const Dataset& train,
                                 const DnsConfig& cfg, Rng& rng, OmegaOptState& state) {
  Eigen::MatrixXd x;
  std::vector<int> y;
  take_batch(train, cfg.batch, rng, x, y);
  GumbelNoise noise = draw_gumbel_noise(alpha, rng);

  ForwardTrace trace;
  const double loss = supernet_forward(net, alpha, noise, cfg.temp, cfg.hard, x, y, &trace);
  if (!std::isfinite(loss)) throw std::runtime_error("train_step_weights: non-finite loss");
  OmegaGrads g = OmegaGrads::zeros(net);
  supernet_backward(net, trace, y, &g, nullptr);

  auto sgd = [&](Eigen::MatrixXd& p, Eigen::MatrixXd& v, const Eigen::MatrixXd& grad) {
    v = cfg.momentum * v + grad;
    p -= cfg.lr_omega * v;
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    for (std::size_t k = 0; k < net.layers[l].cands.size(); ++k) {
      auto& op = net.layers[l].cands[k];
      if (op.is_skip) continue;
      sgd(op.u, state.vel.du[l][k], g.du[l][k]);
      sgd(op.v, state.vel.dv[l][k], g.dv[l][k]);
      state.vel.db[l][k] = cfg.momentum * state.vel.db[l][k] + g.db[l][k];
      op.b -= cfg.lr_omega * state.vel.db[l][k];
    }
  sgd(net.head_w, state.vel.dhead_w, g.dhead_w);
  state.vel.dhead_b = cfg.momentum * state.vel.dhead_b + g.dhead_b;
  net.head_b -= cfg.lr_omega * state.vel.dhead_b;
  return loss;
}

// One Adam step on L_val + lambda * sum_lk w_lk * hw_table[l][k] w.r.t. the
// architecture logits (weights frozen). Returns the validation loss part.
inline double update_alpha(const Supernet& net, AlphaParams& alpha, const Dataset& val,
                           const OpCostTable* hw_table, double lambda, const DnsConfig& cfg,
                           Rng& rng, AlphaOptState& state) {
  if (hw_table && hw_table->size() != alpha.logits.size())
    throw std::invalid_argument("update_alpha: hw table row count mismatch");
  Eigen::MatrixXd x;
  std::vector<int> y;
  take_batch(val, cfg.batch, rng, x, y);
  GumbelNoise noise = draw_gumbel_noise(alpha, rng);

  ForwardTrace trace;
  const double loss = supernet_forward(net, alpha, noise, cfg.temp, cfg.hard, x, y, &trace);
  if (!std::isfinite(loss)) throw std::runtime_error("update_alpha: non-finite loss");
  std::vector<std::vector<double>> dmix;
  supernet_backward(net, trace, y, nullptr, &dmix);
  if (hw_table) {
    for (std::size_t l = 0; l < dmix.size(); ++l) {
      if ((*hw_table)[l].size() != dmix[l].size())
        throw std::invalid_argument("update_alpha: hw table column count mismatch");
      for (std::size_t k = 0; k < dmix[l].size(); ++k) dmix[l][k] += lambda * (*hw_table)[l][k];
    }
  }
  auto da = alpha_grads_from_mix(trace, cfg.temp, dmix);

  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < alpha.logits.size(); ++l)
    for (std::size_t k = 0; k < alpha.logits[l].size(); ++k) {
      double& m = state.m[l][k];
      double& v = state.v[l][k];
      m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * da[l][k];
      v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * da[l][k] * da[l][k];
      alpha.logits[l][k] -= cfg.lr_alpha * (m / bc1) / (std::sqrt(v / bc2) + cfg.adam_eps);
    }
  return loss;
}

// Loss and accuracy of the derived (argmax) network path, noise-free.
inline std::pair<double, double> evaluate_derived(const Supernet& net, const AlphaParams& alpha,
                                                  const Dataset& d) {
  const auto choices = derive_choices(alpha);
  Eigen::MatrixXd cur = d.x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    std::vector<double> w(net.layers[l].cands.size(), 0.0);
    w[choices[l]] = 1.0;
    Eigen::MatrixXd out(net.width, cur.cols());
    for (Eigen::Index j = 0; j < cur.cols(); ++j)
      out.col(j) = forward_mixed_layer(net.layers[l], w, cur.col(j));
    cur = std::move(out);
  }
  Eigen::MatrixXd z = (net.head_w * cur).colwise() + net.head_b;
  double loss = 0.0;
  std::int64_t correct = 0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double m = z.col(j).maxCoeff();
    const double denom = (z.col(j).array() - m).exp().sum();
    loss += m + std::log(denom) - z(d.y[static_cast<std::size_t>(j)], j);
    Eigen::Index arg = 0;
    z.col(j).maxCoeff(&arg);
    if (static_cast<int>(arg) == d.y[static_cast<std::size_t>(j)]) ++correct;
  }
  const double n = static_cast<double>(z.cols());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace nacs
