#pragma once

// Gumbel-Softmax draws over masked categorical slots, and sequential
// without-replacement draws for loop orders. A draw keeps the perturbed
// softmax probabilities and the noise so callers can form surrogate losses
// and check gradients against finite differences at fixed noise.
//
// For soft probabilities p = softmax((logits + g) / temp) restricted to the
// active set, the Jacobian is d p_c / d logit_j = p_c (delta_cj - p_j) / temp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nacs/prng.hpp"

namespace nacs {

struct GumbelDraw {
  int choice = -1;                 // argmax of perturbed logits on the active set
  std::vector<double> soft;        // perturbed softmax, zero off the active set
  std::vector<double> noise;       // the Gumbel draws, zero off the active set
  std::vector<int> active;
};

inline std::vector<double> masked_softmax(const std::vector<double>& scores,
                                          const std::vector<int>& active, double temp) {
  if (active.empty()) throw std::invalid_argument("masked_softmax: empty active set");
  if (temp <= 0.0) throw std::invalid_argument("masked_softmax: temperature must be positive");
  double mx = scores[active.front()];
  for (int i : active) mx = std::max(mx, scores[i]);
  double denom = 0.0;
  std::vector<double> soft(scores.size(), 0.0);
  for (int i : active) {
    soft[i] = std::exp((scores[i] - mx) / temp);
    denom += soft[i];
  }
  for (int i : active) soft[i] /= denom;
  return soft;
}

inline GumbelDraw gumbel_softmax_sample(const std::vector<double>& logits,
                                        const std::vector<int>& active, double temp, Rng& rng) {
  GumbelDraw d;
  d.active = active;
  d.noise.assign(logits.size(), 0.0);
  std::vector<double> scores(logits.size(), 0.0);
  for (int i : active) {
    d.noise[i] = gumbel_noise(rng);
    scores[i] = logits[i] + d.noise[i];
  }
  d.choice = active.front();
  for (int i : active)
    if (scores[i] > scores[d.choice]) d.choice = i;
  d.soft = masked_softmax(scores, active, temp);
  return d;
}

// Accumulate d(p[choice])/d(logits) scaled by `scale` into grad.
inline void add_soft_choice_grad(const GumbelDraw& d, double temp, double scale,
                                 std::vector<double>& grad) {
  const double pc = d.soft[d.choice];
  for (int j : d.active) {
    double delta = (j == d.choice) ? 1.0 : 0.0;
    grad[j] += scale * pc * (delta - d.soft[j]) / temp;
  }
}

// Sequential selection of a permutation of n items from an n x n score
// matrix: pick i-th position among the items not yet taken, each pick its own
// Gumbel-Softmax draw over row i.
struct OrderDraw {
  std::vector<int> perm;            // perm[i] = item placed at position i
  std::vector<GumbelDraw> picks;    // one per position
};

template <typename Matrix>
inline OrderDraw sample_order(const Matrix& rows, int n, double temp, Rng& rng) {
  OrderDraw od;
  std::vector<int> remaining;
  for (int i = 0; i < n; ++i) remaining.push_back(i);
  for (int pos = 0; pos < n; ++pos) {
    std::vector<double> logits(rows[pos].begin(), rows[pos].end());
    GumbelDraw d = gumbel_softmax_sample(logits, remaining, temp, rng);
    od.perm.push_back(d.choice);
    remaining.erase(std::find(remaining.begin(), remaining.end(), d.choice));
    od.picks.push_back(std::move(d));
  }
  return od;
}

}  // namespace nacs
