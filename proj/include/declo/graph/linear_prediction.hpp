#pragma once

#include <vector>

#include "declo/graph/twist.hpp"

namespace declo {

/// Triangular prediction weights as exact rationals: weight j (for the j-th
/// most recent transform, j = 1..n) is numerators[j-1] / denominator, and
/// the numerators telescope to the denominator n(n+1)/2.
struct PredictionWeights {
  std::vector<long> numerators;
  long denominator = 1;
};

inline PredictionWeights linear_prediction_weights(int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  PredictionWeights w;
  w.denominator = static_cast<long>(n) * (n + 1) / 2;
  w.numerators.reserve(n);
  for (int j = 1; j <= n; ++j) w.numerators.push_back(n - j + 1);
  return w;
}

/// Constant-velocity style prediction: triangular-weighted sum of the last
/// N relative transforms in twist space. `history` is chronological, most
/// recent last. A shorter history reweights over what is available; an
/// empty history (or N = 0) predicts identity.
inline RigidTransform linear_predict(const std::vector<RigidTransform>& history,
                                     int n) {
  const int avail = static_cast<int>(history.size());
  const int used = std::min(n, avail);
  if (used <= 0) return RigidTransform::identity();

  const PredictionWeights w = linear_prediction_weights(used);
  Vec6 acc = Vec6::Zero();
  for (int j = 1; j <= used; ++j) {
    const Twist6 t = Twist6::from_transform(history[avail - j]);
    acc += static_cast<double>(w.numerators[j - 1]) * t.vector();
  }
  acc /= static_cast<double>(w.denominator);
  return Twist6::from_vector(acc).to_transform();
}

}  // namespace declo
