#include "dreamer/tokens/entropy.hpp"

#include <cmath>

namespace dreamer::tokens {

double entropy(const Eigen::Ref<const VecX<double>>& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

double entropy_loss(const MatX<double>& probs, double alpha_sample, double alpha_batch) {
  if (probs.rows() == 0 || probs.cols() == 0) throw InvalidInput("entropy_loss needs a non-empty batch");
  if (!probs.allFinite() || (probs.array() < 0.0).any())
    throw InvalidInput("entropy_loss: probabilities must be finite and non-negative");
  double sample_entropy = 0.0;
  for (Eigen::Index n = 0; n < probs.rows(); ++n) {
    const VecX<double> row = probs.row(n).transpose();
    if (std::abs(row.sum() - 1.0) > 1e-6) throw InvalidInput("entropy_loss: distribution does not sum to 1");
    sample_entropy += entropy(row);
  }
  sample_entropy /= static_cast<double>(probs.rows());
  const VecX<double> mean = probs.colwise().mean().transpose();
  return alpha_sample * sample_entropy - alpha_batch * entropy(mean);
}

}  // namespace dreamer::tokens
