#include "dreamer/dynamics/losses.hpp"

#include <cmath>

namespace dreamer::dynamics {

double cross_entropy(const Eigen::Ref<const VecX<double>>& logits, std::uint32_t target) {
  if (target >= logits.size()) throw InvalidInput("cross_entropy target outside logit range");
  const double max = logits.maxCoeff();
  const double log_sum = max + std::log((logits.array() - max).exp().sum());
  return log_sum - logits[target];
}

double loss_factorized(const MatX<double>& logits, const tokens::TokenGrid& targets, const tokens::MaskSet& mask,
                       const tokens::FactorizedVocab& vocab) {
  const int vf = static_cast<int>(vocab.factor_size());
  const int K = vocab.factors();
  if (logits.cols() != K * vf) throw InvalidInput("logits are not k x v_f wide");
  if (logits.rows() != static_cast<Eigen::Index>(targets.tokens.size()))
    throw InvalidInput("logit rows do not match the target grid");
  if (!logits.allFinite()) throw InvalidInput("logits must be finite");
  if (mask.empty()) return 0.0;
  std::vector<std::uint32_t> digits(static_cast<std::size_t>(K));
  double total = 0.0;
  for (std::size_t pos : mask) {
    if (pos >= targets.tokens.size()) throw InvalidInput("mask position outside the grid");
    vocab.decompose(targets.tokens[pos], digits);
    for (int k = 0; k < K; ++k)
      total += cross_entropy(logits.row(static_cast<Eigen::Index>(pos)).segment(k * vf, vf).transpose(),
                             digits[static_cast<std::size_t>(k)]);
  }
  return total / static_cast<double>(mask.size());
}

double loss_joint(const MatX<double>& pred, const MatX<double>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw InvalidInput("joint prediction and target shapes differ");
  if (pred.rows() == 0) throw InvalidInput("joint loss needs at least one future frame");
  return (pred - target).rowwise().squaredNorm().sum() / static_cast<double>(pred.rows());
}

}  // namespace dreamer::dynamics
