#pragma once

#include "dreamer/tokens/grid.hpp"

namespace dreamer::dynamics {

inline constexpr double kContactLossWeight = 2.0;
inline constexpr double kJointLossWeight = 1.0;

/// Cross-entropy (nats) of one factor's logits against a target digit.
double cross_entropy(const Eigen::Ref<const VecX<double>>& logits, std::uint32_t target);

/// Mean over masked positions of sum_k CE(logits_k, digit_k(target)).
/// `logits` rows are flat grid positions t*S+s with k*v_f factor-major columns;
/// `targets` must hold valid tokens at every masked position. Empty mask -> 0.
double loss_factorized(const MatX<double>& logits, const tokens::TokenGrid& targets, const tokens::MaskSet& mask,
                       const tokens::FactorizedVocab& vocab);

inline double loss_video(const MatX<double>& logits, const tokens::TokenGrid& targets, const tokens::MaskSet& mask,
                         const tokens::FactorizedVocab& vocab) {
  return loss_factorized(logits, targets, mask, vocab);
}

inline double loss_contact(const MatX<double>& logits, const tokens::TokenGrid& targets, const tokens::MaskSet& mask,
                           const tokens::FactorizedVocab& vocab) {
  return loss_factorized(logits, targets, mask, vocab);
}

/// (1/T_f) sum_t ||pred_t - target_t||^2 over the rows given (future frames).
double loss_joint(const MatX<double>& pred, const MatX<double>& target);

inline double loss_total(double video, double contact, double joint) {
  return video + kContactLossWeight * contact + kJointLossWeight * joint;
}

}  // namespace dreamer::dynamics
