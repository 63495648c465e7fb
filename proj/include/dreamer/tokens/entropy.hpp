#pragma once

#include "dreamer/types.hpp"

namespace dreamer::tokens {

/// Shannon entropy (nats) of one categorical distribution; 0 log 0 = 0.
double entropy(const Eigen::Ref<const VecX<double>>& p);

/// alpha_sample * mean_n H(p_n) - alpha_batch * H(mean_n p_n).
/// `probs` holds one distribution per row; each row must be non-negative and
/// sum to 1 within 1e-6.
double entropy_loss(const MatX<double>& probs, double alpha_sample = 1.0, double alpha_batch = 1.0);

}  // namespace dreamer::tokens
