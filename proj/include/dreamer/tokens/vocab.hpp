#pragma once

#include "dreamer/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dreamer::tokens {

using Token = std::uint32_t;

/// Mixed-radix factorization of a token index into k digits base v_f,
/// least-significant digit first: z = sum_i digit_i * v_f^i.
class FactorizedVocab {
 public:
  FactorizedVocab(std::uint32_t factor_size, int factors);

  std::uint32_t factor_size() const { return factor_size_; }
  int factors() const { return factors_; }
  std::uint64_t size() const { return size_; }

  /// Sentinel one past the last valid token.
  Token mask_token() const { return static_cast<Token>(size_); }

  std::vector<std::uint32_t> decompose(Token z) const;
  void decompose(Token z, std::span<std::uint32_t> digits) const;
  Token compose(std::span<const std::uint32_t> digits) const;

  bool operator==(const FactorizedVocab&) const = default;

 private:
  std::uint32_t factor_size_;
  int factors_;
  std::uint64_t size_;
};

}  // namespace dreamer::tokens
