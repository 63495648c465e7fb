#include "dreamer/tokens/vocab.hpp"

#include <limits>
#include <string>

namespace dreamer::tokens {

FactorizedVocab::FactorizedVocab(std::uint32_t factor_size, int factors)
    : factor_size_(factor_size), factors_(factors), size_(1) {
  if (factor_size < 2) throw InvalidInput("factor size must be at least 2");
  if (factors < 1) throw InvalidInput("need at least one factor");
  for (int i = 0; i < factors; ++i) {
    size_ *= factor_size;
    // The mask sentinel (== size) must still fit a 32-bit token.
    if (size_ >= std::numeric_limits<Token>::max()) throw InvalidInput("factorized vocabulary exceeds 32-bit tokens");
  }
}

void FactorizedVocab::decompose(Token z, std::span<std::uint32_t> digits) const {
  if (z >= size_) throw InvalidInput("token " + std::to_string(z) + " outside vocabulary of size " + std::to_string(size_));
  if (digits.size() != static_cast<std::size_t>(factors_)) throw InvalidInput("digit buffer has wrong length");
  for (int i = 0; i < factors_; ++i) {
    digits[static_cast<std::size_t>(i)] = z % factor_size_;
    z /= factor_size_;
  }
}

std::vector<std::uint32_t> FactorizedVocab::decompose(Token z) const {
  std::vector<std::uint32_t> digits(static_cast<std::size_t>(factors_));
  decompose(z, digits);
  return digits;
}

Token FactorizedVocab::compose(std::span<const std::uint32_t> digits) const {
  if (digits.size() != static_cast<std::size_t>(factors_)) throw InvalidInput("wrong number of digits");
  std::uint64_t z = 0;
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] >= factor_size_) throw InvalidInput("digit " + std::to_string(digits[i]) + " >= factor size");
    z = z * factor_size_ + digits[i];
  }
  return static_cast<Token>(z);
}

}  // namespace dreamer::tokens
