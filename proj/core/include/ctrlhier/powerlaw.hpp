#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctrlhier/error.hpp"

namespace ctrlhier {

class PowerLawError : public Error {
 public:
  enum class Code { insufficient_data, degenerate_sample, bad_exponent, bad_parameter };
  PowerLawError(Code code, std::string message) : Error(std::move(message)), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

// Discrete power law P(x) ~ x^-exponent for x >= xmin.
struct PowerLawFit {
  double exponent = 0.0;
  double se = 0.0;
  std::uint64_t xmin = 1;
  std::size_t n_tail = 0;
  double ks = 0.0;  // Kolmogorov-Smirnov distance at xmin
};

struct XminCandidate {
  std::uint64_t xmin = 1;
  std::size_t n_tail = 0;
  double exponent = 0.0;
  double ks = 0.0;
};

inline constexpr std::size_t kMinTailSize = 50;

// Approximate discrete MLE, 1 + n / sum ln(x / (xmin - 1/2)), over x >= xmin.
double power_law_mle(std::span<const std::uint64_t> tail, std::uint64_t xmin);

// KS distance between the empirical CDF of a sorted tail and the discrete
// power law with the given exponent and xmin, taken over all integers.
double power_law_ks(std::span<const std::uint64_t> sorted_tail, double exponent, std::uint64_t xmin);

// Every admissible xmin (distinct positive values at or below the 90th
// percentile with a tail of at least kMinTailSize) with its fit and KS.
// Zeros are dropped first.
std::vector<XminCandidate> scan_xmin(std::span<const std::uint64_t> samples, unsigned workers = 1);

// Picks the xmin with the smallest KS distance (ties to the smaller xmin);
// se = (exponent - 1) / sqrt(n_tail).
PowerLawFit fit_power_law(std::span<const std::uint64_t> samples, unsigned workers = 1);

// n draws from the discrete power law via inverse CDF on the Hurwitz-zeta
// normalized mass. Values are capped at 2^53.
std::vector<std::uint64_t> sample_power_law(double exponent, std::uint64_t xmin, std::size_t n,
                                            std::uint64_t seed);

// P(X >= x) for the discrete power law.
double power_law_ccdf(double exponent, std::uint64_t xmin, std::uint64_t x);

// Later minus earlier exponent.
double exponent_change(const PowerLawFit& earlier, const PowerLawFit& later);

}  // namespace ctrlhier
