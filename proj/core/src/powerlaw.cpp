#include "ctrlhier/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctrlhier/parallel.hpp"
#include "ctrlhier/random.hpp"
#include "ctrlhier/zeta.hpp"

namespace ctrlhier {

namespace {

constexpr std::uint64_t kMaxSample = std::uint64_t{1} << 53;

}  // namespace

double power_law_ccdf(double exponent, std::uint64_t xmin, std::uint64_t x) {
  if (x <= xmin) return 1.0;
  return hurwitz_zeta(exponent, static_cast<double>(x)) /
         hurwitz_zeta(exponent, static_cast<double>(xmin));
}

double power_law_mle(std::span<const std::uint64_t> tail, std::uint64_t xmin) {
  const double shift = static_cast<double>(xmin) - 0.5;
  double log_sum = 0.0;
  for (std::uint64_t x : tail) log_sum += std::log(static_cast<double>(x) / shift);
  return 1.0 + static_cast<double>(tail.size()) / log_sum;
}

double power_law_ks(std::span<const std::uint64_t> sorted_tail, double exponent, std::uint64_t xmin) {
  const double norm = hurwitz_zeta(exponent, static_cast<double>(xmin));
  auto cdf = [&](std::uint64_t x) {  // P(X <= x)
    if (x < xmin) return 0.0;
    return 1.0 - hurwitz_zeta(exponent, static_cast<double>(x + 1)) / norm;
  };
  const double m = static_cast<double>(sorted_tail.size());
  double ks = 0.0;
  double prev_emp = 0.0;
  for (std::size_t i = 0; i < sorted_tail.size();) {
    const std::uint64_t v = sorted_tail[i];
    std::size_t j = i;
    while (j < sorted_tail.size() && sorted_tail[j] == v) ++j;
    const double emp = static_cast<double>(j) / m;
    // The empirical CDF is flat on [previous value, v - 1] while the model
    // rises, so the gap just below v is the other candidate for the maximum.
    ks = std::max(ks, std::abs(prev_emp - cdf(v - 1)));
    ks = std::max(ks, std::abs(emp - cdf(v)));
    prev_emp = emp;
    i = j;
  }
  return ks;
}

namespace {

std::vector<std::uint64_t> positive_sorted(std::span<const std::uint64_t> samples) {
  std::vector<std::uint64_t> s;
  s.reserve(samples.size());
  for (auto x : samples)
    if (x > 0) s.push_back(x);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

std::vector<XminCandidate> scan_xmin(std::span<const std::uint64_t> samples, unsigned workers) {
  using C = PowerLawError::Code;
  const auto sorted = positive_sorted(samples);
  if (sorted.size() < kMinTailSize)
    throw PowerLawError(C::insufficient_data,
                        "power-law fit needs at least " + std::to_string(kMinTailSize) +
                            " positive values, got " + std::to_string(sorted.size()));
  if (sorted.front() == sorted.back())
    throw PowerLawError(C::degenerate_sample, "all values equal; no tail variation to fit");

  // Nearest-rank 90th percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(sorted.size())));
  const std::uint64_t p90 = sorted[std::max<std::size_t>(rank, 1) - 1];

  std::vector<std::size_t> starts;  // first index of each admissible xmin
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] > p90) break;
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    if (sorted.size() - i < kMinTailSize) break;
    starts.push_back(i);
  }

  std::vector<XminCandidate> out(starts.size());
  parallel_for(starts.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const auto tail = std::span(sorted).subspan(starts[c]);
      const std::uint64_t xmin = tail.front();
      const double r = power_law_mle(tail, xmin);
      out[c] = {xmin, tail.size(), r, power_law_ks(tail, r, xmin)};
    }
  });
  return out;
}

PowerLawFit fit_power_law(std::span<const std::uint64_t> samples, unsigned workers) {
  const auto scan = scan_xmin(samples, workers);
  const auto best = std::min_element(scan.begin(), scan.end(),
                                     [](const XminCandidate& a, const XminCandidate& b) {
                                       if (a.ks != b.ks) return a.ks < b.ks;
                                       return a.xmin < b.xmin;
                                     });
  PowerLawFit fit;
  fit.exponent = best->exponent;
  fit.xmin = best->xmin;
  fit.n_tail = best->n_tail;
  fit.ks = best->ks;
  fit.se = (fit.exponent - 1.0) / std::sqrt(static_cast<double>(fit.n_tail));
  return fit;
}

std::vector<std::uint64_t> sample_power_law(double exponent, std::uint64_t xmin, std::size_t n,
                                            std::uint64_t seed) {
  using C = PowerLawError::Code;
  if (!(exponent > 1.0) || !std::isfinite(exponent))
    throw PowerLawError(C::bad_exponent, "power-law exponent must be > 1");
  if (xmin < 1) throw PowerLawError(C::bad_parameter, "xmin must be at least 1");

  const double norm = hurwitz_zeta(exponent, static_cast<double>(xmin));
  auto ccdf = [&](std::uint64_t x) {
    return x <= xmin ? 1.0 : hurwitz_zeta(exponent, static_cast<double>(x)) / norm;
  };

  Rng rng(seed);
  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform_open_low();
    // Want the largest x with P(X >= x) >= u. Start from the continuous
    // approximation and bracket around it.
    const double guess = (static_cast<double>(xmin) - 0.5) * std::pow(u, -1.0 / (exponent - 1.0)) + 0.5;
    std::uint64_t x0 = guess >= static_cast<double>(kMaxSample)
                           ? kMaxSample
                           : std::max<std::uint64_t>(xmin, static_cast<std::uint64_t>(guess));
    std::uint64_t lo, hi;  // ccdf(lo) >= u > ccdf(hi)
    if (ccdf(x0) >= u) {
      lo = x0;
      std::uint64_t step = 1;
      for (;;) {
        if (lo >= kMaxSample) {
          hi = lo + 1;
          break;
        }
        const std::uint64_t probe = std::min(lo + step, kMaxSample);
        if (ccdf(probe) < u) {
          hi = probe;
          break;
        }
        lo = probe;
        step *= 2;
      }
    } else {
      hi = x0;
      std::uint64_t step = 1;
      for (;;) {
        const std::uint64_t probe = hi - std::min(step, hi - xmin);
        if (ccdf(probe) >= u) {
          lo = probe;
          break;
        }
        hi = probe;
        step *= 2;
      }
    }
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (ccdf(mid) >= u ? lo : hi) = mid;
    }
    out.push_back(lo);
  }
  return out;
}

double exponent_change(const PowerLawFit& earlier, const PowerLawFit& later) {
  return later.exponent - earlier.exponent;
}

}  // namespace ctrlhier
