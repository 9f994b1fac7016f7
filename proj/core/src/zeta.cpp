#include "ctrlhier/zeta.hpp"

#include <cmath>
#include <stdexcept>

namespace ctrlhier {

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta requires s > 1");
  if (!(q > 0.0)) throw std::domain_error("hurwitz_zeta requires q > 0");

  // Euler-Maclaurin: direct sum of the first N terms, integral tail and
  // Bernoulli corrections at a = q + N.
  constexpr int kDirect = 10;
  // B_{2j} / (2j)!
  constexpr double kBernoulli[] = {
      1.0 / 12.0,        -1.0 / 720.0,          1.0 / 30240.0,          -1.0 / 1209600.0,
      1.0 / 47900160.0,  -691.0 / 1307674368000.0, 1.0 / 74724249600.0,
  };

  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(q + k, -s);
  const double a = q + kDirect;
  const double a_pow = std::pow(a, -s);
  sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;

  // rising factorial s (s+1) ... (s + 2j - 2) times a^(-s - 2j + 1)
  double factor = s * a_pow / a;
  for (std::size_t j = 0; j < std::size(kBernoulli); ++j) {
    const double term = kBernoulli[j] * factor;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
    const double m = static_cast<double>(2 * j + 1);
    factor *= (s + m) * (s + m + 1.0) / (a * a);
  }
  return sum;
}

}  // namespace ctrlhier
