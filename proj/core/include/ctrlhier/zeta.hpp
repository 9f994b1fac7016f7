#pragma once

namespace ctrlhier {

// Hurwitz zeta sum_{k>=0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

}  // namespace ctrlhier
