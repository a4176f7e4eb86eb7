#include "vbakf/special.hpp"

#include "vbakf/error.hpp"

#include <cmath>
#include <string>

namespace vbakf {

double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("digamma: argument must be positive and finite, got " + std::to_string(x));
    }
    double shift = 0.0;
    while (x < 6.0) {
        shift += 1.0 / x;
        x += 1.0;
    }
    // ln x - 1/(2x) - sum B_2n / (2n x^2n), six Bernoulli terms.
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv2 * (1.0 / 12.0 -
                inv2 * (1.0 / 120.0 -
                        inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    return std::log(x) - 0.5 * inv - series - shift;
}

} // namespace vbakf
