#include "vbakf/kernels.hpp"

namespace vbakf::kernels::scalar {

void log_evidence(std::span<const double> y, double center, const EvidenceCoefficients& c,
                  std::span<double> clean, std::span<double> corrupt) {
    const double half_clean = 0.5 * c.clean_precision;
    const double half_corrupt = 0.5 * c.corrupt_precision;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - center;
        const double r2 = r * r;
        clean[i] = c.clean_offset - half_clean * r2;
        corrupt[i] = c.corrupt_offset - half_corrupt * r2;
    }
}

SoftCounts soft_counts(std::span<const double> y, std::span<const double> pi, double center) {
    SoftCounts out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - center;
        out.clean += pi[i];
        out.corrupt += 1.0 - pi[i];
        out.clean_squares += pi[i] * (r * r);
    }
    return out;
}

double sum_squared_difference(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

} // namespace vbakf::kernels::scalar
