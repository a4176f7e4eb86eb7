#pragma once

// Batched per-sensor arithmetic for scalar observations (d_y = 1).
//
// Every kernel has a portable scalar reference and, on x86-64, an AVX2+FMA
// variant. The variant is picked once per process from CPUID; setting
// VBAKF_KERNELS=scalar (or avx2) in the environment overrides the choice.
// Variants agree with the reference to rounding (summation order and FMA
// contraction differ), which the kernel equivalence tests pin.

#include <span>
#include <string_view>

namespace vbakf::kernels {

/// Log-evidence pair for one scalar residual r = y - center:
///   clean   = clean_offset   - 0.5 * clean_precision   * r^2
///   corrupt = corrupt_offset - 0.5 * corrupt_precision * r^2
struct EvidenceCoefficients {
    double clean_offset = 0.0;
    double clean_precision = 0.0;
    double corrupt_offset = 0.0;
    double corrupt_precision = 0.0;
};

/// Responsibility-weighted sums over received sensors.
struct SoftCounts {
    double clean = 0.0;          ///< sum pi
    double corrupt = 0.0;        ///< sum (1 - pi)
    double clean_squares = 0.0;  ///< sum pi * (y - center)^2
};

using LogEvidenceFn = void (*)(std::span<const double> y, double center, const EvidenceCoefficients& c,
                               std::span<double> clean, std::span<double> corrupt);
using SoftCountsFn = SoftCounts (*)(std::span<const double> y, std::span<const double> pi, double center);
using SumSquaredDifferenceFn = double (*)(std::span<const double> a, std::span<const double> b);

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    LogEvidenceFn log_evidence;
    SoftCountsFn soft_counts;
    SumSquaredDifferenceFn sum_squared_difference;
};

/// True when the variant is compiled in and the CPU supports it.
bool available(Isa isa);

/// Table for a specific variant; throws std::invalid_argument if unavailable.
const KernelTable& table(Isa isa);

/// The process-wide selection (best available, or the environment override).
const KernelTable& active();

namespace scalar {
void log_evidence(std::span<const double> y, double center, const EvidenceCoefficients& c,
                  std::span<double> clean, std::span<double> corrupt);
SoftCounts soft_counts(std::span<const double> y, std::span<const double> pi, double center);
double sum_squared_difference(std::span<const double> a, std::span<const double> b);
} // namespace scalar

#if defined(VBAKF_HAVE_AVX2)
namespace avx2 {
void log_evidence(std::span<const double> y, double center, const EvidenceCoefficients& c,
                  std::span<double> clean, std::span<double> corrupt);
SoftCounts soft_counts(std::span<const double> y, std::span<const double> pi, double center);
double sum_squared_difference(std::span<const double> a, std::span<const double> b);
} // namespace avx2
#endif

} // namespace vbakf::kernels
