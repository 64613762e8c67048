#include "probsel/numeric.hpp"

#include <limits>

namespace probsel {

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    CompensatedSum sa;
    CompensatedSum sb;
    for (std::size_t i = 0; i < n; ++i) {
        sa += a[i];
        sb += b[i];
    }
    const double ma = sa.value() / static_cast<double>(n);
    const double mb = sb.value() / static_cast<double>(n);
    CompensatedSum cov;
    CompensatedSum va;
    CompensatedSum vb;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(va.value() > 0.0) || !(vb.value() > 0.0)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return cov.value() / std::sqrt(va.value() * vb.value());
}

}  // namespace probsel
