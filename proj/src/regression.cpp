#include "fenvm/regression.hpp"

#include <cmath>

#include "fenvm/conduction.hpp"

namespace fenvm {

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw FitError("regression: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 2)
        throw FitError("regression: need at least two points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || sxx <= 1e-300)
        throw FitError("regression: singular (all abscissae equal)");

    LineFit f{};
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.n = n;
    // Flat data is a perfect fit.
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace fenvm
