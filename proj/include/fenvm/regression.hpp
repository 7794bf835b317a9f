#ifndef FENVM_REGRESSION_HPP
#define FENVM_REGRESSION_HPP

#include <cstddef>
#include <span>

namespace fenvm {

struct LineFit {
    double slope;
    double intercept;
    double r2;
    std::size_t n;
};

// Ordinary least squares y = slope*x + intercept. Throws FitError when fewer
// than two points are given or all x coincide.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace fenvm

#endif  // FENVM_REGRESSION_HPP
