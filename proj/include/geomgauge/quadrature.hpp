// quadrature.hpp — composite trapezoid rules with refinement doubling.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace geomgauge {

// Composite trapezoid on [a,b], doubling the panel count until the result
// changes by less than tol (or the panel count reaches max_panels).
inline double refine_trapezoid(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-6, std::int64_t max_panels = (1 << 20)) {
    std::int64_t n = 64;
    auto eval = [&](std::int64_t panels) {
        const double h = (b - a) / static_cast<double>(panels);
        double s = 0.5 * (f(a) + f(b));
        for (std::int64_t i = 1; i < panels; ++i) s += f(a + h * static_cast<double>(i));
        return s * h;
    };
    double prev = eval(n);
    while (n < max_panels) {
        n *= 2;
        const double cur = eval(n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    return prev;
}

// Same for a periodic integrand over one period (endpoint omitted).
inline double refine_trapezoid_periodic(const std::function<double(double)>& f, double a,
                                        double b, double tol = 1e-6,
                                        std::int64_t max_panels = (1 << 20)) {
    std::int64_t n = 64;
    auto eval = [&](std::int64_t panels) {
        const double h = (b - a) / static_cast<double>(panels);
        double s = 0.0;
        for (std::int64_t i = 0; i < panels; ++i) s += f(a + h * static_cast<double>(i));
        return s * h;
    };
    double prev = eval(n);
    while (n < max_panels) {
        n *= 2;
        const double cur = eval(n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    return prev;
}

// 2-D tensor-product trapezoid with simultaneous doubling in both directions.
inline double refine_trapezoid_2d(const std::function<double(double, double)>& f, double ax,
                                  double bx, double ay, double by, double tol = 1e-6,
                                  std::int64_t max_panels_1d = 2048) {
    std::int64_t n = 16;
    auto eval = [&](std::int64_t panels) {
        const double hx = (bx - ax) / static_cast<double>(panels);
        const double hy = (by - ay) / static_cast<double>(panels);
        double s = 0.0;
        for (std::int64_t i = 0; i <= panels; ++i) {
            const double wx = (i == 0 || i == panels) ? 0.5 : 1.0;
            const double x = ax + hx * static_cast<double>(i);
            for (std::int64_t j = 0; j <= panels; ++j) {
                const double wy = (j == 0 || j == panels) ? 0.5 : 1.0;
                s += wx * wy * f(x, ay + hy * static_cast<double>(j));
            }
        }
        return s * hx * hy;
    };
    double prev = eval(n);
    while (n < max_panels_1d) {
        n *= 2;
        const double cur = eval(n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace geomgauge
