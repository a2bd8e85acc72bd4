#pragma once

// Reference computations that share no code with the library under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

// Characteristic polynomial coefficients by Faddeev-LeVerrier:
// det(xI - A) = x^n + c[1] x^(n-1) + ... + c[n].
inline std::vector<long double> charpoly(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const M A = a.cast<long double>();
    std::vector<long double> c(static_cast<std::size_t>(n) + 1, 0.0L);
    c[0] = 1.0L;
    M mk = M::Zero(n, n);
    const M id = M::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        mk = A * mk + c[static_cast<std::size_t>(k - 1)] * id;
        c[static_cast<std::size_t>(k)] = -(A * mk).trace() / static_cast<long double>(k);
    }
    return c;
}

inline long double horner(const std::vector<long double>& c, long double x) {
    long double v = 0.0L;
    for (auto coef : c) v = v * x + coef;
    return v;
}

// Real roots of the characteristic polynomial of a symmetric matrix, ascending.
// Scans the Gershgorin interval for sign changes and bisects each bracket.
inline std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& a, int grid = 200000) {
    const auto c = charpoly(a);
    double lo = INFINITY, hi = -INFINITY;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double r = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
        lo = std::min(lo, a(i, i) - r);
        hi = std::max(hi, a(i, i) + r);
    }
    lo -= 1e-6;
    hi += 1e-6;
    std::vector<double> roots;
    long double x0 = lo;
    long double f0 = horner(c, x0);
    for (int g = 1; g <= grid; ++g) {
        const long double x1 = lo + (hi - lo) * static_cast<long double>(g) / grid;
        const long double f1 = horner(c, x1);
        if (f0 == 0.0L) {
            roots.push_back(static_cast<double>(x0));
        } else if ((f0 < 0) != (f1 < 0) && f1 != 0.0L) {
            long double a0 = x0, b0 = x1, fa = f0;
            for (int it = 0; it < 200; ++it) {
                const long double m = 0.5L * (a0 + b0);
                const long double fm = horner(c, m);
                if ((fm < 0) == (fa < 0)) {
                    a0 = m;
                    fa = fm;
                } else {
                    b0 = m;
                }
            }
            roots.push_back(static_cast<double>(0.5L * (a0 + b0)));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

// Marchenko-Pastur density written out directly from the support endpoints.
inline double mp_pdf(double x, double c) {
    const double lm = std::pow(1.0 - 1.0 / std::sqrt(c), 2.0);
    const double lp = std::pow(1.0 + 1.0 / std::sqrt(c), 2.0);
    if (x <= lm || x >= lp) return 0.0;
    return std::sqrt((lp - x) * (x - lm)) / (2.0 * M_PI * x);
}

// Adaptive double-exponential quadrature of f * mp_pdf over the support.
inline double mp_integral(const std::function<double(double)>& f, double c) {
    const double lm = std::pow(1.0 - 1.0 / std::sqrt(c), 2.0);
    const double lp = std::pow(1.0 + 1.0 / std::sqrt(c), 2.0);
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double x) { return f(x) * mp_pdf(x, c); }, lm, lp);
}

// Sample statistics.
inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double skewness(const std::vector<double>& v) {
    const double m = mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        m2 += (x - m) * (x - m);
        m3 += (x - m) * (x - m) * (x - m);
    }
    m2 /= static_cast<double>(v.size());
    m3 /= static_cast<double>(v.size());
    return m3 / std::pow(m2, 1.5);
}

inline double excess_kurtosis(const std::vector<double>& v) {
    const double m = mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d2 = (x - m) * (x - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(v.size());
    m4 /= static_cast<double>(v.size());
    return m4 / (m2 * m2) - 3.0;
}

// Classical RK4 written out independently of the library stepper.
inline std::vector<double> lorenz_rk4(std::vector<double> x, double sigma, double rho, double beta,
                                      double dt, int steps) {
    auto f = [&](const std::vector<double>& s) {
        return std::vector<double>{sigma * (s[1] - s[0]), rho * s[0] - s[1] - s[0] * s[2],
                                   -beta * s[2] + s[0] * s[1]};
    };
    auto axpy = [](const std::vector<double>& a, double h, const std::vector<double>& b) {
        return std::vector<double>{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2]};
    };
    for (int i = 0; i < steps; ++i) {
        const auto k1 = f(x);
        const auto k2 = f(axpy(x, dt / 2, k1));
        const auto k3 = f(axpy(x, dt / 2, k2));
        const auto k4 = f(axpy(x, dt, k3));
        for (int j = 0; j < 3; ++j) x[j] += dt / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    }
    return x;
}

} // namespace oracle
