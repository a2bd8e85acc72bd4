#include "sentinel/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "sentinel/error.hpp"
#include "sentinel/quadrature.hpp"

namespace sentinel::rmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMeanNodes = 256;
constexpr std::size_t kVarianceNodes = 64;
constexpr double kStabilityTol = 1e-8;
constexpr double kDiagonalGap = 1e-10;

void check_regime(double c) {
    if (!(c > 0.0) || !(c <= 1.0)) {
        throw DomainError("aspect ratio c=" + std::to_string(c) + " is outside (0, 1]");
    }
}

void check_phi_on_support(const TestFunction& phi, double c) {
    if (phi.requires_positive_argument() && !(c < 1.0)) {
        throw DomainError(phi.name() + " test function needs a support bounded away from zero (c < 1)");
    }
}

// Integral of phi against the MP density after lambda = zeta(theta), which
// removes the square-root endpoint behaviour: density * dlambda = 2 cos^2 / (pi c zeta).
std::pair<double, double> mp_moment(const TestFunction& phi, const MPLaw& law, std::size_t nodes) {
    const auto rule = quad::gauss_legendre(nodes);
    double value = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double theta = 0.5 * kPi * rule.nodes[i];
        const double z = law.zeta(theta);
        const double cs = std::cos(theta);
        const double w = rule.weights[i] * 0.5 * kPi * 2.0 * cs * cs / (kPi * law.c * z);
        const double f = phi(z);
        value += w * f;
        scale += w * std::abs(f);
    }
    return {value, scale};
}

double clt_variance(const TestFunction& phi, const SpectralNull& null, std::size_t nodes) {
    const MPLaw law = mp_support(null.c);
    const auto rule = quad::gauss_legendre(nodes);
    std::vector<double> theta(nodes), s(nodes), z(nodes), f(nodes), df(nodes), w(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        theta[i] = 0.5 * kPi * rule.nodes[i];
        w[i] = 0.5 * kPi * rule.weights[i];
        s[i] = std::sin(theta[i]);
        z[i] = law.zeta(theta[i]);
        f[i] = phi(z[i]);
        df[i] = phi.derivative(z[i]);
    }

    double double_integral = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            const double gap = z[i] - z[j];
            const double psi = std::abs(gap) < kDiagonalGap ? df[i] : (f[i] - f[j]) / gap;
            row += w[j] * psi * psi * (1.0 - s[i] * s[j]);
        }
        double_integral += w[i] * row;
    }

    double single_integral = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) single_integral += w[i] * f[i] * s[i];

    return 2.0 / (null.c * kPi * kPi) * double_integral +
           null.kappa4 / (kPi * kPi) * single_integral * single_integral;
}

} // namespace

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw SizeError("data matrix needs at least one row and one column");
    }
    if (!values_.allFinite()) throw DomainError("data matrix entries must be finite");
}

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols() || values_.rows() < 1) {
        throw SizeError("covariance matrix must be square and non-empty");
    }
    const double scale = std::max(values_.cwiseAbs().maxCoeff(), 1e-300);
    if ((values_ - values_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError("covariance matrix is not symmetric");
    }
}

void SpectralNull::validate() const {
    check_regime(c);
    if (!(kappa4 >= -2.0) || !std::isfinite(kappa4)) {
        throw DomainError("kappa4 must be finite and >= -2");
    }
}

double MPLaw::zeta(double theta) const {
    return 1.0 + 1.0 / c + 2.0 / std::sqrt(c) * std::sin(theta);
}

DataMatrix standardize_rows(const DataMatrix& m) {
    Eigen::MatrixXd out = m.values();
    const auto t = static_cast<double>(out.cols());
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double mean = out.row(r).mean();
        out.row(r).array() -= mean;
        const double var = out.row(r).squaredNorm() / t;
        const double sample_sd = out.cols() > 1 ? std::sqrt(var * t / (t - 1.0)) : 0.0;
        if (!(sample_sd > 1e-12)) {
            throw ZeroVarianceError("channel row " + std::to_string(r) +
                                        " has zero variance and cannot be standardized",
                                    static_cast<std::size_t>(r));
        }
        out.row(r) /= std::sqrt(var);
    }
    return DataMatrix(std::move(out));
}

CovarianceMatrix covariance(const DataMatrix& m) {
    const auto n = m.rows();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    cov.selfadjointView<Eigen::Lower>().rankUpdate(m.values(), 1.0 / static_cast<double>(n));
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return CovarianceMatrix(std::move(cov));
}

std::vector<double> eigenvalues_sym(const CovarianceMatrix& m) {
    const Eigen::MatrixXd sym = 0.5 * (m.values() + m.values().transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symmetric eigen-solver did not converge");
    }
    const auto& ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

double les(std::span<const double> eigenvalues, const TestFunction& phi) {
    double sum = 0.0;
    for (double l : eigenvalues) sum += phi(l);
    return sum;
}

MPLaw mp_support(double c) {
    check_regime(c);
    const double a = 1.0 + 1.0 / c;
    const double b = 2.0 / std::sqrt(c);
    return {c, std::max(a - b, 0.0), a + b};
}

double mp_density(double lambda, double c) {
    const MPLaw law = mp_support(c);
    if (!(lambda > law.lower) || !(lambda < law.upper)) return 0.0;
    return std::sqrt((law.upper - lambda) * (lambda - law.lower)) / (2.0 * kPi * lambda);
}

double mp_cdf(double lambda, double c) {
    const MPLaw law = mp_support(c);
    if (!(lambda > law.lower)) return 0.0;
    if (!(lambda < law.upper)) return 1.0;
    const double a = 1.0 + 1.0 / c;
    const double b = 2.0 / std::sqrt(c);
    const double top = std::asin(std::clamp((lambda - a) / b, -1.0, 1.0));
    static const auto rule = quad::gauss_legendre(128);
    const double value = quad::integrate(
        [&](double theta) {
            const double cs = std::cos(theta);
            return 2.0 * cs * cs / (kPi * c * law.zeta(theta));
        },
        -0.5 * kPi, top, rule);
    return std::clamp(value, 0.0, 1.0);
}

double les_mean(const TestFunction& phi_in, std::size_t n, double c) {
    check_regime(c);
    const MPLaw law = mp_support(c);
    const TestFunction phi = phi_in.has_support() ? phi_in : phi_in.bind_support(law.lower, law.upper);
    check_phi_on_support(phi, c);
    const auto [coarse, coarse_scale] = mp_moment(phi, law, kMeanNodes);
    const auto [fine, fine_scale] = mp_moment(phi, law, 2 * kMeanNodes);
    if (!std::isfinite(fine) ||
        std::abs(fine - coarse) > kStabilityTol * std::max(fine_scale, 1e-300)) {
        throw NumericError("LES mean quadrature did not stabilise for " + phi.name());
    }
    return static_cast<double>(n) * fine;
}

double les_variance(const TestFunction& phi_in, const SpectralNull& null) {
    null.validate();
    const MPLaw law = mp_support(null.c);
    const TestFunction phi = phi_in.has_support() ? phi_in : phi_in.bind_support(law.lower, law.upper);
    check_phi_on_support(phi, null.c);
    const double coarse = clt_variance(phi, null, kVarianceNodes);
    const double fine = clt_variance(phi, null, 2 * kVarianceNodes);
    if (!std::isfinite(fine) ||
        std::abs(fine - coarse) > kStabilityTol * std::max(std::abs(fine), 1.0)) {
        throw NumericError("LES variance quadrature did not stabilise for " + phi.name());
    }
    if (fine < -1e-10) {
        throw NumericError("LES variance quadrature returned a negative value");
    }
    return std::max(fine, 0.0);
}

double kurtosis_excess(std::span<const double> samples) {
    if (samples.size() < 4) throw SizeError("kurtosis needs at least 4 samples");
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : samples) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) throw NumericError("kurtosis of zero-variance samples is undefined");
    return m4 / (m2 * m2) - 3.0;
}

DataMatrix gen_test_matrix(std::size_t n, std::size_t t, Distribution dist, std::uint64_t seed) {
    if (n < 1 || t < 1) throw SizeError("test matrix needs N >= 1 and T >= 1");
    std::mt19937_64 rng(seed);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> flat(-std::sqrt(3.0), std::sqrt(3.0));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            switch (dist) {
            case Distribution::gaussian: m(i, j) = gauss(rng); break;
            case Distribution::rademacher: m(i, j) = coin(rng) ? 1.0 : -1.0; break;
            case Distribution::uniform: m(i, j) = flat(rng); break;
            }
        }
    }
    return DataMatrix(std::move(m));
}

} // namespace sentinel::rmt
