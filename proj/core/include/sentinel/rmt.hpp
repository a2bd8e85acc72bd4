#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sentinel/test_function.hpp"

namespace sentinel::rmt {

/// N x T real matrix: one row per channel, one column per sample. Entries are finite.
class DataMatrix {
  public:
    DataMatrix() = default;
    explicit DataMatrix(Eigen::MatrixXd values);

    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    /// c = N / T.
    double aspect_ratio() const noexcept {
        return static_cast<double>(rows()) / static_cast<double>(cols());
    }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

  private:
    Eigen::MatrixXd values_;
};

/// M = (1/N) Gamma Gamma^T; exactly symmetric.
class CovarianceMatrix {
  public:
    explicit CovarianceMatrix(Eigen::MatrixXd values);
    Eigen::Index order() const noexcept { return values_.rows(); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

  private:
    Eigen::MatrixXd values_;
};

/// Null-model parameters: aspect ratio c in (0, 1] and fourth cumulant kappa4 >= -2.
struct SpectralNull {
    double c = 1.0;
    double kappa4 = 0.0;

    void validate() const;
};

/// Marchenko-Pastur support for M = (1/N) Gamma Gamma^T.
struct MPLaw {
    double c;
    double lower;
    double upper;

    /// zeta(theta) = 1 + 1/c + (2/sqrt(c)) sin(theta).
    double zeta(double theta) const;
};

enum class Distribution { gaussian, rademacher, uniform };

/// Each row shifted to mean 0 and scaled to population standard deviation 1.
DataMatrix standardize_rows(const DataMatrix& m);

CovarianceMatrix covariance(const DataMatrix& m);

/// Ascending eigenvalues of the symmetrized matrix.
std::vector<double> eigenvalues_sym(const CovarianceMatrix& m);

/// tau_phi = sum_i phi(lambda_i).
double les(std::span<const double> eigenvalues, const TestFunction& phi);

MPLaw mp_support(double c);

/// sqrt((l+ - x)(x - l-)) / (2 pi x) on the support, zero elsewhere.
double mp_density(double lambda, double c);

/// Cumulative MP distribution, by quadrature of mp_density.
double mp_cdf(double lambda, double c);

/// Expected LES under the null: N times the integral of phi against the MP density.
double les_mean(const TestFunction& phi, std::size_t n, double c);

/// Limiting LES variance from the CLT for sample covariance matrices.
double les_variance(const TestFunction& phi, const SpectralNull& null);

/// m4 / m2^2 - 3 over the samples.
double kurtosis_excess(std::span<const double> samples);

/// i.i.d. zero-mean, unit-variance entries.
DataMatrix gen_test_matrix(std::size_t n, std::size_t t, Distribution dist, std::uint64_t seed);

} // namespace sentinel::rmt
