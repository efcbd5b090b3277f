#pragma once

// Real 2x2 phase-space algebra for the linearized Kerr rotation and the
// Gaussian covariance laws of the observed chain.
//
// Conventions: z = (q, p), alpha = (q + i p) / sqrt(2). Angles in radians.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>

namespace kz {

template <typename Scalar>
using PhaseVec = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

using PhaseVector = PhaseVec<double>;
using Matrix2 = Mat2<double>;

template <typename Scalar>
inline bool all_finite(const PhaseVec<Scalar>& z)
{
    return std::isfinite(z(0)) && std::isfinite(z(1));
}

template <typename Scalar>
inline bool all_finite(const Mat2<Scalar>& m)
{
    return m.array().isFinite().all();
}

template <typename Scalar>
inline void require_finite(Scalar x, const char* what)
{
    if (!std::isfinite(x))
        throw std::invalid_argument(std::string(what) + " must be finite");
}

/// Phase-space point from the complex amplitude alpha.
template <typename Scalar>
PhaseVec<Scalar> phase_point(Scalar alpha_re, Scalar alpha_im)
{
    const Scalar s = std::sqrt(Scalar(2));
    return PhaseVec<Scalar>(s * alpha_re, s * alpha_im);
}

/// Squared modulus |alpha|^2 = |z|^2 / 2.
template <typename Scalar>
Scalar photon_number(const PhaseVec<Scalar>& z)
{
    return z.squaredNorm() / Scalar(2);
}

/// M(theta) = [[cos, sin], [-sin, cos]]. Acting on z it maps alpha to
/// alpha * exp(-i theta).
template <typename Scalar>
Mat2<Scalar> rotation_matrix(Scalar theta)
{
    require_finite(theta, "rotation angle");
    const Scalar c = std::cos(theta);
    const Scalar s = std::sin(theta);
    Mat2<Scalar> m;
    m << c, s, -s, c;
    return m;
}

/// Inverse of a rotation. M is orthogonal so this is the transpose.
template <typename Scalar>
Mat2<Scalar> inverse_rotation(const Mat2<Scalar>& m)
{
    return m.transpose();
}

/// Classical Kerr drift alpha(t) = alpha exp(-i omega t); |z| is conserved.
template <typename Scalar>
PhaseVec<Scalar> classical_evolve(const PhaseVec<Scalar>& z0, Scalar omega, Scalar t)
{
    if (!all_finite(z0))
        throw std::invalid_argument("phase point must be finite");
    require_finite(omega, "omega");
    require_finite(t, "time");
    return rotation_matrix(omega * t) * z0;
}

/// Covariance of the seed Wigner function: (1/2) diag(e^{2r}, e^{-2r}).
template <typename Scalar>
Mat2<Scalar> seed_covariance(Scalar r)
{
    require_finite(r, "squeezing parameter");
    Mat2<Scalar> c = Mat2<Scalar>::Zero();
    c(0, 0) = std::exp(Scalar(2) * r) / Scalar(2);
    c(1, 1) = std::exp(Scalar(-2) * r) / Scalar(2);
    return c;
}

/// Single-step kernel covariance C1 written out entrywise.
///
/// This literal form is the reference; step_covariance_by_convolution
/// builds the same matrix as C + M^{-1} C M^{-T}.
template <typename Scalar>
Mat2<Scalar> step_covariance(Scalar r, Scalar theta)
{
    require_finite(r, "squeezing parameter");
    require_finite(theta, "rotation angle");
    const Scalar ch = std::cosh(Scalar(2) * r);
    const Scalar sh = std::sinh(Scalar(2) * r);
    const Scalar c = std::cos(theta);
    const Scalar off = std::sin(Scalar(2) * theta) * sh / Scalar(2);
    Mat2<Scalar> c1;
    c1 << ch + c * c * sh, off, off, ch - c * c * sh;
    return c1;
}

template <typename Scalar>
Mat2<Scalar> step_covariance_by_convolution(Scalar r, Scalar theta)
{
    const Mat2<Scalar> seed = seed_covariance(r);
    const Mat2<Scalar> minv = inverse_rotation(rotation_matrix(theta));
    return seed + minv * seed * minv.transpose();
}

/// Both leading principal minors above 1e-14.
template <typename Scalar>
bool is_positive_definite(const Mat2<Scalar>& c)
{
    constexpr Scalar eps = Scalar(1e-14);
    return c(0, 0) > eps && c.determinant() > eps;
}

template <typename Scalar>
bool is_symmetric(const Mat2<Scalar>& c, Scalar tol = Scalar(1e-12))
{
    return std::abs(c(0, 1) - c(1, 0)) <= tol * (Scalar(1) + c.cwiseAbs().maxCoeff());
}

/// C_N = sum_{j=0}^{N-1} M^{-j} C1 M^{-jT}. Each M^{-j} is formed from the
/// angle j*theta directly, so no rounding accumulates through powers.
template <typename Scalar>
Mat2<Scalar> accumulate_covariance(const Mat2<Scalar>& c1, Scalar theta, long n)
{
    if (n <= 0)
        throw std::invalid_argument("accumulate_covariance: n must be positive");
    if (!is_symmetric(c1) || !is_positive_definite(c1))
        throw std::invalid_argument("accumulate_covariance: c1 must be symmetric positive-definite");
    require_finite(theta, "rotation angle");
    Mat2<Scalar> sum = Mat2<Scalar>::Zero();
    Mat2<Scalar> comp = Mat2<Scalar>::Zero();
    for (long j = 0; j < n; ++j) {
        const Mat2<Scalar> rinv = rotation_matrix(-Scalar(j) * theta);
        // Kahan summation keeps C_N = N I integral for large N.
        const Mat2<Scalar> y = rinv * c1 * rinv.transpose() - comp;
        const Mat2<Scalar> t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum(1, 0) = sum(0, 1);
    return sum;
}

/// Leading asymptotic term N cosh(2r) of sqrt(det C_N) for small Omega*tau
/// and N >> 1.
template <typename Scalar>
Scalar det_cn_asymptotic(Scalar r, long n)
{
    if (n < 1)
        throw std::invalid_argument("det_cn_asymptotic: n must be >= 1");
    return Scalar(n) * std::cosh(Scalar(2) * r);
}

template <typename Scalar>
struct UncertaintyCheck {
    bool satisfied;
    Scalar margin;  ///< det C - 1/4
};

/// Robertson-Schroedinger bound det C >= 1/4. A relative slack of 1e-12 is
/// allowed so that pure seed states, which saturate it, pass.
template <typename Scalar>
UncertaintyCheck<Scalar> rs_uncertainty_check(const Mat2<Scalar>& c)
{
    if (!is_symmetric(c))
        throw std::invalid_argument("rs_uncertainty_check: covariance must be symmetric");
    const Scalar margin = c.determinant() - Scalar(0.25);
    const Scalar slack = Scalar(1e-12) * (Scalar(1) + c.cwiseAbs().maxCoeff() * c.cwiseAbs().maxCoeff());
    return {margin >= -slack, margin};
}

template <typename Scalar>
struct Gaussian2 {
    PhaseVec<Scalar> mean;
    Mat2<Scalar> cov;

    Scalar density(const PhaseVec<Scalar>& z) const
    {
        const PhaseVec<Scalar> d = z - mean;
        const Scalar det = cov.determinant();
        const Scalar quad = d.dot(cov.inverse() * d);
        return std::exp(-quad / Scalar(2)) / (Scalar(2) * std::numbers::pi_v<Scalar> * std::sqrt(det));
    }

    Scalar peak_density() const
    {
        return Scalar(1) / (Scalar(2) * std::numbers::pi_v<Scalar> * std::sqrt(cov.determinant()));
    }
};

using GaussianState2D = Gaussian2<double>;

struct EvolutionParams {
    double chi = 1.0;    ///< Kerr rate (inverse time)
    double n_bar = 0.0;  ///< mean photon number of the initial state
    double tau = 0.0;    ///< duration between measurements
    long n_steps = 1;

    double omega() const { return 2.0 * chi * n_bar; }
    double theta() const { return omega() * tau; }
    double total_time() const { return tau * static_cast<double>(n_steps); }
};

struct ValidityThresholds {
    double max_omega_tau = 0.1;
    double min_n_bar = 10.0;
    double max_relative_spread = 0.3;
};

struct ValidityReport {
    double omega_tau;
    double n_bar;
    double relative_spread;
    bool omega_tau_small;
    bool nbar_large;
    bool relative_spread_small;

    bool all_pass() const { return omega_tau_small && nbar_large && relative_spread_small; }
};

/// Advisory check of the linearization regime; never throws on a violation.
inline ValidityReport validity_report(const EvolutionParams& params, double delta_n_over_nbar,
                                      const ValidityThresholds& th = {})
{
    const double wt = std::abs(params.theta());
    return {wt,
            params.n_bar,
            delta_n_over_nbar,
            wt < th.max_omega_tau,
            params.n_bar > th.min_n_bar,
            delta_n_over_nbar < th.max_relative_spread};
}

}  // namespace kz
