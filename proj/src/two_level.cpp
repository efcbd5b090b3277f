#include "kerrzeno/two_level.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kz {

namespace {

TwoLevelModel folded(const TwoLevelModel& m)
{
    if (m.n_steps < 1)
        throw std::invalid_argument("TwoLevelModel: n_steps must be >= 1");
    TwoLevelModel out = m;
    out.alpha = fold_overlap_angle(m.alpha).alpha;
    return out;
}

}  // namespace

FoldedAngle fold_overlap_angle(double alpha)
{
    if (!std::isfinite(alpha))
        throw std::invalid_argument("overlap angle must be finite");
    constexpr double pi = std::numbers::pi;
    if (alpha >= 0.0 && alpha <= pi / 2)
        return {alpha, false};
    double a = std::fmod(alpha, pi);
    if (a < 0.0)
        a += pi;
    if (a > pi / 2)
        a = pi - a;
    return {a, true};
}

StochasticMatrix2::StochasticMatrix2(const Eigen::Matrix2d& p) : p_(p)
{
    if ((p_.array() < -1e-12).any() || (p_.array() > 1.0 + 1e-12).any())
        throw std::invalid_argument("StochasticMatrix2: entries must lie in [0, 1]");
}

double StochasticMatrix2::stochasticity_defect() const
{
    return (p_.colwise().sum().array() - 1.0).abs().maxCoeff();
}

std::pair<Eigen::Matrix2d, Eigen::Matrix2d> povm_elements(double alpha)
{
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    Eigen::Matrix2d d1 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d d2 = Eigen::Matrix2d::Zero();
    d1(0, 0) = c * c;
    d2(0, 0) = s * s;
    d2(1, 1) = 1.0;
    return {d1, d2};
}

std::pair<Eigen::Matrix2d, Eigen::Matrix2d> reduced_states(double alpha)
{
    const auto [d1, d2] = povm_elements(alpha);
    Eigen::Matrix2d rho1 = Eigen::Matrix2d::Zero();
    rho1(0, 0) = 1.0;
    return {rho1, d2 / d2.trace()};
}

Eigen::Matrix2cd evolution_unitary(double omega_tau)
{
    const std::complex<double> c = std::cos(omega_tau);
    const std::complex<double> off(0.0, -std::sin(omega_tau));
    Eigen::Matrix2cd u;
    u << c, off, off, c;
    return u;
}

double povm_overlap(double alpha)
{
    const double s = std::sin(2.0 * alpha);
    return s * s / 4.0;
}

StochasticMatrix2 transition_matrix(const TwoLevelModel& model)
{
    const TwoLevelModel m = folded(model);
    const double ca = std::cos(m.alpha);
    const double sa = std::sin(m.alpha);
    const double c2a = ca * ca;
    const double s2a = sa * sa;
    const double cw = std::cos(m.omega_tau());
    const double sw = std::sin(m.omega_tau());
    const double c2w = cw * cw;
    const double s2w = sw * sw;

    Eigen::Matrix2d p;
    p(0, 0) = c2a * c2w;
    p(1, 0) = s2a * c2w + s2w;
    p(0, 1) = c2a * (c2w * s2a + s2w) / (1.0 + s2a);
    p(1, 1) = (c2w * (1.0 + s2a * s2a) + 2.0 * s2a * s2w) / (1.0 + s2a);
    return StochasticMatrix2(p);
}

double survival_exact(const TwoLevelModel& model)
{
    const TwoLevelModel m = folded(model);
    Eigen::Matrix2d base = transition_matrix(m).matrix();
    Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
    for (long n = m.n_steps; n > 0; n >>= 1) {
        if (n & 1)
            acc = (acc * base).eval();
        base = (base * base).eval();
    }
    return acc(0, 0);
}

double survival_closed_form(const TwoLevelModel& model)
{
    const TwoLevelModel m = folded(model);
    const double ca = std::cos(m.alpha);
    const double c2a = ca * ca;
    const double ratio = c2a * std::cos(2.0 * m.omega_tau()) / (2.0 - c2a);
    return c2a / 2.0 + (1.0 - c2a / 2.0) * std::pow(ratio, static_cast<double>(m.n_steps));
}

double survival_asymptotic(double alpha, double omega, double t, long n_steps)
{
    if (n_steps < 1)
        throw std::invalid_argument("survival_asymptotic: n_steps must be >= 1");
    const double n = static_cast<double>(n_steps);
    return 0.5 * (1.0 + std::exp(-2.0 * n * alpha * alpha) * std::exp(-2.0 * omega * omega * t * t / n));
}

std::vector<SweepPoint> scaling_sweep(double c, double beta, double omega, double t,
                                      const std::vector<long>& n_list)
{
    std::vector<SweepPoint> out;
    out.reserve(n_list.size());
    for (long n : n_list) {
        if (n < 1)
            throw std::invalid_argument("scaling_sweep: N must be >= 1");
        const double alpha = c / std::pow(static_cast<double>(n), beta);
        if (!(alpha >= 0.0 && alpha < std::numbers::pi / 2))
            throw std::invalid_argument("scaling_sweep: alpha(N) left [0, pi/2)");
        const TwoLevelModel m{alpha, omega, t / static_cast<double>(n), n};
        out.push_back({n, alpha, survival_closed_form(m)});
    }
    return out;
}

}  // namespace kz
