#pragma once

// Discrete two-outcome POVM with overlapping elements on a qubit driven by
// H = omega sigma_x. Survival of the initial state under N interrupted
// evolutions, exact and in closed form.

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace kz {

struct TwoLevelModel {
    double alpha = 0.0;  ///< overlap angle, radians, folded into [0, pi/2]
    double omega = 1.0;  ///< Rabi rate
    double tau = 0.0;    ///< step duration
    long n_steps = 1;

    double omega_tau() const { return omega * tau; }
};

struct FoldedAngle {
    double alpha;
    bool folded;
};

/// Every quantity depends on alpha through cos^2 and sin^2 only, so alpha
/// is mapped into [0, pi/2] by alpha -> -alpha and alpha -> pi - alpha.
FoldedAngle fold_overlap_angle(double alpha);

/// Column-stochastic matrix of p(j|k), entry (j-1, k-1).
class StochasticMatrix2 {
public:
    explicit StochasticMatrix2(const Eigen::Matrix2d& p);

    const Eigen::Matrix2d& matrix() const { return p_; }
    double operator()(int j, int k) const { return p_(j - 1, k - 1); }
    /// Largest |column sum - 1|.
    double stochasticity_defect() const;

private:
    Eigen::Matrix2d p_;
};

/// Delta_1 = diag(cos^2 a, 0), Delta_2 = diag(sin^2 a, 1).
std::pair<Eigen::Matrix2d, Eigen::Matrix2d> povm_elements(double alpha);
/// Post-measurement states rho_1 = |1><1|, rho_2 = Delta_2 / tr Delta_2.
std::pair<Eigen::Matrix2d, Eigen::Matrix2d> reduced_states(double alpha);
/// exp(-i omega tau sigma_x).
Eigen::Matrix2cd evolution_unitary(double omega_tau);

/// tr(Delta_1 Delta_2) = sin^2(2 alpha) / 4.
double povm_overlap(double alpha);

StochasticMatrix2 transition_matrix(const TwoLevelModel& model);

/// (T^N)_{11} by exponentiation by squaring.
double survival_exact(const TwoLevelModel& model);

/// cos^2 a / 2 + (1 - cos^2 a / 2) [cos^2 a cos(2 omega tau) / (2 - cos^2 a)]^N.
double survival_closed_form(const TwoLevelModel& model);

/// (1/2)(1 + exp(-2 N alpha^2) exp(-2 omega^2 t^2 / N)), for N >> 1, alpha << 1.
double survival_asymptotic(double alpha, double omega, double t, long n_steps);

struct SweepPoint {
    long n;
    double alpha;
    double survival;
};

/// Closed-form survival at fixed total time t with alpha(N) = c / N^beta.
std::vector<SweepPoint> scaling_sweep(double c, double beta, double omega, double t,
                                      const std::vector<long>& n_list);

}  // namespace kz
