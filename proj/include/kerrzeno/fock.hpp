#pragma once

// Truncated Fock-space reference implementation of the single-mode Kerr
// problem: coherent and displaced-squeezed states, Kerr propagation,
// moments, and the exact one-step measurement kernel.

#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kerrzeno/phase_space.hpp"

namespace kz {

using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr double default_tail_budget = 1e-10;

/// Thrown when a requested truncation cannot hold the state within the
/// allowed tail mass. required_dim() is the smallest dimension that would.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& what, Index required_dim)
        : std::runtime_error(what), required_dim_(required_dim)
    {
    }
    Index required_dim() const noexcept { return required_dim_; }

private:
    Index required_dim_;
};

class UnsupportedSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// ceil(n_bar + 10 sqrt(n_bar + 1) + 20)
Index recommended_dim(double n_bar);

/// Amplitudes over |0>..|dim-1>, plus the probability weight that fell
/// beyond the truncation when the state was built.
class FockVector {
public:
    FockVector() = default;
    explicit FockVector(Eigen::VectorXcd amps, double tail_mass = 0.0);

    Index dim() const { return amps_.size(); }
    const Eigen::VectorXcd& amps() const { return amps_; }
    Complex operator[](Index n) const { return amps_(n); }
    double tail_mass() const { return tail_mass_; }
    double norm_squared() const { return amps_.squaredNorm(); }

private:
    Eigen::VectorXcd amps_;
    double tail_mass_ = 0.0;
};

/// Seed |psi> of the displaced measurement family |z> = D(alpha)|psi>.
class MeasurementSpec {
public:
    enum class Kind { vacuum, squeezed, custom };

    static MeasurementSpec vacuum() { return MeasurementSpec(Kind::vacuum, 0.0, nullptr); }
    static MeasurementSpec squeezed(double r);
    static MeasurementSpec custom(FockVector seed);

    Kind kind() const { return kind_; }
    /// Squeezing parameter; zero for vacuum and custom seeds.
    double squeezing() const { return r_; }
    bool is_gaussian() const { return kind_ != Kind::custom; }
    /// Vacuum, or squeezed(0), which is the same state.
    bool is_vacuum_like() const { return kind_ == Kind::vacuum || (kind_ == Kind::squeezed && r_ == 0.0); }
    const FockVector& custom_seed() const;

    std::string describe() const;

private:
    MeasurementSpec(Kind k, double r, std::shared_ptr<const FockVector> seed)
        : kind_(k), r_(r), seed_(std::move(seed))
    {
    }

    Kind kind_;
    double r_;
    std::shared_ptr<const FockVector> seed_;
};

/// Truncated ladder operator a with a|n> = sqrt(n)|n-1>.
Eigen::MatrixXd annihilation_matrix(Index dim);
/// a^dagger - a, real antisymmetric tridiagonal.
Eigen::MatrixXd displacement_generator(Index dim);
/// (a^dagger^2 - a^2) / 2, real antisymmetric pentadiagonal.
Eigen::MatrixXd squeeze_generator(Index dim);

/// exp(rho (a^dagger - a)) on the truncated space, rho real.
Eigen::MatrixXd displacement_matrix(double rho, Index dim);

FockVector coherent_state(Complex alpha, Index dim, double tail_budget = default_tail_budget);

/// S(r)|0> with quadrature variances (e^{2r}/2, e^{-2r}/2).
FockVector squeezed_vacuum(double r, Index dim, double tail_budget = default_tail_budget);

/// D(alpha) S(r) |0>.
FockVector squeezed_coherent_state(Complex alpha, double r, Index dim,
                                   double tail_budget = default_tail_budget);

/// Member |z> of the measurement family for a given seed.
FockVector displaced_state(Complex alpha, const MeasurementSpec& spec, Index dim,
                           double tail_budget = default_tail_budget);
FockVector displaced_state(const PhaseVector& z, const MeasurementSpec& spec, Index dim,
                           double tail_budget = default_tail_budget);

/// amps[n] -> exp(-i chi_t n^2) amps[n].
FockVector kerr_propagate(const FockVector& psi, double chi_t);

Complex mean_a(const FockVector& psi);
Complex mean_a_closed_form(Complex alpha, double chi_t);

/// sum_n n^k |amps[n]|^2 for k in 1..4.
double number_moment(const FockVector& psi, int k);
/// <n^4> - <n^2>^2.
double number_square_variance(const FockVector& psi);

/// <bra|ket> over the common leading dimension.
Complex overlap(const FockVector& bra, const FockVector& ket);

/// (1/2pi) |<z_to| U(tau) |z_from>|^2, a density over dq dp.
double transition_density(const PhaseVector& z_from, const PhaseVector& z_to, double chi_tau,
                          const MeasurementSpec& spec, Index dim,
                          double tail_budget = default_tail_budget);

/// Midpoint rule on a polar grid in the complex-amplitude plane. Radii are
/// in |alpha| units; weights are for dq dp = 2 |alpha| d|alpha| dphi.
struct PolarGrid {
    Index n_r = 200;
    Index n_phi = 128;
    double alpha_max = 8.0;
    PhaseVector center = PhaseVector::Zero();

    /// Default grid for checking levels 0..dim_check: extent sqrt(2 dim_check) + 5.
    static PolarGrid for_levels(Index dim_check);
    PolarGrid refined() const;

    double radius(Index i) const { return (static_cast<double>(i) + 0.5) * alpha_max / static_cast<double>(n_r); }
    double angle(Index j) const;
    /// dq dp weight of a cell at radial index i.
    double weight(Index i) const;
    PhaseVector point(Index i, Index j) const;
};

/// max_{m,n <= dim_check} |(1/2pi) int d^2z <m|z><z|n> - delta_mn|.
double identity_resolution_defect(const MeasurementSpec& spec, Index dim, Index dim_check,
                                  const PolarGrid& grid);

/// s^N with s = |<z0| U(t/N) |z0>|^2: survival when every dichotomic
/// measurement confirms |z0>.
double dichotomic_survival_exact(Complex alpha0, const MeasurementSpec& spec, double chi, double t,
                                 long n_steps, Index dim, double tail_budget = default_tail_budget);

/// Lower estimate exp(-Var(n^2) (chi t)^2 / N) from the short-time expansion.
double dichotomic_survival_bound(double var_n_squared, double chi_t, long n_steps);

}  // namespace kz
