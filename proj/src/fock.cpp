#include "kerrzeno/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "kerrzeno/expm.hpp"

namespace kz {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Working-space states are accepted once the weight in their top band is
// below this; the truncated evolution then agrees with the infinite one on
// the retained levels far beyond double precision of the amplitudes.
constexpr double edge_mass_limit = 1e-28;
constexpr Index max_working_dim = 8192;

double edge_mass(const Eigen::VectorXcd& v)
{
    const Index band = std::max<Index>(8, v.size() / 8);
    return v.tail(std::min(band, v.size())).squaredNorm();
}

Index grow(Index w)
{
    return w + std::max<Index>(32, w / 2);
}

// Smallest d such that sum_{n >= d} |v_n|^2 <= budget.
Index required_from(const Eigen::VectorXcd& v, double budget)
{
    double suffix = 0.0;
    for (Index n = v.size(); n > 0; --n) {
        suffix += std::norm(v(n - 1));
        if (suffix > budget)
            return n;
    }
    return 1;
}

// Cut a working-space vector down to dim, reporting the discarded weight.
FockVector truncate_checked(const Eigen::VectorXcd& v, Index dim, double budget, const char* what)
{
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dim);
    const Index keep = std::min(dim, v.size());
    amps.head(keep) = v.head(keep);
    const double tail = v.size() > dim ? v.tail(v.size() - dim).squaredNorm() : 0.0;
    if (tail > budget) {
        std::ostringstream os;
        os << what << ": dim " << dim << " leaves tail mass " << tail << " > budget " << budget;
        throw TruncationError(os.str(), required_from(v, budget));
    }
    return FockVector(std::move(amps), tail);
}

// Drop trailing amplitudes that carry no weight at double precision.
Eigen::VectorXcd trimmed(const Eigen::VectorXcd& v)
{
    Index n = v.size();
    double suffix = 0.0;
    while (n > 1 && suffix + std::norm(v(n - 1)) < edge_mass_limit) {
        suffix += std::norm(v(n - 1));
        --n;
    }
    return v.head(n);
}

// S(r)|0> lives on even levels only; exponentiate the generator restricted
// to span{|0>, |2>, |4>, ...}.
Eigen::VectorXcd squeezed_vacuum_working(double r, Index min_dim)
{
    if (r == 0.0) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(std::max<Index>(min_dim, 1));
        v(0) = 1.0;
        return v;
    }
    const double sh = std::sinh(std::abs(r));
    const double nbar = sh * sh;
    Index w = std::max(min_dim, recommended_dim(nbar + 2.0 * nbar * (nbar + 1.0)));
    for (;;) {
        const Index half = (w + 1) / 2;
        Eigen::MatrixXd even = Eigen::MatrixXd::Zero(half, half);
        for (Index k = 0; k + 1 < half; ++k) {
            const double c = std::sqrt((2.0 * k + 1.0) * (2.0 * k + 2.0)) / 2.0;
            even(k + 1, k) = c;
            even(k, k + 1) = -c;
        }
        const Eigen::VectorXd col = expm(r * even).col(0);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * half);
        for (Index k = 0; k < half; ++k)
            v(2 * k) = col(k);
        if (edge_mass(v) < edge_mass_limit)
            return v;
        w = grow(w);
        if (w > max_working_dim)
            throw TruncationError("squeezed vacuum needs more than the maximal working dimension",
                                  max_working_dim);
    }
}

std::shared_ptr<const Eigen::VectorXcd> cached_squeezed_seed(double r)
{
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<const Eigen::VectorXcd>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(r);
    if (it != cache.end())
        return it->second;
    if (cache.size() > 64)
        cache.clear();
    auto seed = std::make_shared<const Eigen::VectorXcd>(trimmed(squeezed_vacuum_working(r, 1)));
    cache.emplace(r, seed);
    return seed;
}

Eigen::VectorXcd seed_amplitudes(const MeasurementSpec& spec)
{
    switch (spec.kind()) {
    case MeasurementSpec::Kind::vacuum: {
        Eigen::VectorXcd v(1);
        v(0) = 1.0;
        return v;
    }
    case MeasurementSpec::Kind::squeezed:
        return *cached_squeezed_seed(spec.squeezing());
    case MeasurementSpec::Kind::custom:
        return spec.custom_seed().amps();
    }
    return {};
}

Index displacement_working_dim(Index seed_size, double rho, Index min_dim)
{
    const double reach = std::sqrt(static_cast<double>(seed_size)) + rho;
    const auto est = static_cast<Index>(std::ceil(reach * reach + 10.0 * (rho + 1.0) + 20.0));
    return std::max({min_dim, seed_size, est});
}

// D(alpha)|seed> = R(phi) D(rho) R(phi)^dagger |seed> with R(phi) = exp(i phi n),
// so only the real matrix exp(rho (a^dagger - a)) is needed.
Eigen::VectorXcd displace_working(Complex alpha, const Eigen::VectorXcd& seed, Index min_dim)
{
    const double rho = std::abs(alpha);
    const double phi = std::arg(alpha);
    if (rho == 0.0) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(std::max(min_dim, seed.size()));
        v.head(seed.size()) = seed;
        return v;
    }
    Index w = displacement_working_dim(seed.size(), rho, min_dim);
    for (;;) {
        Eigen::VectorXcd rotated = Eigen::VectorXcd::Zero(w);
        for (Index k = 0; k < seed.size(); ++k)
            rotated(k) = std::polar(1.0, -phi * static_cast<double>(k)) * seed(k);
        const Eigen::MatrixXd d = displacement_matrix(rho, w);
        Eigen::VectorXcd v = d.leftCols(seed.size()) * rotated.head(seed.size());
        for (Index n = 0; n < w; ++n)
            v(n) *= std::polar(1.0, phi * static_cast<double>(n));
        if (edge_mass(v) < edge_mass_limit)
            return v;
        w = grow(w);
        if (w > max_working_dim)
            throw TruncationError("displaced state needs more than the maximal working dimension",
                                  max_working_dim);
    }
}

}  // namespace

Index recommended_dim(double n_bar)
{
    const double nb = std::max(0.0, n_bar);
    return static_cast<Index>(std::ceil(nb + 10.0 * std::sqrt(nb + 1.0) + 20.0));
}

FockVector::FockVector(Eigen::VectorXcd amps, double tail_mass)
    : amps_(std::move(amps)), tail_mass_(tail_mass)
{
    if (amps_.size() < 1)
        throw std::invalid_argument("FockVector: dim must be positive");
    if (!amps_.allFinite())
        throw std::invalid_argument("FockVector: amplitudes must be finite");
}

MeasurementSpec MeasurementSpec::squeezed(double r)
{
    require_finite(r, "squeezing parameter");
    return MeasurementSpec(Kind::squeezed, r, nullptr);
}

MeasurementSpec MeasurementSpec::custom(FockVector seed)
{
    const double norm = seed.norm_squared();
    if (std::abs(norm - 1.0) > 1e-8)
        throw std::invalid_argument("MeasurementSpec::custom: seed must be normalized");
    return MeasurementSpec(Kind::custom, 0.0, std::make_shared<const FockVector>(std::move(seed)));
}

const FockVector& MeasurementSpec::custom_seed() const
{
    if (kind_ != Kind::custom)
        throw std::logic_error("MeasurementSpec: not a custom seed");
    return *seed_;
}

std::string MeasurementSpec::describe() const
{
    switch (kind_) {
    case Kind::vacuum:
        return "vacuum";
    case Kind::squeezed: {
        std::ostringstream os;
        os << "squeezed(" << r_ << ")";
        return os.str();
    }
    case Kind::custom:
        return "custom(dim=" + std::to_string(seed_->dim()) + ")";
    }
    return "unknown";
}

Eigen::MatrixXd annihilation_matrix(Index dim)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (Index n = 1; n < dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Eigen::MatrixXd displacement_generator(Index dim)
{
    const Eigen::MatrixXd a = annihilation_matrix(dim);
    return a.transpose() - a;
}

Eigen::MatrixXd squeeze_generator(Index dim)
{
    const Eigen::MatrixXd a = annihilation_matrix(dim);
    const Eigen::MatrixXd a2 = a * a;
    return (a2.transpose() - a2) / 2.0;
}

Eigen::MatrixXd displacement_matrix(double rho, Index dim)
{
    require_finite(rho, "displacement");
    return expm(rho * displacement_generator(dim));
}

FockVector coherent_state(Complex alpha, Index dim, double tail_budget)
{
    if (dim < 1)
        throw std::invalid_argument("coherent_state: dim must be positive");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
        throw std::invalid_argument("coherent_state: alpha must be finite");

    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(dim);
    const double nbar = std::norm(alpha);
    if (nbar == 0.0) {
        amps(0) = 1.0;
        return FockVector(std::move(amps), 0.0);
    }

    const double log_mod = std::log(std::abs(alpha));
    const double phi = std::arg(alpha);
    if (nbar < 600.0) {
        amps(0) = std::exp(-nbar / 2.0);
        for (Index n = 1; n < dim; ++n)
            amps(n) = amps(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    } else {
        for (Index n = 0; n < dim; ++n) {
            const double nd = static_cast<double>(n);
            const double lm = -nbar / 2.0 + nd * log_mod - 0.5 * std::lgamma(nd + 1.0);
            amps(n) = std::polar(std::exp(lm), nd * phi);
        }
    }

    // Poisson weights beyond the truncation, in log space.
    const auto upper = static_cast<Index>(std::ceil(nbar + 40.0 * std::sqrt(nbar + 1.0) + 100.0));
    std::vector<double> beyond;
    double tail = 0.0;
    for (Index n = dim; n < upper; ++n) {
        const double nd = static_cast<double>(n);
        const double p = std::exp(-nbar + 2.0 * nd * log_mod - std::lgamma(nd + 1.0));
        beyond.push_back(p);
        tail += p;
        if (nd > nbar && p < 1e-40)
            break;
    }
    if (tail > tail_budget) {
        double suffix = 0.0;
        Index required = dim + static_cast<Index>(beyond.size());
        for (Index i = static_cast<Index>(beyond.size()); i > 0; --i) {
            suffix += beyond[static_cast<std::size_t>(i - 1)];
            if (suffix > tail_budget) {
                required = dim + i;
                break;
            }
        }
        std::ostringstream os;
        os << "coherent_state: dim " << dim << " leaves tail mass " << tail << " > budget "
           << tail_budget << " (need dim >= " << required << ")";
        throw TruncationError(os.str(), required);
    }
    return FockVector(std::move(amps), tail);
}

FockVector squeezed_vacuum(double r, Index dim, double tail_budget)
{
    if (dim < 1)
        throw std::invalid_argument("squeezed_vacuum: dim must be positive");
    require_finite(r, "squeezing parameter");
    return truncate_checked(*cached_squeezed_seed(r), dim, tail_budget, "squeezed_vacuum");
}

FockVector squeezed_coherent_state(Complex alpha, double r, Index dim, double tail_budget)
{
    if (dim < 1)
        throw std::invalid_argument("squeezed_coherent_state: dim must be positive");
    require_finite(r, "squeezing parameter");
    if (r == 0.0)
        return coherent_state(alpha, dim, tail_budget);
    const auto seed = cached_squeezed_seed(r);
    return truncate_checked(displace_working(alpha, *seed, dim), dim, tail_budget,
                            "squeezed_coherent_state");
}

FockVector displaced_state(Complex alpha, const MeasurementSpec& spec, Index dim, double tail_budget)
{
    if (spec.is_vacuum_like())
        return coherent_state(alpha, dim, tail_budget);
    if (spec.kind() == MeasurementSpec::Kind::squeezed)
        return squeezed_coherent_state(alpha, spec.squeezing(), dim, tail_budget);
    if (dim < 1)
        throw std::invalid_argument("displaced_state: dim must be positive");
    return truncate_checked(displace_working(alpha, spec.custom_seed().amps(), dim), dim, tail_budget,
                            "displaced_state");
}

FockVector displaced_state(const PhaseVector& z, const MeasurementSpec& spec, Index dim, double tail_budget)
{
    if (!all_finite(z))
        throw std::invalid_argument("displaced_state: phase point must be finite");
    const double s = std::sqrt(2.0);
    return displaced_state(Complex(z(0) / s, z(1) / s), spec, dim, tail_budget);
}

FockVector kerr_propagate(const FockVector& psi, double chi_t)
{
    require_finite(chi_t, "chi_t");
    // exp(-i chi_t n^2) has period 2 pi in chi_t for integer n.
    const double reduced = std::remainder(chi_t, two_pi);
    Eigen::VectorXcd out = psi.amps();
    for (Index n = 0; n < out.size(); ++n) {
        const double n2 = static_cast<double>(n) * static_cast<double>(n);
        out(n) *= std::polar(1.0, -std::remainder(reduced * n2, two_pi));
    }
    return FockVector(std::move(out), psi.tail_mass());
}

Complex mean_a(const FockVector& psi)
{
    const auto& a = psi.amps();
    Complex sum = 0.0;
    for (Index n = 0; n + 1 < a.size(); ++n)
        sum += std::sqrt(static_cast<double>(n + 1)) * std::conj(a(n)) * a(n + 1);
    return sum;
}

Complex mean_a_closed_form(Complex alpha, double chi_t)
{
    const double nbar = std::norm(alpha);
    const double s = std::sin(chi_t);
    const double envelope = std::exp(-2.0 * nbar * s * s);
    const double phase = chi_t + nbar * std::sin(2.0 * chi_t);
    return alpha * envelope * std::polar(1.0, -phase);
}

double number_moment(const FockVector& psi, int k)
{
    if (k < 1 || k > 4)
        throw std::invalid_argument("number_moment: k must be in 1..4");
    const auto& a = psi.amps();
    double sum = 0.0;
    for (Index n = 0; n < a.size(); ++n)
        sum += std::pow(static_cast<double>(n), k) * std::norm(a(n));
    return sum;
}

double number_square_variance(const FockVector& psi)
{
    const double m2 = number_moment(psi, 2);
    return number_moment(psi, 4) - m2 * m2;
}

Complex overlap(const FockVector& bra, const FockVector& ket)
{
    const Index n = std::min(bra.dim(), ket.dim());
    return bra.amps().head(n).dot(ket.amps().head(n));
}

double transition_density(const PhaseVector& z_from, const PhaseVector& z_to, double chi_tau,
                          const MeasurementSpec& spec, Index dim, double tail_budget)
{
    const FockVector from = displaced_state(z_from, spec, dim, tail_budget);
    const FockVector to = displaced_state(z_to, spec, dim, tail_budget);
    return std::norm(overlap(to, kerr_propagate(from, chi_tau))) / two_pi;
}

PolarGrid PolarGrid::for_levels(Index dim_check)
{
    PolarGrid g;
    g.alpha_max = std::sqrt(2.0 * static_cast<double>(dim_check)) + 5.0;
    return g;
}

PolarGrid PolarGrid::refined() const
{
    PolarGrid g = *this;
    g.n_r *= 2;
    g.n_phi *= 2;
    return g;
}

double PolarGrid::angle(Index j) const
{
    return two_pi * static_cast<double>(j) / static_cast<double>(n_phi);
}

double PolarGrid::weight(Index i) const
{
    const double dr = alpha_max / static_cast<double>(n_r);
    const double dphi = two_pi / static_cast<double>(n_phi);
    return 2.0 * radius(i) * dr * dphi;
}

PhaseVector PolarGrid::point(Index i, Index j) const
{
    const double rho = radius(i);
    const double phi = angle(j);
    return center + phase_point(rho * std::cos(phi), rho * std::sin(phi));
}

double identity_resolution_defect(const MeasurementSpec& spec, Index dim, Index dim_check,
                                  const PolarGrid& grid)
{
    if (dim_check < 0 || dim_check >= dim)
        throw std::invalid_argument("identity_resolution_defect: need 0 <= dim_check < dim");
    if (grid.n_r < 1 || grid.n_phi < 1 || !(grid.alpha_max > 0.0))
        throw std::invalid_argument("identity_resolution_defect: degenerate grid");
    if (grid.center.squaredNorm() != 0.0)
        throw std::invalid_argument("identity_resolution_defect: grid must be centred at the origin");

    const Eigen::VectorXcd seed = seed_amplitudes(spec);
    const Index k_seed = seed.size();
    const Index levels = dim_check + 1;

    // Working space wide enough that the largest displacement stays inside.
    Index w = displacement_working_dim(k_seed, grid.alpha_max, dim);
    for (;;) {
        const Eigen::MatrixXd far = displacement_matrix(grid.alpha_max, w).leftCols(k_seed);
        const Index band = std::max<Index>(8, w / 8);
        if (far.bottomRows(band).colwise().squaredNorm().maxCoeff() < edge_mass_limit)
            break;
        w = grow(w);
        if (w > max_working_dim)
            throw TruncationError("identity_resolution_defect: grid extent too large", max_working_dim);
    }

    // D(rho_i) = D(drho)^i D(drho/2): real displacements along one axis compose exactly.
    const double drho = grid.alpha_max / static_cast<double>(grid.n_r);
    const Eigen::MatrixXd step = displacement_matrix(drho, w);
    Eigen::MatrixXd block = displacement_matrix(drho / 2.0, w).leftCols(k_seed);

    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(levels, levels);
    Eigen::VectorXcd rotated(k_seed);
    Eigen::VectorXcd u(levels);
    for (Index i = 0; i < grid.n_r; ++i) {
        if (i > 0)
            block = (step * block).eval();
        const Eigen::MatrixXd rows = block.topRows(levels);
        Eigen::MatrixXcd ring = Eigen::MatrixXcd::Zero(levels, levels);
        for (Index j = 0; j < grid.n_phi; ++j) {
            const double phi = grid.angle(j);
            for (Index k = 0; k < k_seed; ++k)
                rotated(k) = std::polar(1.0, -phi * static_cast<double>(k)) * seed(k);
            u.noalias() = rows * rotated;
            for (Index m = 0; m < levels; ++m)
                u(m) *= std::polar(1.0, phi * static_cast<double>(m));
            ring.noalias() += u * u.adjoint();
        }
        gram += (grid.weight(i) / two_pi) * ring;
    }
    return (gram - Eigen::MatrixXcd::Identity(levels, levels)).cwiseAbs().maxCoeff();
}

double dichotomic_survival_exact(Complex alpha0, const MeasurementSpec& spec, double chi, double t,
                                 long n_steps, Index dim, double tail_budget)
{
    if (n_steps < 1)
        throw std::invalid_argument("dichotomic_survival_exact: n_steps must be >= 1");
    require_finite(chi, "chi");
    require_finite(t, "time");
    if (t == 0.0)
        return 1.0;
    const FockVector z0 = displaced_state(alpha0, spec, dim, tail_budget);
    const double chi_tau = chi * t / static_cast<double>(n_steps);
    const double norm = z0.norm_squared();
    const double s = std::norm(overlap(z0, kerr_propagate(z0, chi_tau))) / (norm * norm);
    return std::pow(s, static_cast<double>(n_steps));
}

double dichotomic_survival_bound(double var_n_squared, double chi_t, long n_steps)
{
    if (n_steps < 1)
        throw std::invalid_argument("dichotomic_survival_bound: n_steps must be >= 1");
    return std::exp(-var_n_squared * chi_t * chi_t / static_cast<double>(n_steps));
}

}  // namespace kz
