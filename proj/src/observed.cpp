#include "kerrzeno/observed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

namespace kz {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

template <typename T, typename F>
T pairwise_sum(std::span<const PhaseVector> xs, F&& f)
{
    if (xs.size() <= 8) {
        T acc = T::Zero();
        for (const auto& x : xs)
            acc += f(x);
        return acc;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum<T>(xs.first(half), f) + pairwise_sum<T>(xs.subspan(half), f);
}

double max_eigenvalue(const Matrix2& c)
{
    Eigen::SelfAdjointEigenSolver<Matrix2> es(c, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

struct LevelGrid {
    PhaseVector center;
    double half_width;
    Index n;

    double coord(Index i) const { return -half_width + (static_cast<double>(i) + 0.5) * 2.0 * half_width / static_cast<double>(n); }
    PhaseVector node(Index i, Index j) const { return center + PhaseVector(coord(i), coord(j)); }
    double cell() const
    {
        const double h = 2.0 * half_width / static_cast<double>(n);
        return h * h;
    }
};

}  // namespace

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream)
    : key_(splitmix64(master_seed ^ splitmix64(stream ^ 0xD1B54A32D192ED03ull)))
{
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const
{
    return splitmix64(key_ ^ splitmix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const
{
    return (static_cast<double>(bits(counter) >> 11) + 1.0) * 0x1.0p-53;
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t counter) const
{
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return {radius * std::cos(two_pi * u2), radius * std::sin(two_pi * u2)};
}

PhaseVector GaussianStream::next()
{
    const auto [a, b] = rng_.normal_pair(counter_++);
    return PhaseVector(a, b);
}

double GaussianKernel::density(const PhaseVector& from, const PhaseVector& to) const
{
    const PhaseVector d = rotation.transpose() * to - from;
    return normalisation * std::exp(-0.5 * d.dot(precision * d));
}

Matrix2 symmetric_sqrt(const Matrix2& c)
{
    if (!is_symmetric(c) || !is_positive_definite(c))
        throw std::invalid_argument("symmetric_sqrt: matrix must be symmetric positive-definite");
    const double s = std::sqrt(c.determinant());
    const double t = std::sqrt(c.trace() + 2.0 * s);
    return (c + s * Matrix2::Identity()) / t;
}

GaussianKernel gaussian_step_kernel(const MeasurementSpec& spec, double theta)
{
    if (!spec.is_gaussian())
        throw UnsupportedSpecError("gaussian_step_kernel: analytic kernel requires a vacuum or squeezed seed");
    const Matrix2 c1 = step_covariance(spec.squeezing(), theta);
    return {rotation_matrix(theta), c1, symmetric_sqrt(c1), c1.inverse(),
            1.0 / (two_pi * std::sqrt(c1.determinant()))};
}

PhaseVector apply_step(const PhaseVector& z, const GaussianKernel& kernel, const PhaseVector& g)
{
    return kernel.rotation * (z + kernel.cov_sqrt * g);
}

PhaseVector sample_step(const PhaseVector& z, const GaussianKernel& kernel, GaussianStream& rng)
{
    return apply_step(z, kernel, rng.next());
}

void ObservedRunConfig::validate() const
{
    if (params.n_steps < 1)
        throw std::invalid_argument("ObservedRunConfig: n_steps must be >= 1");
    if (n_trajectories < 1)
        throw std::invalid_argument("ObservedRunConfig: n_trajectories must be >= 1");
    if (!all_finite(z0) || !std::isfinite(params.chi) || !std::isfinite(params.n_bar) || !std::isfinite(params.tau))
        throw std::invalid_argument("ObservedRunConfig: parameters must be finite");
    if (params.n_bar < 0.0)
        throw std::invalid_argument("ObservedRunConfig: n_bar must be >= 0");
}

TrajectoryRecord run_trajectory(const ObservedRunConfig& cfg, long trajectory_index)
{
    cfg.validate();
    const GaussianKernel kernel = gaussian_step_kernel(cfg.spec, cfg.params.theta());
    const CounterRng rng(cfg.master_seed, static_cast<std::uint64_t>(trajectory_index));
    GaussianStream stream(rng);

    TrajectoryRecord rec{{}, rng.key()};
    rec.outcomes.reserve(static_cast<std::size_t>(cfg.params.n_steps));
    PhaseVector z = cfg.z0;
    for (long j = 1; j <= cfg.params.n_steps; ++j) {
        z = sample_step(z, kernel, stream);
        rec.outcomes.push_back({j, static_cast<double>(j) * cfg.params.tau, z});
    }
    return rec;
}

std::vector<PhaseVector> final_outcomes(const ObservedRunConfig& cfg, unsigned workers)
{
    cfg.validate();
    const GaussianKernel kernel = gaussian_step_kernel(cfg.spec, cfg.params.theta());
    const auto n = static_cast<std::size_t>(cfg.n_trajectories);
    std::vector<PhaseVector> out(n);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            GaussianStream stream(CounterRng(cfg.master_seed, i));
            PhaseVector z = cfg.z0;
            for (long j = 0; j < cfg.params.n_steps; ++j)
                z = sample_step(z, kernel, stream);
            out[i] = z;
        }
    };

    if (workers == 0)
        workers = default_worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n / 256)));
    if (workers <= 1) {
        run_range(0, n);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t b = std::min(n, w * chunk);
        const std::size_t e = std::min(n, b + chunk);
        pool.emplace_back(run_range, b, e);
    }
    for (auto& t : pool)
        t.join();
    return out;
}

SampleMoments sample_moments(std::span<const PhaseVector> samples)
{
    if (samples.size() < 2)
        throw std::invalid_argument("sample_moments: need at least two samples");
    const double n = static_cast<double>(samples.size());
    const PhaseVector mean = pairwise_sum<PhaseVector>(samples, [](const PhaseVector& z) { return z; }) / n;
    const Matrix2 scatter = pairwise_sum<Matrix2>(samples, [&](const PhaseVector& z) {
        const PhaseVector d = z - mean;
        return Matrix2(d * d.transpose());
    });
    return {mean, scatter / (n - 1.0), static_cast<long>(samples.size())};
}

GaussianState2D analytic_final_distribution(const ObservedRunConfig& cfg)
{
    cfg.validate();
    if (!cfg.spec.is_gaussian())
        throw UnsupportedSpecError("analytic_final_distribution: requires a vacuum or squeezed seed");
    const double theta = cfg.params.theta();
    const long n = cfg.params.n_steps;
    const Matrix2 cn = accumulate_covariance(step_covariance(cfg.spec.squeezing(), theta), theta, n);
    const Matrix2 mt = rotation_matrix(theta * static_cast<double>(n));
    Matrix2 cov = mt * cn * mt.transpose();
    cov(1, 0) = cov(0, 1);
    return {mt * cfg.z0, cov};
}

double survival_density_continuous(const ObservedRunConfig& cfg)
{
    const GaussianState2D dist = analytic_final_distribution(cfg);
    const double omega_t = cfg.params.theta() * static_cast<double>(cfg.params.n_steps);
    if (std::abs(std::remainder(omega_t, two_pi)) < 1e-9)
        return dist.peak_density();
    return dist.density(cfg.z0);
}

double chain_convolution_check(const ObservedRunConfig& cfg, const SquareGrid& grid,
                               const ChainCheckOptions& options)
{
    cfg.validate();
    const long n_steps = cfg.params.n_steps;
    if (n_steps > 3)
        throw std::invalid_argument("chain_convolution_check: validation instrument supports N <= 3");
    if (grid.points_per_side < 2 || grid.check_stride < 1)
        throw std::invalid_argument("chain_convolution_check: degenerate grid");

    const double theta = cfg.params.theta();
    const GaussianKernel intact = gaussian_step_kernel(cfg.spec, theta);
    GaussianKernel broken = intact;
    broken.rotation = Matrix2::Identity();
    auto kernel_at = [&](long step) -> const GaussianKernel& {
        return step == options.omit_rotation_at_step ? broken : intact;
    };

    // Level j holds p_j(z_j | z0) on a grid around the drifted mean of z_j.
    const Matrix2 c1 = intact.cov;
    auto level_grid = [&](long j) {
        const Matrix2 cj = accumulate_covariance(c1, theta, j);
        return LevelGrid{rotation_matrix(theta * static_cast<double>(j)) * cfg.z0,
                         grid.half_width_sigmas * std::sqrt(max_eigenvalue(cj)), grid.points_per_side};
    };

    const Index g = grid.points_per_side;
    LevelGrid prev_grid = level_grid(1);
    Eigen::MatrixXd prev(g, g);
    if (n_steps > 1) {
        for (Index a = 0; a < g; ++a)
            for (Index b = 0; b < g; ++b)
                prev(a, b) = kernel_at(1).density(cfg.z0, prev_grid.node(a, b));
    }

    // Density at z after the final step, integrating over the previous level.
    auto convolve_at = [&](long step, const PhaseVector& z) {
        const GaussianKernel& k = kernel_at(step);
        double sum = 0.0;
        for (Index a = 0; a < g; ++a) {
            double col = 0.0;
            for (Index b = 0; b < g; ++b)
                col += k.density(prev_grid.node(a, b), z) * prev(a, b);
            sum += col;
        }
        return sum * prev_grid.cell();
    };

    for (long j = 2; j < n_steps; ++j) {
        const LevelGrid next_grid = level_grid(j);
        Eigen::MatrixXd next(g, g);
        for (Index a = 0; a < g; ++a)
            for (Index b = 0; b < g; ++b)
                next(a, b) = convolve_at(j, next_grid.node(a, b));
        prev = std::move(next);
        prev_grid = next_grid;
    }

    const GaussianState2D exact = analytic_final_distribution(cfg);
    const LevelGrid final_grid = level_grid(n_steps);
    const Index stride = grid.check_stride;
    double defect = 0.0;
    for (Index a = stride / 2; a < g; a += stride) {
        for (Index b = stride / 2; b < g; b += stride) {
            const PhaseVector z = final_grid.node(a, b);
            const double numeric = n_steps == 1 ? kernel_at(1).density(cfg.z0, z) : convolve_at(n_steps, z);
            defect = std::max(defect, std::abs(numeric - exact.density(z)));
        }
    }
    return defect / exact.peak_density();
}

unsigned default_worker_count()
{
    if (const char* env = std::getenv("KERRZENO_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0)
            return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace kz
