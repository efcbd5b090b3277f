#pragma once

// Observed Kerr evolution: the Markov chain of phase-space measurement
// outcomes under Gaussian seeds, its analytic final-outcome law, and the
// survival density of the continuous measurement.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "kerrzeno/fock.hpp"
#include "kerrzeno/phase_space.hpp"

namespace kz {

/// Counter-based generator: every draw is a pure function of
/// (key, counter), so streams can be split by index without coordination.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream);

    std::uint64_t key() const { return key_; }
    std::uint64_t bits(std::uint64_t counter) const;
    /// Uniform on (0, 1].
    double uniform(std::uint64_t counter) const;
    /// Two independent standard normals (Box-Muller) from counters 2c, 2c+1.
    std::pair<double, double> normal_pair(std::uint64_t counter) const;

private:
    std::uint64_t key_;
};

/// Sequential view on a CounterRng.
class GaussianStream {
public:
    explicit GaussianStream(CounterRng rng, std::uint64_t start = 0) : rng_(rng), counter_(start) {}
    PhaseVector next();
    std::uint64_t position() const { return counter_; }

private:
    CounterRng rng_;
    std::uint64_t counter_;
};

/// p(z'|z) = W1(M^{-1} z' - z), W1 a zero-mean Gaussian of covariance cov.
struct GaussianKernel {
    Matrix2 rotation;
    Matrix2 cov;
    Matrix2 cov_sqrt;
    Matrix2 precision;     ///< cov^{-1}
    double normalisation;  ///< 1 / (2 pi sqrt(det cov))

    double density(const PhaseVector& from, const PhaseVector& to) const;
};

/// Closed-form symmetric square root of a 2x2 SPD matrix.
Matrix2 symmetric_sqrt(const Matrix2& c);

/// Throws UnsupportedSpecError for custom seeds.
GaussianKernel gaussian_step_kernel(const MeasurementSpec& spec, double theta);

/// z' = M (z + S g) for a standard normal pair g; g = 0 gives the
/// noiseless drift M z.
PhaseVector apply_step(const PhaseVector& z, const GaussianKernel& kernel, const PhaseVector& g);
PhaseVector sample_step(const PhaseVector& z, const GaussianKernel& kernel, GaussianStream& rng);

struct ObservedRunConfig {
    PhaseVector z0 = PhaseVector::Zero();
    EvolutionParams params;
    MeasurementSpec spec = MeasurementSpec::vacuum();
    long n_trajectories = 1;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct Outcome {
    long step;
    double time;
    PhaseVector z;
};

struct TrajectoryRecord {
    std::vector<Outcome> outcomes;
    std::uint64_t seed;  ///< substream key
};

TrajectoryRecord run_trajectory(const ObservedRunConfig& cfg, long trajectory_index);

/// Final outcome z_N of every trajectory, ordered by index. The result does
/// not depend on the worker count.
std::vector<PhaseVector> final_outcomes(const ObservedRunConfig& cfg, unsigned workers = 0);

struct SampleMoments {
    PhaseVector mean;
    Matrix2 cov;  ///< unbiased (n - 1) normalisation
    long count;
};

/// Pairwise-summed first and second moments.
SampleMoments sample_moments(std::span<const PhaseVector> samples);

/// Law of z_N: mean M(N tau) z0, covariance M(N tau) C_N M(N tau)^T.
GaussianState2D analytic_final_distribution(const ObservedRunConfig& cfg);

/// p_N(z0 | z0). When Omega t is within 1e-9 of a multiple of 2 pi this is
/// 1 / (2 pi sqrt(det C_N)); otherwise the drift mismatch is included.
/// This is a density per dq dp, not a probability.
double survival_density_continuous(const ObservedRunConfig& cfg);

struct SquareGrid {
    Index points_per_side = 256;
    double half_width_sigmas = 6.0;
    /// Final-level densities are compared on every stride-th node per axis.
    Index check_stride = 8;
};

struct ChainCheckOptions {
    /// Step (1-based) whose kernel drops the rotation; 0 keeps all intact.
    long omit_rotation_at_step = 0;
};

/// Convolve the one-step kernels on grids (N <= 3) and return the maximal
/// deviation from the analytic density, relative to its peak value.
double chain_convolution_check(const ObservedRunConfig& cfg, const SquareGrid& grid = {},
                               const ChainCheckOptions& options = {});

/// Worker count from KERRZENO_THREADS, else hardware concurrency.
unsigned default_worker_count();

}  // namespace kz
