// Acceptance suite: one line per criterion, non-zero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "kerrzeno/experiments.hpp"
#include "kerrzeno/fock.hpp"
#include "kerrzeno/observed.hpp"
#include "kerrzeno/phase_space.hpp"
#include "kerrzeno/two_level.hpp"

using namespace kz;
namespace ex = kz::experiments;
using ex::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
    bool pass;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    std::function<Verdict()> check;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ex::ExperimentConfig config_of(const json& raw)
{
    const auto vr = ex::validate_config(raw);
    if (!vr.ok())
        throw std::runtime_error("invalid config: " + vr.errors.front().path + " " + vr.errors.front().message);
    return *vr.config;
}

std::string csv_of(const ex::ResultEnvelope& env)
{
    std::ostringstream os;
    ex::write_csv(os, env.table);
    return os.str();
}

std::size_t column(const ex::Table& t, const std::string& name)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name)
            return i;
    throw std::runtime_error("missing column " + name);
}

double num(const ex::Cell& c)
{
    if (const auto* d = std::get_if<double>(&c))
        return *d;
    return static_cast<double>(std::get<long long>(c));
}

// ---- Kerr revival -----------------------------------------------------------

struct RevivalRun {
    ex::ResultEnvelope env;
    double seconds;
};

const RevivalRun& revival_run()
{
    static const RevivalRun run = [] {
        const auto t0 = std::chrono::steady_clock::now();
        auto env = ex::run_experiment(config_of(
            {{"experiment", "revival"}, {"parameters", {{"alpha_re", 4.0}, {"points", 512}, {"dim", 200}}}}));
        return RevivalRun{std::move(env), seconds_since(t0)};
    }();
    return run;
}

Verdict ac1_collapse()
{
    const auto& t = revival_run().env.table;
    const auto cx = column(t, "chi_t"), cre = column(t, "re_mean_a_exact");
    double worst = 0.0, at = 0.0;
    for (const auto& row : t.rows) {
        const double x = num(row[cx]);
        if (x >= 0.3 && x <= 2.8 && std::abs(num(row[cre])) > worst) {
            worst = std::abs(num(row[cre]));
            at = x;
        }
    }
    return {worst < 0.05, "max |Re<a>| on [0.3, 2.8] = " + fmt("%.4g", worst) + " at chi t = " + fmt("%.4g", at) +
                              " (limit 0.05)"};
}

Verdict ac1_revival()
{
    const auto& t = revival_run().env.table;
    const auto& last = t.rows.back();
    const double x = num(last[column(t, "chi_t")]);
    const double re = num(last[column(t, "re_mean_a_exact")]);
    return {x == pi && std::abs(re + 4.0) <= 1e-6, "Re<a>(pi) = " + fmt("%.15g", re) + " (target -4 +- 1e-6)"};
}

Verdict ac1_closed_form()
{
    const auto& t = revival_run().env.table;
    const auto ce = column(t, "abs_error");
    double worst = 0.0;
    for (const auto& row : t.rows)
        worst = std::max(worst, num(row[ce]));
    return {t.rows.size() == 512 && worst <= 1e-8,
            std::to_string(t.rows.size()) + " points, max |exact - closed| = " + fmt("%.3g", worst) + " (limit 1e-8)"};
}

Verdict ac1_runtime()
{
    const double s = revival_run().seconds;
    return {s < 10.0, "revival at dim 200 took " + fmt("%.3f", s) + " s (limit 10 s)"};
}

// ---- covariance laws --------------------------------------------------------

Verdict ac2_coherent()
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> angle(0.0, 2 * pi);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double theta = angle(gen);
        const Matrix2 c1 = step_covariance(0.0, theta);
        for (long n = 1; n <= 1000; ++n) {
            const Matrix2 cn = accumulate_covariance(c1, theta, n);
            worst = std::max(worst, (cn - static_cast<double>(n) * Matrix2::Identity()).cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-12, "max |C_N - N I| over N <= 1000, 5 angles = " + fmt("%.3g", worst) + " (limit 1e-12)"};
}

Verdict ac2_squeezed()
{
    const double r = 0.5, theta = 0.01;
    const Matrix2 cn = accumulate_covariance(step_covariance(r, theta), theta, 500);
    const double ratio = std::sqrt(cn.determinant()) / (500.0 * std::cosh(1.0));
    return {ratio >= 0.95 && ratio <= 1.05, "sqrt(det C_500) / (500 cosh 1) = " + fmt("%.6f", ratio) + " (range [0.95, 1.05])"};
}

// ---- outcome chain law ------------------------------------------------------

ObservedRunConfig chain_config(double r, long n_traj)
{
    ObservedRunConfig cfg;
    cfg.z0 = phase_point(4.0, 0.0);
    cfg.params = {1.0, 16.0, 0.2 / 32.0, 2};
    cfg.spec = r == 0.0 ? MeasurementSpec::vacuum() : MeasurementSpec::squeezed(r);
    cfg.n_trajectories = n_traj;
    cfg.master_seed = 20240601;
    return cfg;
}

struct ChainRun {
    double defect[2];
    double worst_mean_sigmas[2];
    double worst_cov_sigmas[2];
    double seconds;
};

const ChainRun& chain_run()
{
    static const ChainRun run = [] {
        ChainRun out{};
        const auto t0 = std::chrono::steady_clock::now();
        const double rs[2] = {0.0, 0.5};
        for (int k = 0; k < 2; ++k) {
            const ObservedRunConfig cfg = chain_config(rs[k], 100000);
            out.defect[k] = chain_convolution_check(cfg);
            const auto samples = final_outcomes(cfg);
            const SampleMoments m = sample_moments(samples);
            const double n = static_cast<double>(m.count);
            const PhaseVector cl = classical_evolve(cfg.z0, cfg.params.omega(), cfg.params.total_time());
            const GaussianState2D law = analytic_final_distribution(cfg);
            double wm = 0.0, wc = 0.0;
            for (int i = 0; i < 2; ++i) {
                wm = std::max(wm, std::abs(m.mean(i) - cl(i)) / std::sqrt(law.cov(i, i) / n));
                for (int j = 0; j < 2; ++j) {
                    const double se = std::sqrt((law.cov(i, j) * law.cov(i, j) + law.cov(i, i) * law.cov(j, j)) / (n - 1));
                    wc = std::max(wc, std::abs(m.cov(i, j) - law.cov(i, j)) / se);
                }
            }
            out.worst_mean_sigmas[k] = wm;
            out.worst_cov_sigmas[k] = wc;
        }
        out.seconds = seconds_since(t0);
        return out;
    }();
    return run;
}

Verdict ac3_convolution()
{
    const auto& c = chain_run();
    return {c.defect[0] < 1e-3 && c.defect[1] < 1e-3,
            "chain defect r=0: " + fmt("%.3g", c.defect[0]) + ", r=0.5: " + fmt("%.3g", c.defect[1]) + " (limit 1e-3)"};
}

Verdict ac3_mean()
{
    const auto& c = chain_run();
    return {c.worst_mean_sigmas[0] < 4 && c.worst_mean_sigmas[1] < 4,
            "max |mean - classical| / SE r=0: " + fmt("%.3f", c.worst_mean_sigmas[0]) + ", r=0.5: " +
                fmt("%.3f", c.worst_mean_sigmas[1]) + " (limit 4)"};
}

Verdict ac3_covariance()
{
    const auto& c = chain_run();
    return {c.worst_cov_sigmas[0] < 5 && c.worst_cov_sigmas[1] < 5,
            "max |S_ij - (M C_N M^T)_ij| / SE r=0: " + fmt("%.3f", c.worst_cov_sigmas[0]) + ", r=0.5: " +
                fmt("%.3f", c.worst_cov_sigmas[1]) + " (limit 5)"};
}

Verdict ac3_runtime()
{
    const double s = chain_run().seconds;
    return {s < 60.0, "chain checks and 2 x 1e5 trajectories took " + fmt("%.2f", s) + " s (limit 60 s)"};
}

// ---- Zeno contrast ----------------------------------------------------------

Verdict ac4_continuous()
{
    double worst = 0.0;
    for (long n = 1; n <= 1000; ++n) {
        ObservedRunConfig cfg;
        cfg.z0 = phase_point(4.0, 0.0);
        cfg.params = {1.0, 16.0, 2 * pi / (32.0 * static_cast<double>(n)), n};
        cfg.spec = MeasurementSpec::vacuum();
        worst = std::max(worst, std::abs(static_cast<double>(n) * survival_density_continuous(cfg) - 1 / (2 * pi)));
    }
    return {worst <= 1e-12, "max |N p - 1/(2 pi)| over N = 1..1000 = " + fmt("%.3g", worst) + " (limit 1e-12)"};
}

Verdict ac4_dichotomic()
{
    const Complex alpha(2.0, 0.0);
    const Index dim = recommended_dim(4.0);
    const auto spec = MeasurementSpec::vacuum();
    const double s1 = dichotomic_survival_exact(alpha, spec, 1.0, 0.1, 1, dim);
    const double s10 = dichotomic_survival_exact(alpha, spec, 1.0, 0.1, 10, dim);
    const double s100 = dichotomic_survival_exact(alpha, spec, 1.0, 0.1, 100, dim);
    const double s1000 = dichotomic_survival_exact(alpha, spec, 1.0, 0.1, 1000, dim);
    const bool ok = s1 < s10 && s10 < s100 && s1000 > 0.99;
    return {ok, "P(1)=" + fmt("%.6f", s1) + ", P(10)=" + fmt("%.6f", s10) + ", P(100)=" + fmt("%.6f", s100) +
                    ", P(1000)=" + fmt("%.8f", s1000) + " (increasing, P(1000) > 0.99)"};
}

Verdict ac4_bound()
{
    const Complex alpha(2.0, 0.0);
    const Index dim = recommended_dim(4.0);
    const double var = number_square_variance(coherent_state(alpha, dim));
    bool ok = true;
    std::string detail = "Var(n^2) = " + fmt("%.6g", var);
    for (long n : {100L, 1000L, 10000L}) {
        const double s = dichotomic_survival_exact(alpha, MeasurementSpec::vacuum(), 1.0, 0.1, n, dim);
        const double b = dichotomic_survival_bound(var, 0.1, n);
        ok = ok && s >= b;
        detail += "; N=" + std::to_string(n) + ": exact - bound = " + fmt("%.3g", s - b);
    }
    return {ok, detail + " (exact >= bound)"};
}

// ---- two-level model --------------------------------------------------------

struct TwoLevelRun {
    double worst_closed;
    double limit_gap;
    double beta1_end;
    double beta025_end;
    double seconds;
};

const TwoLevelRun& two_level_run()
{
    static const TwoLevelRun run = [] {
        TwoLevelRun out{};
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 gen(77);
        std::uniform_real_distribution<double> ua(0.0, pi / 2), uw(-1.0, 1.0);
        std::uniform_int_distribution<long> un(1, 200);
        for (int i = 0; i < 1000; ++i) {
            const TwoLevelModel m{ua(gen), 1.0, uw(gen), un(gen)};
            out.worst_closed = std::max(out.worst_closed, std::abs(survival_exact(m) - survival_closed_form(m)));
        }
        const double a = 0.4;
        const TwoLevelModel lim{a, 1.0, 1.0 / 1e4, 10000};
        out.limit_gap = std::abs(survival_exact(lim) - std::cos(a) * std::cos(a) / 2);
        const std::vector<long> ns = {10, 100, 1000, 10000, 100000, 1000000};
        out.beta1_end = scaling_sweep(1.0, 1.0, 1.0, 1.0, ns).back().survival;
        out.beta025_end = scaling_sweep(1.0, 0.25, 1.0, 1.0, ns).back().survival;
        out.seconds = seconds_since(t0);
        return out;
    }();
    return run;
}

Verdict ac5_closed_form()
{
    const double w = two_level_run().worst_closed;
    return {w <= 1e-12, "max |(T^N)_11 - closed form| over 1000 samples = " + fmt("%.3g", w) + " (limit 1e-12)"};
}

Verdict ac5_limit()
{
    const double g = two_level_run().limit_gap;
    return {g <= 1e-3, "|p0(N=1e4) - cos^2(0.4)/2| = " + fmt("%.3g", g) + " (limit 1e-3)"};
}

Verdict ac5_crossover()
{
    const auto& t = two_level_run();
    return {std::abs(t.beta1_end - 1.0) <= 1e-2 && std::abs(t.beta025_end - 0.5) <= 1e-2,
            "N=1e6: beta=1 -> " + fmt("%.6f", t.beta1_end) + ", beta=0.25 -> " + fmt("%.6f", t.beta025_end) +
                " (targets 1 and 1/2, tolerance 1e-2)"};
}

Verdict ac5_runtime()
{
    const double s = two_level_run().seconds;
    return {s < 5.0, "two-level checks took " + fmt("%.3f", s) + " s (limit 5 s)"};
}

// ---- resolution of identity -------------------------------------------------

struct IdentityRun {
    double coarse;
    double fine;
};

const IdentityRun& identity_run()
{
    static const IdentityRun run = [] {
        const auto env = ex::run_experiment(config_of({{"experiment", "identity-check"}, {"parameters", {{"spec", "vacuum"}}}}));
        const auto cd = column(env.table, "defect");
        return IdentityRun{num(env.table.rows.at(0)[cd]), num(env.table.rows.at(1)[cd])};
    }();
    return run;
}

Verdict ac6_defect()
{
    const double d = identity_run().coarse;
    return {d < 1e-3, "vacuum, dim_check 10, default grid: defect = " + fmt("%.3g", d) + " (limit 1e-3)"};
}

Verdict ac6_convergence()
{
    const auto& r = identity_run();
    return {r.fine < r.coarse, "defect " + fmt("%.3g", r.coarse) + " -> " + fmt("%.3g", r.fine) + " on the doubled grid"};
}

// ---- property suites --------------------------------------------------------

Verdict ac7_rotation()
{
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double a = u(gen), b = u(gen);
        const Matrix2 m = rotation_matrix(a);
        worst = std::max(worst, (m.transpose() * m - Matrix2::Identity()).cwiseAbs().maxCoeff());
        worst = std::max(worst, (m * rotation_matrix(b) - rotation_matrix(a + b)).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-12, "10^4 random pairs: max orthogonality/semigroup defect = " + fmt("%.3g", worst)};
}

Verdict ac7_povm()
{
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> ua(-3.0, 3.0), uw(-3.0, 3.0);
    double worst = 0.0;
    bool nonneg = true;
    for (int i = 0; i < 10000; ++i) {
        const double a = ua(gen);
        const auto [d1, d2] = povm_elements(a);
        worst = std::max(worst, (d1 + d2 - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
        const StochasticMatrix2 t = transition_matrix({a, 1.0, uw(gen), 1});
        worst = std::max(worst, t.stochasticity_defect());
        nonneg = nonneg && (t.matrix().array() >= 0.0).all();
    }
    return {worst < 1e-13 && nonneg, "10^4 samples: max completeness/stochasticity defect = " + fmt("%.3g", worst)};
}

Verdict ac7_kerr_norm()
{
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-4.0, 4.0), ut(-100.0, 100.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Complex alpha(u(gen), u(gen));
        const FockVector psi = i % 2 ? coherent_state(alpha, recommended_dim(std::norm(alpha)))
                                     : squeezed_coherent_state(alpha, 0.4, recommended_dim(std::norm(alpha)) + 40);
        const FockVector out = kerr_propagate(psi, ut(gen));
        worst = std::max(worst, std::abs(out.norm_squared() - psi.norm_squared()));
    }
    return {worst < 1e-13, "200 states: max |norm change| = " + fmt("%.3g", worst)};
}

Verdict ac7_uncertainty()
{
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> ur(-1.5, 1.5), ut(0.0, 2 * pi);
    long checked = 0;
    double worst = INFINITY;
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
        const double r = ur(gen), theta = ut(gen);
        const Matrix2 c1 = step_covariance(r, theta);
        for (long n = 1; n <= 100; ++n) {
            const Matrix2 cn = accumulate_covariance(c1, theta, n);
            const auto res = rs_uncertainty_check(cn);
            ok = ok && res.satisfied;
            worst = std::min(worst, res.margin);
            ++checked;
        }
        ok = ok && rs_uncertainty_check(seed_covariance(r)).satisfied;
    }
    return {ok, std::to_string(checked) + " covariances: min det C - 1/4 = " + fmt("%.3g", worst)};
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + KERRZENO_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Verdict ac7_determinism()
{
    const json raw = {{"experiment", "trajectories"},
                      {"master_seed", 99},
                      {"parameters", {{"n_trajectories", 2000}, {"n_steps", 10}, {"r", 0.5}}}};
    const bool lib_same = csv_of(ex::run_experiment(config_of(raw))) == csv_of(ex::run_experiment(config_of(raw)));

    const auto dir = std::filesystem::temp_directory_path() / "kerrzeno_acceptance";
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "traj.json";
    std::ofstream(cfg) << raw.dump();
    const auto a = dir / "a.csv", b = dir / "b.csv";
    const int ca = run_cli("run \"" + cfg.string() + "\" --output \"" + a.string() + "\"");
    const int cb = run_cli("run \"" + cfg.string() + "\" --output \"" + b.string() + "\"");
    const std::string sa = slurp(a);
    const bool cli_same = ca == 0 && cb == 0 && !sa.empty() && sa == slurp(b);
    return {lib_same && cli_same, std::string("library rerun ") + (lib_same ? "identical" : "differs") + ", CLI rerun " +
                                      (cli_same ? "identical" : "differs") + " (" + std::to_string(sa.size()) + " bytes)"};
}

}  // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {"AC1a", "Kerr collapse", ac1_collapse},
        {"AC1b", "Kerr revival at pi", ac1_revival},
        {"AC1c", "Fock curve vs closed form", ac1_closed_form},
        {"AC1d", "revival runtime", ac1_runtime},
        {"AC2a", "coherent accumulation N I", ac2_coherent},
        {"AC2b", "squeezed determinant growth", ac2_squeezed},
        {"AC3a", "chain convolution", ac3_convolution},
        {"AC3b", "Monte Carlo mean", ac3_mean},
        {"AC3c", "Monte Carlo covariance", ac3_covariance},
        {"AC3d", "chain runtime", ac3_runtime},
        {"AC4a", "continuous outcome density decays", ac4_continuous},
        {"AC4b", "dichotomic survival tends to 1", ac4_dichotomic},
        {"AC4c", "dichotomic short-time bound", ac4_bound},
        {"AC5a", "two-level closed form", ac5_closed_form},
        {"AC5b", "two-level long-chain limit", ac5_limit},
        {"AC5c", "two-level scaling crossover", ac5_crossover},
        {"AC5d", "two-level runtime", ac5_runtime},
        {"AC6a", "resolution of identity", ac6_defect},
        {"AC6b", "resolution of identity convergence", ac6_convergence},
        {"AC7a", "rotation properties", ac7_rotation},
        {"AC7b", "POVM completeness and stochasticity", ac7_povm},
        {"AC7c", "Kerr norm preservation", ac7_kerr_norm},
        {"AC7d", "Robertson-Schroedinger bound", ac7_uncertainty},
        {"AC7e", "seeded determinism", ac7_determinism},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass)
            ++failed;
        std::printf("[%s] %s %s: %s\n", v.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
