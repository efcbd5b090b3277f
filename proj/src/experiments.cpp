#include "kerrzeno/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "kerrzeno/fock.hpp"
#include "kerrzeno/observed.hpp"
#include "kerrzeno/phase_space.hpp"
#include "kerrzeno/two_level.hpp"

#ifndef KERRZENO_VERSION
#define KERRZENO_VERSION "0.0.0"
#endif

namespace kz::experiments {

namespace {

constexpr double pi = std::numbers::pi;

ParamSpec number(std::string name, json def, std::string desc, std::optional<double> lo = {},
                 std::optional<double> hi = {}, bool exclusive_min = false)
{
    return {std::move(name), ParamType::number, std::move(def), lo, hi, exclusive_min, {}, std::move(desc)};
}

ParamSpec integer(std::string name, json def, std::string desc, std::optional<double> lo = {},
                  std::optional<double> hi = {})
{
    return {std::move(name), ParamType::integer, std::move(def), lo, hi, false, {}, std::move(desc)};
}

ParamSpec int_list(std::string name, json def, std::string desc, double lo = 1)
{
    return {std::move(name), ParamType::integer_list, std::move(def), lo, {}, false, {}, std::move(desc)};
}

ParamSpec choice(std::string name, std::string def, std::vector<std::string> options, std::string desc)
{
    return {std::move(name), ParamType::choice, json(def), {}, {}, false, std::move(options), std::move(desc)};
}

std::vector<ExperimentSchema> build_schemas()
{
    const json null;
    return {
        {"revival",
         "Re<a>(chi t) of a Kerr-evolved coherent state: truncated Fock evolution vs closed form",
         {number("alpha_re", 4.0, "real part of the initial amplitude"),
          number("alpha_im", 0.0, "imaginary part of the initial amplitude"),
          number("chi_t_min", 0.0, "first chi*t sample"),
          number("chi_t_max", pi, "last chi*t sample"),
          integer("points", 512, "number of samples", 2),
          integer("dim", null, "Fock truncation (default from mean photon number)", 1),
          number("tail_budget", 1e-10, "allowed probability beyond the truncation", 0.0, 1.0, true)}},
        {"covariance-growth",
         "sqrt(det C_N) of the accumulated outcome covariance vs its N cosh(2r) leading term",
         {number("r", 0.5, "squeezing of the measurement seed"),
          number("theta", 0.01, "rotation per step, Omega*tau"),
          int_list("n_list", json::array({1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}), "numbers of measurements")}},
        {"trajectories",
         "Monte Carlo outcome chains under Gaussian measurement kernels vs the analytic final law",
         {number("alpha_re", 4.0, "real part of the initial amplitude"),
          number("alpha_im", 0.0, "imaginary part of the initial amplitude"),
          number("chi", 1.0, "Kerr rate"),
          number("n_bar", null, "mean photon number fixing Omega = 2 chi n_bar (default |alpha|^2)", 0.0),
          number("tau", 0.005, "time between measurements", 0.0),
          integer("n_steps", 20, "measurements per trajectory", 1),
          number("r", 0.0, "squeezing of the measurement seed"),
          integer("n_trajectories", 1000, "number of trajectories", 1),
          integer("paths", 5, "leading trajectories emitted in full", 0)}},
        {"zeno-continuous",
         "Outcome density at the initial point after N measurements with Omega t = 2 pi m",
         {number("r", 0.0, "squeezing of the measurement seed"),
          number("chi", 1.0, "Kerr rate"),
          number("n_bar", 16.0, "mean photon number", 0.0, {}, true),
          integer("m", 1, "number of full classical periods", 1),
          integer("n_min", 1, "smallest N", 1),
          integer("n_max", 100, "largest N", 1)}},
        {"zeno-dichotomic",
         "Survival under repeated projection on |z0>, confirmed outcomes, vs the short-time bound",
         {number("alpha_re", 2.0, "real part of the initial amplitude"),
          number("alpha_im", 0.0, "imaginary part of the initial amplitude"),
          number("r", 0.0, "squeezing of the measurement seed"),
          number("chi_t", 0.1, "total Kerr phase chi*t", 0.0),
          int_list("n_list", json::array({1, 10, 100, 1000}), "numbers of measurements"),
          integer("dim", null, "Fock truncation (default from the state)", 1),
          number("tail_budget", 1e-10, "allowed probability beyond the truncation", 0.0, 1.0, true)}},
        {"two-level",
         "Two-outcome overlapping POVM: (T^N)_11 vs closed form and asymptotic form",
         {number("alpha", 0.3, "overlap angle"),
          number("omega_tau", 0.05, "Rabi phase per step"),
          integer("n_min", 1, "smallest N", 1),
          integer("n_max", 200, "largest N", 1)}},
        {"two-level-sweep",
         "Survival at fixed omega*t with overlap angle alpha = c / N^beta",
         {number("c", 1.0, "overlap prefactor", 0.0),
          number("beta", 1.0, "decay exponent", 0.0),
          number("omega_t", 1.0, "total Rabi phase"),
          int_list("n_list", json::array({10, 100, 1000, 10000, 100000, 1000000}), "numbers of measurements")}},
        {"identity-check",
         "Resolution-of-identity defect of the displaced-state family on a polar grid",
         {choice("spec", "vacuum", {"vacuum", "squeezed"}, "measurement seed"),
          number("r", 0.5, "squeezing when spec = squeezed"),
          integer("dim", 60, "working Fock dimension", 2),
          integer("dim_check", 10, "largest checked Fock level", 0),
          integer("n_r", 200, "radial nodes", 1),
          integer("n_phi", 128, "angular nodes", 1),
          number("alpha_max", null, "radial extent in |alpha| (default sqrt(2 dim_check) + 5)", 0.0, {}, true),
          integer("refinements", 1, "additional grid doublings", 0, 3)}},
    };
}

const ExperimentSchema* find_schema(const std::string& name)
{
    for (const auto& s : experiment_schemas())
        if (s.name == name)
            return &s;
    return nullptr;
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_range(const ParamSpec& p, double v, const std::string& path, std::vector<ConfigError>& errors)
{
    if (p.min && (p.exclusive_min ? v <= *p.min : v < *p.min))
        errors.push_back({path, "value " + format_double(v) + " below " + (p.exclusive_min ? "or equal to " : "") +
                                    "minimum " + format_double(*p.min)});
    if (p.max && v > *p.max)
        errors.push_back({path, "value " + format_double(v) + " above maximum " + format_double(*p.max)});
}

void check_param(const ParamSpec& p, const json& v, const std::string& path, std::vector<ConfigError>& errors)
{
    switch (p.type) {
    case ParamType::number:
        if (!v.is_number()) {
            errors.push_back({path, "expected a number"});
            return;
        }
        if (!std::isfinite(v.get<double>())) {
            errors.push_back({path, "must be finite"});
            return;
        }
        check_range(p, v.get<double>(), path, errors);
        return;
    case ParamType::integer:
        if (!v.is_number_integer()) {
            errors.push_back({path, "expected an integer"});
            return;
        }
        check_range(p, v.get<double>(), path, errors);
        return;
    case ParamType::integer_list:
        if (!v.is_array() || v.empty()) {
            errors.push_back({path, "expected a non-empty array of integers"});
            return;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string ip = path + "/" + std::to_string(i);
            if (!v[i].is_number_integer())
                errors.push_back({ip, "expected an integer"});
            else
                check_range(p, v[i].get<double>(), ip, errors);
        }
        return;
    case ParamType::choice:
        if (!v.is_string()) {
            errors.push_back({path, "expected a string"});
            return;
        }
        if (std::find(p.choices.begin(), p.choices.end(), v.get<std::string>()) == p.choices.end()) {
            std::string opts;
            for (const auto& c : p.choices)
                opts += (opts.empty() ? "" : ", ") + c;
            errors.push_back({path, "unknown value '" + v.get<std::string>() + "'; expected one of " + opts});
        }
        return;
    }
}

Complex initial_alpha(const json& p)
{
    return {p.at("alpha_re").get<double>(), p.at("alpha_im").get<double>()};
}

// Fill derived defaults and run cross-field checks.
void resolve(const std::string& name, json& p, std::vector<ConfigError>& errors)
{
    auto err = [&](const std::string& key, const std::string& msg) { errors.push_back({"/parameters/" + key, msg}); };

    if (name == "revival") {
        if (p["chi_t_max"].get<double>() < p["chi_t_min"].get<double>())
            err("chi_t_max", "must not be below chi_t_min");
        if (p["dim"].is_null())
            p["dim"] = std::max<Index>(recommended_dim(std::norm(initial_alpha(p))), 2);
    } else if (name == "trajectories") {
        if (p["n_bar"].is_null())
            p["n_bar"] = std::norm(initial_alpha(p));
        if (p["paths"].get<long long>() > p["n_trajectories"].get<long long>())
            err("paths", "must not exceed n_trajectories");
    } else if (name == "zeno-continuous" || name == "two-level") {
        if (p["n_max"].get<long long>() < p["n_min"].get<long long>())
            err("n_max", "must not be below n_min");
        if (name == "zeno-continuous" && p["n_max"].get<long long>() > 100000)
            err("n_max", "above maximum 100000");
    } else if (name == "zeno-dichotomic") {
        if (p["dim"].is_null()) {
            const Complex alpha = initial_alpha(p);
            const double r = p["r"].get<double>();
            const double sh = std::sinh(r);
            Index dim = recommended_dim(std::norm(alpha) + sh * sh);
            if (r != 0.0) {
                try {
                    displaced_state(alpha, MeasurementSpec::squeezed(r), dim, p["tail_budget"].get<double>());
                } catch (const TruncationError& e) {
                    dim = e.required_dim();
                }
            }
            p["dim"] = dim;
        }
    } else if (name == "identity-check") {
        if (p["dim_check"].get<long long>() >= p["dim"].get<long long>())
            err("dim_check", "must be below dim");
        if (p["alpha_max"].is_null())
            p["alpha_max"] = std::sqrt(2.0 * p["dim_check"].get<double>()) + 5.0;
    }
}

MeasurementSpec seed_spec(double r)
{
    return r == 0.0 ? MeasurementSpec::vacuum() : MeasurementSpec::squeezed(r);
}

Table run_revival(const json& p)
{
    const Complex alpha = initial_alpha(p);
    const auto dim = p["dim"].get<Index>();
    const FockVector psi = coherent_state(alpha, dim, p["tail_budget"].get<double>());
    const auto points = p["points"].get<long long>();
    const double lo = p["chi_t_min"].get<double>();
    const double hi = p["chi_t_max"].get<double>();

    Table t{{"chi_t", "re_mean_a_exact", "re_mean_a_closed", "im_mean_a_exact", "im_mean_a_closed", "abs_error"}, {}};
    for (long long i = 0; i < points; ++i) {
        const double chi_t = i + 1 == points ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const Complex exact = mean_a(kerr_propagate(psi, chi_t));
        const Complex closed = mean_a_closed_form(alpha, chi_t);
        t.rows.push_back({chi_t, exact.real(), closed.real(), exact.imag(), closed.imag(), std::abs(exact - closed)});
    }
    return t;
}

Table run_covariance_growth(const json& p)
{
    const double r = p["r"].get<double>();
    const double theta = p["theta"].get<double>();
    const Matrix2 c1 = step_covariance(r, theta);
    Table t{{"n", "sqrt_det_cn", "n_cosh_2r", "ratio", "rs_margin"}, {}};
    for (const auto& jn : p["n_list"]) {
        const long n = jn.get<long>();
        const Matrix2 cn = accumulate_covariance(c1, theta, n);
        const double sd = std::sqrt(cn.determinant());
        const double lead = det_cn_asymptotic(r, n);
        t.rows.push_back({static_cast<long long>(n), sd, lead, sd / lead, rs_uncertainty_check(cn).margin});
    }
    return t;
}

Table run_trajectories(const json& p, std::uint64_t seed)
{
    ObservedRunConfig cfg;
    const Complex alpha = initial_alpha(p);
    cfg.z0 = phase_point(alpha.real(), alpha.imag());
    cfg.params = {p["chi"].get<double>(), p["n_bar"].get<double>(), p["tau"].get<double>(), p["n_steps"].get<long>()};
    cfg.spec = seed_spec(p["r"].get<double>());
    cfg.n_trajectories = p["n_trajectories"].get<long>();
    cfg.master_seed = seed;

    Table t{{"record", "trajectory", "step", "t", "q", "p", "quantity", "sample", "analytic", "std_error"}, {}};
    const auto paths = p["paths"].get<long>();
    for (long i = 0; i < paths; ++i) {
        const TrajectoryRecord rec = run_trajectory(cfg, i);
        t.rows.push_back({std::string("path"), static_cast<long long>(i), 0LL, 0.0, cfg.z0(0), cfg.z0(1), {}, {}, {}, {}});
        for (const auto& o : rec.outcomes)
            t.rows.push_back({std::string("path"), static_cast<long long>(i), static_cast<long long>(o.step), o.time,
                              o.z(0), o.z(1), {}, {}, {}, {}});
    }

    const GaussianState2D law = analytic_final_distribution(cfg);
    const double total_t = cfg.params.total_time();
    auto moment = [&](const std::string& q, double sample, double analytic, double se) {
        t.rows.push_back({std::string("moment"), {}, static_cast<long long>(cfg.params.n_steps), total_t, {}, {}, q,
                          sample, analytic, se});
    };
    const PhaseVector drift = classical_evolve(cfg.z0, cfg.params.omega(), total_t);
    if (cfg.n_trajectories >= 2) {
        const auto finals = final_outcomes(cfg);
        const SampleMoments m = sample_moments(finals);
        const double n = static_cast<double>(m.count);
        const Matrix2& c = law.cov;
        moment("mean_q", m.mean(0), drift(0), std::sqrt(c(0, 0) / n));
        moment("mean_p", m.mean(1), drift(1), std::sqrt(c(1, 1) / n));
        moment("cov_qq", m.cov(0, 0), c(0, 0), std::sqrt(2.0 * c(0, 0) * c(0, 0) / n));
        moment("cov_qp", m.cov(0, 1), c(0, 1), std::sqrt((c(0, 0) * c(1, 1) + c(0, 1) * c(0, 1)) / n));
        moment("cov_pp", m.cov(1, 1), c(1, 1), std::sqrt(2.0 * c(1, 1) * c(1, 1) / n));
    }
    return t;
}

Table run_zeno_continuous(const json& p)
{
    const double chi = p["chi"].get<double>();
    const double n_bar = p["n_bar"].get<double>();
    const double omega = 2.0 * chi * n_bar;
    const double total_t = 2.0 * pi * p["m"].get<double>() / omega;

    ObservedRunConfig cfg;
    cfg.z0 = phase_point(std::sqrt(n_bar), 0.0);
    cfg.spec = seed_spec(p["r"].get<double>());
    Table t{{"n", "survival_density", "n_times_density", "sqrt_det_cn"}, {}};
    for (long n = p["n_min"].get<long>(); n <= p["n_max"].get<long>(); ++n) {
        cfg.params = {chi, n_bar, total_t / static_cast<double>(n), n};
        const double dens = survival_density_continuous(cfg);
        const double sd = std::sqrt(analytic_final_distribution(cfg).cov.determinant());
        t.rows.push_back({static_cast<long long>(n), dens, static_cast<double>(n) * dens, sd});
    }
    return t;
}

Table run_zeno_dichotomic(const json& p)
{
    const Complex alpha = initial_alpha(p);
    const MeasurementSpec spec = seed_spec(p["r"].get<double>());
    const auto dim = p["dim"].get<Index>();
    const double budget = p["tail_budget"].get<double>();
    const double chi_t = p["chi_t"].get<double>();
    const double var = number_square_variance(displaced_state(alpha, spec, dim, budget));

    Table t{{"n", "survival", "bound", "var_n_squared"}, {}};
    for (const auto& jn : p["n_list"]) {
        const long n = jn.get<long>();
        t.rows.push_back({static_cast<long long>(n), dichotomic_survival_exact(alpha, spec, 1.0, chi_t, n, dim, budget),
                          dichotomic_survival_bound(var, chi_t, n), var});
    }
    return t;
}

Table run_two_level(const json& p)
{
    const double alpha = p["alpha"].get<double>();
    const double wt = p["omega_tau"].get<double>();
    Table t{{"n", "exact", "closed_form", "asymptotic", "abs_diff"}, {}};
    for (long n = p["n_min"].get<long>(); n <= p["n_max"].get<long>(); ++n) {
        const TwoLevelModel m{alpha, 1.0, wt, n};
        const double exact = survival_exact(m);
        const double closed = survival_closed_form(m);
        const double asym = survival_asymptotic(fold_overlap_angle(alpha).alpha, 1.0, wt * static_cast<double>(n), n);
        t.rows.push_back({static_cast<long long>(n), exact, closed, asym, std::abs(exact - closed)});
    }
    return t;
}

Table run_two_level_sweep(const json& p)
{
    std::vector<long> ns;
    for (const auto& jn : p["n_list"])
        ns.push_back(jn.get<long>());
    Table t{{"n", "alpha", "survival"}, {}};
    for (const auto& pt : scaling_sweep(p["c"].get<double>(), p["beta"].get<double>(), 1.0, p["omega_t"].get<double>(), ns))
        t.rows.push_back({static_cast<long long>(pt.n), pt.alpha, pt.survival});
    return t;
}

Table run_identity_check(const json& p)
{
    const MeasurementSpec spec = p["spec"].get<std::string>() == "vacuum" ? MeasurementSpec::vacuum()
                                                                           : MeasurementSpec::squeezed(p["r"].get<double>());
    PolarGrid grid;
    grid.n_r = p["n_r"].get<Index>();
    grid.n_phi = p["n_phi"].get<Index>();
    grid.alpha_max = p["alpha_max"].get<double>();
    Table t{{"n_r", "n_phi", "alpha_max", "defect"}, {}};
    for (long long k = 0; k <= p["refinements"].get<long long>(); ++k) {
        const double defect = identity_resolution_defect(spec, p["dim"].get<Index>(), p["dim_check"].get<Index>(), grid);
        t.rows.push_back({static_cast<long long>(grid.n_r), static_cast<long long>(grid.n_phi), grid.alpha_max, defect});
        grid = grid.refined();
    }
    return t;
}

json cell_to_json(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return nullptr;
            else
                return v;
        },
        c);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string cell_to_csv(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return "";
            else if constexpr (std::is_same_v<T, long long>)
                return std::to_string(v);
            else if constexpr (std::is_same_v<T, double>)
                return format_double(v);
            else
                return csv_field(v);
        },
        c);
}

}  // namespace

const std::vector<ExperimentSchema>& experiment_schemas()
{
    static const std::vector<ExperimentSchema> schemas = build_schemas();
    return schemas;
}

std::string tool_version()
{
    return KERRZENO_VERSION;
}

json ExperimentConfig::to_json() const
{
    return {{"experiment", experiment},
            {"master_seed", master_seed},
            {"parameters", parameters},
            {"output", {{"path", output_path}, {"format", format == OutputFormat::csv ? "csv" : "json"}}}};
}

ValidationResult validate_config(const std::string& text)
{
    json raw;
    try {
        raw = json::parse(text);
    } catch (const json::parse_error& e) {
        return {std::nullopt, {{"/", std::string("malformed JSON: ") + e.what()}}};
    }
    return validate_config(raw);
}

ValidationResult validate_config(const json& raw)
{
    std::vector<ConfigError> errors;
    if (!raw.is_object())
        return {std::nullopt, {{"/", "config must be a JSON object"}}};

    static const std::set<std::string> root_keys{"experiment", "parameters", "output", "master_seed"};
    for (const auto& [key, _] : raw.items())
        if (!root_keys.contains(key))
            errors.push_back({"/" + key, "unknown key"});

    ExperimentConfig cfg;
    const ExperimentSchema* schema = nullptr;
    if (!raw.contains("experiment")) {
        errors.push_back({"/", "missing required key 'experiment'"});
    } else if (!raw["experiment"].is_string()) {
        errors.push_back({"/experiment", "expected a string"});
    } else {
        cfg.experiment = raw["experiment"].get<std::string>();
        schema = find_schema(cfg.experiment);
        if (!schema) {
            std::string names;
            for (const auto& s : experiment_schemas())
                names += (names.empty() ? "" : ", ") + s.name;
            errors.push_back({"/experiment", "unknown experiment '" + cfg.experiment + "'; expected one of " + names});
        }
    }

    if (raw.contains("master_seed")) {
        const json& s = raw["master_seed"];
        if (s.is_number_unsigned())
            cfg.master_seed = s.get<std::uint64_t>();
        else if (s.is_number_integer() && s.get<std::int64_t>() >= 0)
            cfg.master_seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
        else if (s.is_number_integer())
            errors.push_back({"/master_seed", "must be non-negative"});
        else
            errors.push_back({"/master_seed", "expected an integer"});
    }

    if (raw.contains("output")) {
        const json& o = raw["output"];
        if (!o.is_object()) {
            errors.push_back({"/output", "expected an object"});
        } else {
            for (const auto& [key, v] : o.items()) {
                if (key == "path") {
                    if (v.is_string())
                        cfg.output_path = v.get<std::string>();
                    else
                        errors.push_back({"/output/path", "expected a string"});
                } else if (key == "format") {
                    if (v == "csv")
                        cfg.format = OutputFormat::csv;
                    else if (v == "json")
                        cfg.format = OutputFormat::json;
                    else
                        errors.push_back({"/output/format", "expected \"csv\" or \"json\""});
                } else {
                    errors.push_back({"/output/" + key, "unknown key"});
                }
            }
        }
    }

    json params = json::object();
    if (raw.contains("parameters")) {
        if (!raw["parameters"].is_object())
            errors.push_back({"/parameters", "expected an object"});
        else
            params = raw["parameters"];
    }

    if (schema && params.is_object()) {
        json resolved = json::object();
        for (const auto& [key, v] : params.items()) {
            const auto it = std::find_if(schema->params.begin(), schema->params.end(),
                                         [&](const ParamSpec& p) { return p.name == key; });
            if (it == schema->params.end())
                errors.push_back({"/parameters/" + key, "unknown parameter for '" + schema->name + "'"});
        }
        for (const auto& p : schema->params) {
            const std::string path = "/parameters/" + p.name;
            if (params.contains(p.name)) {
                check_param(p, params[p.name], path, errors);
                resolved[p.name] = params[p.name];
            } else {
                resolved[p.name] = p.default_value;
            }
        }
        if (errors.empty())
            resolve(schema->name, resolved, errors);
        cfg.parameters = std::move(resolved);
    }

    if (!errors.empty())
        return {std::nullopt, std::move(errors)};
    return {std::move(cfg), {}};
}

ResultEnvelope run_experiment(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const json& p = config.parameters;
    const std::string& name = config.experiment;

    Table table;
    if (name == "revival")
        table = run_revival(p);
    else if (name == "covariance-growth")
        table = run_covariance_growth(p);
    else if (name == "trajectories")
        table = run_trajectories(p, config.master_seed);
    else if (name == "zeno-continuous")
        table = run_zeno_continuous(p);
    else if (name == "zeno-dichotomic")
        table = run_zeno_dichotomic(p);
    else if (name == "two-level")
        table = run_two_level(p);
    else if (name == "two-level-sweep")
        table = run_two_level_sweep(p);
    else if (name == "identity-check")
        table = run_identity_check(p);
    else
        throw std::invalid_argument("run_experiment: unknown experiment '" + name + "'");

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return {config, tool_version(), elapsed.count(), std::move(table)};
}

void write_csv(std::ostream& os, const Table& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << (i ? "," : "") << csv_field(table.columns[i]);
    os << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << cell_to_csv(row[i]);
        os << "\r\n";
    }
}

json envelope_metadata(const ResultEnvelope& env)
{
    return {{"experiment", env.config.experiment},
            {"config", env.config.to_json()},
            {"tool_version", env.tool_version},
            {"seed", env.config.master_seed},
            {"wall_time_s", env.wall_time_s},
            {"columns", env.table.columns}};
}

json envelope_to_json(const ResultEnvelope& env)
{
    json out = envelope_metadata(env);
    json rows = json::array();
    for (const auto& row : env.table.rows) {
        json r = json::array();
        for (const auto& c : row)
            r.push_back(cell_to_json(c));
        rows.push_back(std::move(r));
    }
    out["rows"] = std::move(rows);
    return out;
}

}  // namespace kz::experiments
