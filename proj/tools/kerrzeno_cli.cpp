// kerrzeno: run declarative Kerr/Zeno experiments and emit CSV or JSON.
//
// Exit codes: 0 success, 2 config error, 3 numeric/truncation error, 4 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kerrzeno/experiments.hpp"
#include "kerrzeno/fock.hpp"

namespace ex = kz::experiments;

namespace {

enum Exit { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

bool read_file(const std::string& path, std::string& out)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

int report(const std::vector<ex::ConfigError>& errors)
{
    for (const auto& e : errors)
        std::cerr << "config error at " << e.path << ": " << e.message << "\n";
    return config_error;
}

const char* type_name(ex::ParamType t)
{
    switch (t) {
    case ex::ParamType::number:
        return "number";
    case ex::ParamType::integer:
        return "integer";
    case ex::ParamType::integer_list:
        return "integer[]";
    case ex::ParamType::choice:
        return "string";
    }
    return "?";
}

void print_schemas()
{
    for (const auto& s : ex::experiment_schemas()) {
        std::cout << s.name << "\n  " << s.summary << "\n";
        for (const auto& p : s.params) {
            std::cout << "    " << p.name << " : " << type_name(p.type) << " = "
                      << (p.default_value.is_null() ? std::string("<derived>") : p.default_value.dump());
            if (p.min)
                std::cout << "  [" << (p.exclusive_min ? ">" : ">=") << " " << *p.min << "]";
            if (p.max)
                std::cout << "  [<= " << *p.max << "]";
            if (!p.choices.empty()) {
                std::cout << "  {";
                for (std::size_t i = 0; i < p.choices.size(); ++i)
                    std::cout << (i ? "|" : "") << p.choices[i];
                std::cout << "}";
            }
            std::cout << "\n        " << p.description << "\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Observed Kerr dynamics and Zeno-effect experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ex::tool_version());

    auto* run = app.add_subcommand("run", "run an experiment config");
    std::string run_path;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string format;
    run->add_option("config", run_path, "config file (JSON)")->required();
    run->add_option("--seed", seed, "override master_seed");
    run->add_option("--output", output, "output path ('-' for stdout)");
    run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* validate = app.add_subcommand("validate", "validate a config and print it with defaults");
    std::string validate_path;
    validate->add_option("config", validate_path, "config file (JSON)")->required();

    app.add_subcommand("list", "list experiments and their parameters");

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand("list")) {
        print_schemas();
        return ok;
    }

    const std::string& path = app.got_subcommand("run") ? run_path : validate_path;
    std::string text;
    if (!read_file(path, text)) {
        std::cerr << "cannot read " << path << "\n";
        return io_error;
    }
    ex::ValidationResult vr = ex::validate_config(text);
    if (!vr.ok())
        return report(vr.errors);
    ex::ExperimentConfig cfg = *vr.config;

    if (app.got_subcommand("validate")) {
        std::cout << cfg.to_json().dump(2) << "\n";
        return ok;
    }

    if (seed)
        cfg.master_seed = *seed;
    if (!output.empty())
        cfg.output_path = output == "-" ? "" : output;
    if (!format.empty())
        cfg.format = format == "json" ? ex::OutputFormat::json : ex::OutputFormat::csv;

    ex::ResultEnvelope env;
    try {
        env = ex::run_experiment(cfg);
    } catch (const kz::TruncationError& e) {
        std::cerr << "numeric error: " << e.what() << "\n"
                  << "hint: increase parameters.dim to at least " << e.required_dim() << "\n";
        return numeric_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return numeric_error;
    }

    auto emit = [&](std::ostream& os) {
        if (cfg.format == ex::OutputFormat::json)
            os << ex::envelope_to_json(env).dump(2) << "\n";
        else
            ex::write_csv(os, env.table);
    };

    if (cfg.output_path.empty()) {
        emit(std::cout);
        return ok;
    }
    std::ofstream out(cfg.output_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "cannot write " << cfg.output_path << "\n";
        return io_error;
    }
    emit(out);
    if (cfg.format == ex::OutputFormat::csv) {
        // CSV carries rows only; provenance goes next to it.
        std::ofstream meta(cfg.output_path + ".meta.json", std::ios::trunc);
        if (!meta) {
            std::cerr << "cannot write " << cfg.output_path << ".meta.json\n";
            return io_error;
        }
        meta << ex::envelope_metadata(env).dump(2) << "\n";
    }
    if (!out.good()) {
        std::cerr << "write failed for " << cfg.output_path << "\n";
        return io_error;
    }
    return ok;
}
