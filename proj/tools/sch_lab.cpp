// Batch front-end: sch_lab --config run.ini [--seed N] [--out DIR] [--quiet]

#include "sch/config.hpp"
#include "sch/errors.hpp"
#include "sch/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic viscous Cahn-Hilliard laboratory"};
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool quiet = false;
    bool print_config = false;
    app.add_option("--config", config_path, "Run configuration file ([section] key = value)");
    app.add_option("--seed", seed, "Seed overriding the configuration file");
    app.add_option("--out", out_dir, "Output directory overriding [output] dir");
    app.add_flag("--quiet", quiet, "Suppress progress lines");
    app.add_flag("--print-config", print_config, "Print the canonical configuration and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sch::exit_usage_error;
    }

    try {
        std::string text;
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) {
                std::cerr << "error: cannot read " << config_path << '\n';
                return sch::exit_usage_error;
            }
            std::ostringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        }
        sch::RunConfig config = sch::parse_config_unvalidated(text);
        sch::apply_env_overrides(config);
        if (seed) {
            config.run.seed = *seed;
        }
        sch::validate_config(config);
        if (print_config) {
            std::cout << sch::emit_config(config);
            return sch::exit_pass;
        }
        sch::RunOptions options;
        options.out_dir = out_dir;
        options.quiet = quiet;
        options.log = &std::cout;
        const int code = sch::run(config, options);
        if (code != sch::exit_pass && !quiet) {
            std::cerr << "exit " << code << '\n';
        }
        return code;
    } catch (const sch::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return sch::exit_usage_error;
    } catch (const sch::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return sch::exit_usage_error;
    } catch (const sch::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sch::exit_usage_error;
    }
}
