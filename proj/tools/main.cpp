/// Command-line front end: reads a JSON config, dispatches one subcommand,
/// prints a one-line summary, and maps failures to exit codes
/// (0 ok, 2 config error, 3 numerical failure).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rdlab/experiment.hpp"

namespace {

constexpr int kConfigExit = 2;

struct SubcommandArgs {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1-D reaction-diffusion laboratory: solvers, spectra, and convergence tables"};
    app.require_subcommand(1);

    const char* descriptions[] = {
        "Integrate the problem and write the trajectory",
        "Step-halving error/order table at a fixed end time",
        "Eigenvalues of the one-step method matrix",
        "Newton iteration for the discrete steady state",
        "Smallest oscillatory time step per grid spacing",
        "Newton limits across a family of starting profiles",
    };

    SubcommandArgs args;
    std::size_t i = 0;
    for (const std::string& name : rdlab::cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name, descriptions[i++]);
        sub->add_option("--config", args.config_path, "JSON config file (omit for defaults)");
        sub->add_option("--out", args.out_dir, "Output directory (default: config or .)");
        sub->add_option("--format", args.format, "csv or json payload emission")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", args.seed, "Override the perturbed-IC seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigExit;
    }

    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) {
            std::cerr << "config error: cannot open " << args.config_path << "\n";
            return kConfigExit;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            config = nlohmann::ordered_json::parse(buf.str());
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "config error: " << args.config_path << ": " << e.what() << "\n";
            return kConfigExit;
        }
    }

    CLI::App* sub = app.get_subcommands().front();
    rdlab::cli::Overrides overrides;
    if (!args.out_dir.empty()) overrides.out_dir = args.out_dir;
    if (!args.format.empty()) overrides.format = args.format;
    if (sub->count("--seed") > 0) overrides.seed = args.seed;

    const std::string command = sub->get_name();
    const rdlab::cli::Outcome outcome = rdlab::cli::run_command(command, config, overrides);
    if (outcome.exit_code == 0)
        std::cout << outcome.message << "\n";
    else
        std::cerr << outcome.message << "\n";
    return outcome.exit_code;
}
