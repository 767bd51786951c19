// Command-line front end: crane_cli run --config <file> [options]

#include "crane/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

int main(int argc, char **argv) {
    using namespace crane;

    CLI::App app{"Crane payload tracking simulations"};
    app.require_subcommand(1);

    scenario::RunOptions opts;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string adaptive, controller, deadzone;

    auto *run = app.add_subcommand("run", "Run a scenario config");
    run->add_option("--config", config_path, "Scenario file")->required();
    auto *out_opt = run->add_option("--out", out_dir, "Output directory")->envname("CRANE_OUT");
    auto *seed_opt = run->add_option("--seed", seed, "Seed for feature sampling")->envname("CRANE_SEED");
    run->add_flag("--paired", opts.paired, "Run the baseline/candidate pair");
    run->add_option("--adaptive", adaptive, "Adaptive compensation")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--controller", controller, "Payload controller")
        ->check(CLI::IsMember({"cartesian", "angular"}));
    run->add_option("--deadzone", deadzone, "Adaptation deadzone")
        ->check(CLI::IsMember({"on", "off"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : scenario::kExitConfig;
    }

    opts.config_path = config_path;
    if (*out_opt) {
        opts.out_dir = out_dir;
    }
    if (*seed_opt) {
        opts.seed = seed;
    }
    if (!adaptive.empty()) {
        opts.adaptive = adaptive == "on";
    }
    if (!controller.empty()) {
        opts.controller = controller == "angular" ? sim::ControllerKind::Angular
                                                  : sim::ControllerKind::Cartesian;
    }
    if (!deadzone.empty()) {
        opts.deadzone = deadzone == "on";
    }
    return scenario::run_scenario(opts, std::cout, std::cerr);
}
