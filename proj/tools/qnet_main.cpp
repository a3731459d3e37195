#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnetsim.h"

namespace {

int drain_result(qnet_result* res) {
    const int lines = qnet_result_line_count(res);
    for (int i = 0; i < lines; ++i) std::printf("%s\n", qnet_result_line(res, i));
    const int artifacts = qnet_result_artifact_count(res);
    for (int i = 0; i < artifacts; ++i)
        std::printf("wrote %s\n", qnet_result_artifact(res, i));
    const int code = qnet_result_exit_code(res);
    qnet_result_free(res);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scenario-driven distributed quantum network simulator"};
    app.require_subcommand(1);

    std::string file;
    std::uint64_t seed = 0;
    int trials = 0;
    int jobs = 0;
    double epsilon = 0;
    std::string out_dir;
    std::vector<int> sizes;

    CLI::App* validate = app.add_subcommand("validate", "parse and check a scenario file");
    validate->add_option("file", file, "scenario JSON")->required();

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write its report");
    run->add_option("file", file, "scenario JSON")->required();
    CLI::Option* run_seed = run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--trials", trials, "override the trial count")->check(CLI::PositiveNumber);
    run->add_option("--jobs", jobs, "worker threads for trials")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory");
    CLI::Option* run_eps = run->add_option("--epsilon", epsilon, "detector tolerance");

    CLI::App* sweep = app.add_subcommand("sweep", "decoupling profile over V_E sizes");
    sweep->add_option("file", file, "scenario JSON")->required();
    sweep->add_option("--sizes", sizes, "comma-separated V_E sizes")->delimiter(',');
    sweep->add_option("--trials", trials, "trials per size")->check(CLI::PositiveNumber);
    CLI::Option* sweep_seed = sweep->add_option("--seed", seed, "override the scenario seed");
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : QNET_ERR_PARSE;
    }

    qnet_run_options opts = {};
    opts.seed = seed;
    opts.has_seed = (run_seed->count() > 0 || sweep_seed->count() > 0) ? 1 : 0;
    opts.trials = trials;
    opts.epsilon = epsilon;
    opts.has_epsilon = run_eps->count() > 0 ? 1 : 0;
    opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
    opts.jobs = jobs;

    qnet_result* res = nullptr;
    int status = QNET_OK;
    if (validate->parsed()) {
        status = qnet_validate(file.c_str(), &res);
    } else if (run->parsed()) {
        status = qnet_run(file.c_str(), &opts, &res);
    } else {
        status = qnet_sweep(file.c_str(), sizes.data(), static_cast<int>(sizes.size()), &opts,
                            &res);
    }
    if (status != QNET_OK) {
        std::fprintf(stderr, "error: %s\n", qnet_last_error());
        return status;
    }
    return drain_result(res);
}
