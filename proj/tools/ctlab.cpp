#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "ctlab/errors.hpp"
#include "ctlab/experiment.hpp"

namespace {

// Exit codes: 0 ok, 2 config error, 3 insufficient data, 4 internal failure.
constexpr int kExitConfig = 2;
constexpr int kExitInsufficientData = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
    std::string spec;
    std::string out;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool progress = false;
    std::string cache_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--spec", args.spec, "scenario/spec JSON file")->required();
    cmd->add_option("--out", args.out, "output path (prefix for histogram)")->required();
    cmd->add_option("--seed", args.seed, "override the spec's base seed")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (default: hardware)");
    cmd->add_flag("--progress", args.progress, "per-grid-point progress on stderr");
    cmd->add_option("--cache-dir", args.cache_dir,
                    "PER-table cache directory (default: $CTLAB_CACHE_DIR or ./ctlab_cache)");
}

ctlab::RunOptions make_options(const CommonArgs& args)
{
    ctlab::RunOptions opt;
    opt.threads = args.threads > 0
                      ? args.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (args.seed_set)
        opt.seed_override = args.seed;
    opt.cache_dir = args.cache_dir;
    if (args.progress)
        opt.progress = [](size_t done, size_t total) {
            std::fprintf(stderr, "\r%zu/%zu grid points", done, total);
            if (done == total)
                std::fprintf(stderr, "\n");
            std::fflush(stderr);
        };
    return opt;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ctlab - concurrent-transmission physical layer laboratory"};
    app.require_subcommand(1);

    CommonArgs sweep_args, hist_args, temp_args, flood_args;
    auto* sweep = app.add_subcommand("sweep", "PER/PRR/PLR sweeps over scenario grids");
    add_common(sweep, sweep_args);
    auto* hist = app.add_subcommand("histogram", "bit-error histogram and RFO estimate");
    add_common(hist, hist_args);
    auto* temp = app.add_subcommand("tempsweep", "heated-transmitter temperature sweep");
    add_common(temp, temp_args);
    auto* flood = app.add_subcommand("flood", "CT flooding protocols under jamming");
    add_common(flood, flood_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed())
            ctlab::cmd_sweep(sweep_args.spec, sweep_args.out, make_options(sweep_args));
        else if (hist->parsed())
            ctlab::cmd_histogram(hist_args.spec, hist_args.out, make_options(hist_args));
        else if (temp->parsed())
            ctlab::cmd_tempsweep(temp_args.spec, temp_args.out, make_options(temp_args));
        else if (flood->parsed())
            ctlab::cmd_flood(flood_args.spec, flood_args.out, make_options(flood_args));
        return 0;
    } catch (const ctlab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ctlab::InvalidInputError& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitConfig;
    } catch (const ctlab::InsufficientDataError& e) {
        std::fprintf(stderr, "insufficient data: %s\n", e.what());
        return kExitInsufficientData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInternal;
    }
}
