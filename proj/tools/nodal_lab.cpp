#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "nlab/errors.hpp"
#include "nlab/experiment.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
};

nlab::ExperimentConfig resolve(const GlobalOptions& g) {
    nlab::ExperimentConfig c = g.config_path.empty() ? nlab::ExperimentConfig{}
                                                     : nlab::ExperimentConfig::load(g.config_path);
    if (g.out) c.out = *g.out;
    if (g.threads) c.threads = *g.threads;
    if (g.seed) c.seed = *g.seed;
    c.validate();
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nodal-set experiments for biharmonic eigenfunctions"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory");
    app.add_option("--threads", g.threads, "worker threads");
    app.add_option("--seed", g.seed, "random seed");

    auto* solve = app.add_subcommand("solve", "compute eigenpairs and write the archive");
    auto* scaling = app.add_subcommand("scaling", "nodal length against sqrt(lambda)");
    auto* verify = app.add_subcommand("verify", "run the frequency and doubling checks");
    auto* tube = app.add_subcommand("tube-mass", "boundary tube L2 mass");
    auto* nodal = app.add_subcommand("nodal", "export the nodal set of one mode");
    int mode = 1;
    nodal->add_option("--mode", mode, "1-based mode index")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        const nlab::ExperimentConfig config = resolve(g);
        if (solve->parsed()) {
            const auto set = nlab::cmd_solve(config);
            for (std::size_t k = 0; k < set.pairs.size(); ++k)
                std::cout << "mode " << k + 1 << " lambda=" << nlab::format_double(set.pairs[k].lambda)
                          << " residual=" << nlab::format_double(set.pairs[k].relative_residual) << '\n';
        } else if (scaling->parsed()) {
            const auto res = nlab::cmd_scaling(config);
            std::cout << "sup L/sqrt(lambda)=" << nlab::format_double(res.summary.sup_ratio)
                      << " slope=" << nlab::format_double(res.summary.slope) << '\n';
        } else if (verify->parsed()) {
            const auto res = nlab::cmd_verify(config);
            for (const auto& r : res.reports)
                std::cout << r.id << ": " << (r.vacuous ? "VACUOUS" : (r.pass ? "PASS" : "FAIL")) << '\n';
            return res.exit_code();
        } else if (tube->parsed()) {
            const auto res = nlab::cmd_tube_mass(config);
            std::cout << "largest C1=" << nlab::format_double(res.report.implied_constant) << '\n';
        } else if (nodal->parsed()) {
            const auto ns = nlab::cmd_nodal(config, mode);
            std::cout << "polylines=" << ns.polylines.size() << " segments=" << ns.segment_count() << '\n';
        }
    } catch (const nlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const nlab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
