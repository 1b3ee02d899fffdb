#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csrec/experiments.hpp"

namespace {

struct SubcommandState {
    CLI::App* sub = nullptr;
    std::string config, out, model, sigma_grid;
    std::uint64_t seed = 0, n = 0, k = 0, m = 0, j = 0, trials = 0;
};

void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured-sparsity compressive sensing benchmark harness"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"recover", "single-instance recovery rows"},
        {"sweep-m", "recovery error versus the overmeasuring factor M/K"},
        {"sweep-n", "minimal M meeting a target error, across signal lengths"},
        {"noise", "maximum recovery error versus measurement noise level"},
        {"bounds", "measurement-bound tables"},
        {"modelcheck", "oracle-equivalence and invariant self-checks"},
    };

    std::vector<SubcommandState> states(commands.size());
    for (std::size_t i = 0; i < commands.size(); ++i) {
        SubcommandState& st = states[i];
        st.sub = app.add_subcommand(commands[i].first, commands[i].second);
        st.sub->add_option("--config", st.config, "key=value config file");
        st.sub->add_option("--seed", st.seed, "root RNG seed");
        st.sub->add_option("--out", st.out, "CSV output path (default stdout)");
        st.sub->add_option("--N", st.n, "signal length");
        st.sub->add_option("--K", st.k, "model sparsity");
        st.sub->add_option("--M", st.m, "measurement count");
        st.sub->add_option("--J", st.j, "block length");
        st.sub->add_option("--model", st.model, "plain | tree | block");
        st.sub->add_option("--trials", st.trials, "trials per configuration");
        st.sub->add_option("--sigma-grid", st.sigma_grid, "comma-separated noise levels");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < commands.size(); ++i) {
            const SubcommandState& st = states[i];
            if (!st.sub->parsed()) continue;
            csrec::ExperimentConfig cfg = csrec::default_config(commands[i].first);
            if (st.sub->count("--config")) csrec::apply_config_file(cfg, st.config);
            if (st.sub->count("--seed")) csrec::set_key(cfg, "seed", std::to_string(st.seed));
            if (st.sub->count("--N")) csrec::set_key(cfg, "N", std::to_string(st.n));
            if (st.sub->count("--K")) csrec::set_key(cfg, "K", std::to_string(st.k));
            if (st.sub->count("--M")) csrec::set_key(cfg, "M", std::to_string(st.m));
            if (st.sub->count("--J")) csrec::set_key(cfg, "J", std::to_string(st.j));
            if (st.sub->count("--model")) csrec::set_key(cfg, "model", st.model);
            if (st.sub->count("--trials"))
                csrec::set_key(cfg, "trials", std::to_string(st.trials));
            if (st.sub->count("--sigma-grid")) csrec::set_key(cfg, "sigma_grid", st.sigma_grid);
            if (st.sub->count("--out")) csrec::set_key(cfg, "out", st.out);

            if (cfg.experiment == "modelcheck") {
                csrec::ModelCheckResult res = csrec::run_modelcheck(cfg.trials, cfg.seed);
                emit(cfg.out, res.report);
                return res.ok ? 0 : 1;
            }
            emit(cfg.out, csrec::run_experiment(cfg));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
