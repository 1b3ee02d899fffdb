#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "csrec/experiments.hpp"

using namespace csrec;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// Column indices in kResultHeader order.
enum { cExp, cSeed, cN, cK, cM, cJ, cModel, cAlgo, cTrial, cSigma, cRmse, cIters, cWall, cFlag };

std::string temp_path(const std::string& name) {
    return std::string("/tmp/csrec_test_") + name;
}

}  // namespace

TEST_CASE("default_config covers every experiment and rejects unknown names") {
    for (const char* e : {"recover", "sweep-m", "sweep-n", "noise", "bounds", "modelcheck"}) {
        ExperimentConfig cfg = default_config(e);
        CHECK(cfg.experiment == e);
    }
    CHECK(default_config("recover").trials == 1);
    CHECK(default_config("sweep-m").trials == 100);
    CHECK(default_config("noise").trials == 50);
    CHECK(default_config("sweep-m").grid.size() == 5);
    CHECK(default_config("noise").sigma_grid.size() == 6);
    CHECK(default_config("sweep-n").n_grid ==
          std::vector<std::size_t>{128, 256, 512, 1024});
    CHECK_THROWS_AS(default_config("frobnicate"), std::invalid_argument);
}

TEST_CASE("set_key parses and validates") {
    ExperimentConfig cfg = default_config("recover");
    set_key(cfg, "N", "512");
    set_key(cfg, "K", "20");
    set_key(cfg, "M", " 64 ");
    set_key(cfg, "seed", "42");
    set_key(cfg, "model", "plain");
    set_key(cfg, "timing", "off");
    set_key(cfg, "sigma_grid", "0,0.5,1.0");
    set_key(cfg, "grid", "");
    set_key(cfg, "target_factor", "3.0");
    CHECK(cfg.n == 512);
    CHECK(cfg.k == 20);
    CHECK(cfg.m == 64);
    CHECK(cfg.seed == 42);
    CHECK(cfg.model == "plain");
    CHECK_FALSE(cfg.timing);
    CHECK(cfg.sigma_grid == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(cfg.grid.empty());
    CHECK(cfg.target_factor == 3.0);

    CHECK_THROWS_AS(set_key(cfg, "bogus", "1"), std::invalid_argument);
    CHECK_THROWS_AS(set_key(cfg, "N", "twelve"), std::invalid_argument);
    CHECK_THROWS_AS(set_key(cfg, "N", "12x"), std::invalid_argument);
    CHECK_THROWS_AS(set_key(cfg, "timing", "maybe"), std::invalid_argument);
    CHECK_THROWS_AS(set_key(cfg, "experiment", "noise"), std::invalid_argument);
    set_key(cfg, "experiment", "recover");  // matching value is fine
}

TEST_CASE("config files parse comments and reject malformed input") {
    const std::string path = temp_path("cfg");
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "\n"
            << "N = 256   # trailing comment\n"
            << "K=10\n"
            << "model=tree\n";
    }
    ExperimentConfig cfg = default_config("recover");
    apply_config_file(cfg, path);
    CHECK(cfg.n == 256);
    CHECK(cfg.k == 10);
    CHECK(cfg.model == "tree");

    {
        std::ofstream out(path);
        out << "no equals sign here\n";
    }
    ExperimentConfig bad = default_config("recover");
    CHECK_THROWS_AS(apply_config_file(bad, path), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_file(bad, "/nonexistent/cfg"), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("CSV headers are frozen") {
    CHECK(std::string(kResultHeader) ==
          "experiment,seed,N,K,M,J,model,algorithm,trial,sigma,normalized_rmse,iterations,"
          "wall_time_s,flag");
    CHECK(std::string(kBoundsHeader) == "kind,N,K,J,delta,eps,r,t,value");
    ExperimentConfig cfg = default_config("recover");
    cfg.n = 128;
    cfg.k = 8;
    cfg.m = 40;
    cfg.timing = false;
    CHECK(lines_of(cmd_recover(cfg))[0] == kResultHeader);
    CHECK(lines_of(cmd_bounds(default_config("bounds")))[0] == kBoundsHeader);
}

TEST_CASE("recover emits one row per trial and algorithm plus aggregates") {
    ExperimentConfig cfg = default_config("recover");
    cfg.n = 256;
    cfg.k = 12;
    cfg.m = 60;
    cfg.trials = 2;
    cfg.seed = 3;
    cfg.timing = false;
    std::string csv = cmd_recover(cfg);
    auto rows = lines_of(csv);
    REQUIRE(rows.size() == 1 + 2 * 2 + 2);

    std::vector<double> model_errs;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        REQUIRE(f.size() == 14);
        CHECK(f[cExp] == "recover");
        CHECK(f[cSeed] == "3");
        CHECK(f[cWall] == "0");
        if (f[cAlgo] == "model-cosamp" && f[cFlag] == "ok")
            model_errs.push_back(std::stod(f[cRmse]));
        if (f[cFlag] == "aggregate") CHECK(f[cTrial] == "-1");
    }
    REQUIRE(model_errs.size() == 2);
    auto agg = fields_of(rows[5]);
    CHECK(agg[cAlgo] == "model-cosamp");
    CHECK(std::stod(agg[cRmse]) == 0.5 * (model_errs[0] + model_errs[1]));

    SUBCASE("byte determinism") { CHECK(cmd_recover(cfg) == csv); }
    SUBCASE("dispatch") { CHECK(run_experiment(cfg) == csv); }
    SUBCASE("zero measurements rejected") {
        cfg.m = 0;
        CHECK_THROWS_AS(cmd_recover(cfg), std::invalid_argument);
    }
}

TEST_CASE("recover writes the recovered signal side CSV") {
    ExperimentConfig cfg = default_config("recover");
    cfg.n = 128;
    cfg.k = 8;
    cfg.m = 48;
    cfg.timing = false;
    cfg.signal_out = temp_path("sig.csv");
    cmd_recover(cfg);
    std::ifstream in(cfg.signal_out);
    REQUIRE(bool(in));
    std::string header;
    std::getline(in, header);
    CHECK(header == "index,reference,model-cosamp,plain-cosamp");
    std::size_t count = 0;
    std::string line;
    while (std::getline(in, line)) ++count;
    CHECK(count == cfg.n);
    std::remove(cfg.signal_out.c_str());
}

TEST_CASE("sweep-m aggregates the mean per grid point") {
    ExperimentConfig cfg = default_config("sweep-m");
    cfg.n = 128;
    cfg.k = 8;
    cfg.grid = {2, 4};
    cfg.trials = 3;
    cfg.timing = false;
    std::string csv = cmd_sweep_m(cfg);
    auto rows = lines_of(csv);
    REQUIRE(rows.size() == 1 + 2 * 3 * 2 + 4);

    double sum = 0.0;
    std::size_t found = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        if (f[cFlag] != "aggregate" && f[cAlgo] == "model-cosamp" && f[cM] == "16") {
            sum += std::stod(f[cRmse]);
            ++found;
        }
    }
    REQUIRE(found == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        if (f[cFlag] == "aggregate" && f[cAlgo] == "model-cosamp" && f[cM] == "16")
            CHECK(std::stod(f[cRmse]) == doctest::Approx(sum / 3.0).epsilon(1e-15));
    }
    CHECK(cmd_sweep_m(cfg) == csv);
}

TEST_CASE("sweep-n rows carry the minimal M and a search flag") {
    ExperimentConfig cfg = default_config("sweep-n");
    cfg.k = 8;
    cfg.n_grid = {64, 128};
    cfg.trials = 2;
    cfg.attempts = 3;
    cfg.timing = false;
    std::string csv = cmd_sweep_n(cfg);
    auto rows = lines_of(csv);
    REQUIRE(rows.size() == 1 + 2 * 2 * 2 + 4);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        bool aggregate = f[cTrial] == "-1";
        if (!aggregate) {
            CHECK((f[cFlag] == "ok" || f[cFlag] == "unbracketed"));
            double m = std::stod(f[cM]);
            CHECK(m >= double(cfg.k));
            CHECK(m <= std::stod(f[cN]));
        }
    }
    CHECK(cmd_sweep_n(cfg) == csv);
}

TEST_CASE("noise uses per-algorithm budgets and max aggregation") {
    ExperimentConfig cfg = default_config("noise");
    cfg.n = 128;
    cfg.k = 8;
    cfg.sigma_grid = {0.0, 0.1};
    cfg.trials = 2;
    cfg.timing = false;
    std::string csv = cmd_noise(cfg);
    auto rows = lines_of(csv);
    REQUIRE(rows.size() == 1 + 2 * 2 * 2 + 4);

    double max_seen = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        CHECK(f[cM] == (f[cAlgo] == "plain-cosamp" ? "40" : "28"));
        if (f[cFlag] != "aggregate" && f[cAlgo] == "model-cosamp" && f[cSigma] == "0.1")
            max_seen = std::max(max_seen, std::stod(f[cRmse]));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        if (f[cFlag] == "aggregate" && f[cAlgo] == "model-cosamp" && f[cSigma] == "0.1")
            CHECK(std::stod(f[cRmse]) == max_seen);
    }
    CHECK(cmd_noise(cfg) == csv);
}

TEST_CASE("bounds tables include the structured-vs-standard comparison") {
    ExperimentConfig cfg = default_config("bounds");
    cfg.grid = {1, 4, 16};
    std::string csv = cmd_bounds(cfg);
    auto rows = lines_of(csv);
    REQUIRE(rows.size() > 1);

    double standard4 = -1, tree4 = -1;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        REQUIRE(f.size() == 9);
        if (f[0] == "standard-rip" && f[2] == "4") standard4 = std::stod(f[8]);
        if (f[0] == "tree-rip" && f[2] == "4") tree4 = std::stod(f[8]);
    }
    REQUIRE(standard4 > 0);
    REQUIRE(tree4 > 0);
    CHECK(tree4 < standard4);

    SUBCASE("empty grid leaves only the header") {
        cfg.grid.clear();
        CHECK(cmd_bounds(cfg) == std::string(kBoundsHeader) + "\n");
    }
}

TEST_CASE("modelcheck passes on healthy code") {
    ModelCheckResult res = run_modelcheck(30, 7);
    CHECK(res.ok);
    CHECK(res.report.find("modelcheck: PASS") != std::string::npos);
    CHECK(res.report.find("cssa-exhaustive") != std::string::npos);
}

TEST_CASE("IHT experiments apply the ensemble scale") {
    CHECK(iht_ensemble_scale(80, 26) > 0.70);
    CHECK(iht_ensemble_scale(80, 26) < 0.72);

    ExperimentConfig cfg = default_config("recover");
    cfg.algorithms = "model-iht,plain-iht";
    cfg.trials = 1;
    cfg.timing = false;
    std::string csv = cmd_recover(cfg);
    auto rows = lines_of(csv);
    double model_err = -1, plain_err = -1;
    std::string plain_flag;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields_of(rows[i]);
        if (f[cTrial] != "0") continue;
        if (f[cAlgo] == "model-iht") model_err = std::stod(f[cRmse]);
        if (f[cAlgo] == "plain-iht") {
            plain_err = std::stod(f[cRmse]);
            plain_flag = f[cFlag];
        }
    }
    CHECK(model_err > 0.02);
    CHECK(model_err < 0.20);
    CHECK(plain_err > 0.3);
    CHECK(plain_flag == "diverged");
}

TEST_CASE("invalid experiment configurations are rejected") {
    ExperimentConfig cfg = default_config("sweep-m");
    cfg.grid.clear();
    CHECK_THROWS_AS(cmd_sweep_m(cfg), std::invalid_argument);

    ExperimentConfig noise = default_config("noise");
    noise.sigma_grid = {-0.1};
    CHECK_THROWS_AS(cmd_noise(noise), std::invalid_argument);

    ExperimentConfig rec = default_config("recover");
    rec.model = "sparse";
    CHECK_THROWS_AS(cmd_recover(rec), std::invalid_argument);
    rec = default_config("recover");
    rec.algorithms = "model-cosamp,model-cosamp";
    CHECK_THROWS_AS(cmd_recover(rec), std::invalid_argument);
    rec = default_config("recover");
    rec.n = 100;  // not a power of two for a wavelet signal
    CHECK_THROWS_AS(cmd_recover(rec), std::invalid_argument);

    ExperimentConfig blk = default_config("recover");
    blk.model = "block";
    blk.signal = "block-random";
    blk.n = 128;
    blk.j = 7;  // does not divide N
    CHECK_THROWS_AS(cmd_recover(blk), std::invalid_argument);
}
