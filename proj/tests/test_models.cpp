#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "csrec/linalg.hpp"
#include "csrec/models.hpp"

namespace {

csrec::Vec random_vec(std::size_t n, std::uint64_t seed) {
    csrec::RngStream rng(seed);
    csrec::Vec x(n);
    for (double& v : x) v = rng.normal();
    return x;
}

double support_energy(const csrec::Vec& x, const csrec::Support& s) {
    double e = 0.0;
    for (std::size_t i : s) e += x[i] * x[i];
    return e;
}

// Magnitudes nonincreasing along every branch: child = parent * U[0,1].
csrec::Vec monotone_tree_vec(std::size_t n, std::uint64_t seed) {
    csrec::RngStream rng(seed);
    csrec::Vec mag(n);
    mag[0] = std::abs(rng.normal()) + 1.0;
    for (std::size_t t = 1; t < n; ++t) mag[t] = mag[t / 2] * rng.uniform01();
    csrec::Vec x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * mag[t];
    return x;
}

const csrec::ModelKind kPlain = csrec::PlainSparse{};

csrec::ModelKind tree_model() { return csrec::WaveletTree{csrec::haar(), 0}; }

}  // namespace

TEST_CASE("kterm_approx picks the largest magnitudes") {
    const csrec::Vec x{3.0, -5.0, 1.0};
    const csrec::ApproxResult r = csrec::kterm_approx(x, 1);
    CHECK(r.support == csrec::Support{1});
    CHECK(r.approximation == csrec::Vec{0.0, -5.0, 0.0});
    CHECK(r.error_l2 == doctest::Approx(std::sqrt(10.0)).epsilon(1e-14));

    const csrec::ApproxResult zero = csrec::kterm_approx(x, 0);
    CHECK(zero.support.empty());
    CHECK(zero.error_l2 == doctest::Approx(csrec::norm2(x)).epsilon(1e-14));

    const csrec::ApproxResult full = csrec::kterm_approx(x, 3);
    CHECK(full.approximation == x);
    CHECK(full.error_l2 == 0.0);

    // Tie at magnitude 2 resolves to the lower index.
    CHECK(csrec::kterm_approx({2.0, -2.0, 1.0}, 1).support == csrec::Support{0});
}

TEST_CASE("cssa_tree_approx equals kterm_approx on branch-monotone input") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const csrec::Vec x = monotone_tree_vec(32, 100 + seed);
        for (std::size_t k : {1, 3, 7, 16, 32}) {
            const csrec::ApproxResult tree = csrec::cssa_tree_approx(x, k);
            const csrec::ApproxResult plain = csrec::kterm_approx(x, k);
            CHECK(tree.support == plain.support);
        }
    }
}

TEST_CASE("cssa_tree_approx recovers an isolated deep leaf through its path") {
    csrec::Vec x(16, 0.0);
    x[15] = 7.0;  // finest-scale leaf; its rooted path is 0,1,3,7,15
    const csrec::ApproxResult r = csrec::cssa_tree_approx(x, 5);
    CHECK(r.support == csrec::Support{0, 1, 3, 7, 15});
    CHECK(r.error_l2 == 0.0);
}

TEST_CASE("cssa_tree_approx support is connected, rooted, exactly K") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const csrec::Vec x = random_vec(64, 7000 + seed);
        for (std::size_t k = 1; k <= 64; k += 7) {
            const csrec::ApproxResult r = csrec::cssa_tree_approx(x, k);
            CHECK(r.support.size() == k);
            CHECK(csrec::support_in_model(r.support, tree_model(), 64, k));
        }
    }
    CHECK_THROWS_AS(csrec::cssa_tree_approx(csrec::Vec(16, 1.0), 17), std::invalid_argument);
    CHECK_THROWS_AS(csrec::cssa_tree_approx(csrec::Vec(16, 1.0), 0), std::invalid_argument);
    CHECK_THROWS_AS(csrec::cssa_tree_approx(csrec::Vec(12, 1.0), 2), std::invalid_argument);
}

TEST_CASE("cssa_tree_approx matches the exhaustive oracle energy on 1000 draws") {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const csrec::Vec x = random_vec(16, 20000 + seed);
        for (std::size_t k = 1; k <= 8; ++k) {
            const csrec::ApproxResult fast = csrec::cssa_tree_approx(x, k);
            const csrec::ApproxResult slow = csrec::brute_force_tree_approx(x, k);
            CHECK(support_energy(x, fast.support) == support_energy(x, slow.support));
            ++checked;
        }
    }
    CHECK(checked == 8000);
}

TEST_CASE("brute_force_tree_approx pinned cases") {
    SUBCASE("unique two-element subtree") {
        const csrec::ApproxResult r = csrec::brute_force_tree_approx({1.0, 2.0, 3.0, 4.0}, 2);
        CHECK(r.support == csrec::Support{0, 1});
    }
    SUBCASE("all-zero input returns the lexicographically first subtree") {
        const csrec::ApproxResult r = csrec::brute_force_tree_approx(csrec::Vec(8, 0.0), 3);
        CHECK(r.support == csrec::Support{0, 1, 2});
        CHECK(r.error_l2 == 0.0);
    }
    SUBCASE("dominant node pulls in its rooted path") {
        csrec::RngStream rng(9u);
        csrec::Vec x(16);
        for (double& v : x) v = 0.01 * rng.normal();
        x[4] = 10.0;  // path 0,1,2,4
        const csrec::ApproxResult r = csrec::brute_force_tree_approx(x, 4);
        CHECK(r.support == csrec::Support{0, 1, 2, 4});
    }
    SUBCASE("enumeration guard") {
        CHECK_THROWS_AS(csrec::brute_force_tree_approx(csrec::Vec(128, 1.0), 2),
                        std::invalid_argument);
        CHECK_THROWS_AS(csrec::brute_force_tree_approx(csrec::Vec(64, 1.0), 13),
                        std::invalid_argument);
    }
}

TEST_CASE("block_approx keeps the strongest blocks") {
    const csrec::BlockSparse model{2, 3};
    const csrec::Vec x{3.0, 4.0, 1.0, 0.0, 0.0, 0.0};  // block norms 5, 1, 0
    const csrec::ApproxResult r = csrec::block_approx(x, model, 1);
    CHECK(r.support == csrec::Support{0, 1});
    CHECK(r.error_l2 == doctest::Approx(1.0).epsilon(1e-14));

    const csrec::ApproxResult full = csrec::block_approx(x, model, 3);
    CHECK(full.approximation == x);
    CHECK(full.error_l2 == 0.0);

    // Equal-norm blocks resolve to the lower block index.
    const csrec::Vec tied{1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    CHECK(csrec::block_approx(tied, model, 1).support == csrec::Support{0, 1});

    CHECK_THROWS_AS(csrec::block_approx(csrec::Vec(5, 1.0), model, 1), std::invalid_argument);
}

TEST_CASE("block_approx equals exhaustive block-subset search") {
    const csrec::BlockSparse model{3, 6};
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const csrec::Vec x = random_vec(18, 40000 + seed);
        const csrec::ApproxResult fast = csrec::block_approx(x, model, 2);
        double best = -1.0;
        for (std::size_t a = 0; a < 6; ++a) {
            for (std::size_t b = a + 1; b < 6; ++b) {
                csrec::Support s;
                for (std::size_t i = 0; i < 3; ++i) s.push_back(a * 3 + i);
                for (std::size_t i = 0; i < 3; ++i) s.push_back(b * 3 + i);
                best = std::max(best, support_energy(x, s));
            }
        }
        CHECK(support_energy(x, fast.support) == doctest::Approx(best).epsilon(1e-14));
    }
}

TEST_CASE("model_approx_B enlarges the budget multiplicatively") {
    const csrec::Vec x = random_vec(16, 5u);
    for (const csrec::ModelKind& model :
         {kPlain, tree_model(), csrec::ModelKind{csrec::BlockSparse{4, 4}}}) {
        const csrec::ApproxResult a = csrec::model_approx(x, model, 3);
        const csrec::ApproxResult b = csrec::model_approx_B(x, model, 3, 1);
        CHECK(a.support == b.support);
        CHECK(a.approximation == b.approximation);
    }
    CHECK(csrec::model_approx_B(x, kPlain, 3, 2).support == csrec::kterm_approx(x, 6).support);

    const csrec::ApproxResult wide = csrec::model_approx_B(x, tree_model(), 4, 2);
    const csrec::ApproxResult oracle = csrec::brute_force_tree_approx(x, 8);
    CHECK(support_energy(x, wide.support) == support_energy(x, oracle.support));

    // Budget saturates at the model maximum.
    CHECK(csrec::model_approx_B(x, kPlain, 10, 3).error_l2 == 0.0);
    CHECK_THROWS_AS(csrec::model_approx_B(x, kPlain, 3, 0), std::invalid_argument);
}

TEST_CASE("nested_approximations produce nested supports of staged sizes") {
    const csrec::Vec x = random_vec(16, 61u);
    for (const csrec::ModelKind& model :
         {kPlain, tree_model(), csrec::ModelKind{csrec::BlockSparse{2, 8}}}) {
        CAPTURE(csrec::model_name(model));
        const std::size_t budget = csrec::max_model_budget(model, 16);
        const std::size_t k = 3;
        const std::vector<csrec::Support> stages = csrec::nested_approximations(x, model, k);
        CHECK(stages.size() == (budget + k - 1) / k);
        for (std::size_t j = 0; j < stages.size(); ++j) {
            CHECK(csrec::is_valid_support(stages[j], 16));
            if (!std::holds_alternative<csrec::BlockSparse>(model))
                CHECK(stages[j].size() == std::min((j + 1) * k, budget));
            if (j > 0)
                CHECK(std::includes(stages[j].begin(), stages[j].end(), stages[j - 1].begin(),
                                    stages[j - 1].end()));
            CHECK(csrec::support_in_model(stages[j], model, 16, std::min((j + 1) * k, budget)));
        }
        // First stage is the plain model approximation of budget k.
        CHECK(stages.front() == csrec::model_approx(x, model, k).support);
        // Last stage covers everything.
        CHECK(stages.back().size() == 16);
    }
}

TEST_CASE("nested tree growth stays nested on many draws") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const csrec::Vec x = random_vec(16, 70000 + seed);
        const std::vector<csrec::Support> stages =
            csrec::nested_approximations(x, tree_model(), 2);
        for (std::size_t j = 1; j < stages.size(); ++j)
            CHECK(std::includes(stages[j].begin(), stages[j].end(), stages[j - 1].begin(),
                                stages[j - 1].end()));
    }
}

TEST_CASE("residual_partition telescopes exactly") {
    const csrec::Vec x = random_vec(24, 81u);
    for (const csrec::ModelKind& model : {kPlain, csrec::ModelKind{csrec::BlockSparse{3, 8}}}) {
        const std::size_t k = 4;
        const std::vector<csrec::Vec> pieces = csrec::residual_partition(x, model, k);
        csrec::Vec sum(x.size(), 0.0);
        std::vector<int> hits(x.size(), 0);
        for (const csrec::Vec& p : pieces) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                sum[i] += p[i];
                if (p[i] != 0.0) ++hits[i];
            }
        }
        CHECK(sum == x);  // disjoint supports make the telescoping exact
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(hits[i] <= 1);
        // First piece is the model approximation itself.
        CHECK(pieces.front() == csrec::model_approx(x, model, k).approximation);
    }

    // Plain pieces have nonincreasing norms.
    const std::vector<csrec::Vec> pieces = csrec::residual_partition(x, kPlain, 4);
    for (std::size_t j = 1; j < pieces.size(); ++j)
        CHECK(csrec::norm2(pieces[j]) <= csrec::norm2(pieces[j - 1]) + 1e-15);

    // Tree pieces: stage increments never exceed K coefficients.
    const csrec::Vec a = random_vec(32, 82u);
    const std::vector<csrec::Vec> tp = csrec::residual_partition(a, tree_model(), 5);
    csrec::Vec tsum(a.size(), 0.0);
    for (const csrec::Vec& p : tp) {
        std::size_t nz = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            tsum[i] += p[i];
            if (p[i] != 0.0) ++nz;
        }
        CHECK(nz <= 5);
    }
    CHECK(tsum == a);
}

TEST_CASE("model_sigma_profile is monotone and consistent with the approximators") {
    const csrec::Vec x = random_vec(32, 91u);
    for (const csrec::ModelKind& model :
         {kPlain, tree_model(), csrec::ModelKind{csrec::BlockSparse{4, 8}}}) {
        CAPTURE(csrec::model_name(model));
        const csrec::Vec prof = csrec::model_sigma_profile(x, model);
        CHECK(prof.size() == csrec::max_model_budget(model, 32));
        for (std::size_t k = 1; k < prof.size(); ++k) CHECK(prof[k] <= prof[k - 1] + 1e-15);
        CHECK(prof.back() == 0.0);
        for (std::size_t k = 1; k <= prof.size(); k += 3) {
            const double direct = csrec::model_approx(x, model, k).error_l2;
            CHECK(prof[k - 1] == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("structured_compressibility_fit recovers an exact power law") {
    // sigma_k = 1/k for k <= N/2: telescoping squares, then a flat tail
    // carrying the remaining energy.
    const std::size_t n = 64;
    csrec::Vec x(n);
    x[0] = 2.0;
    for (std::size_t i = 2; i <= n / 2; ++i) {
        const double a = 1.0 / static_cast<double>((i - 1) * (i - 1));
        const double b = 1.0 / static_cast<double>(i * i);
        x[i - 1] = std::sqrt(a - b);
    }
    const double half = static_cast<double>(n / 2);
    for (std::size_t i = n / 2 + 1; i <= n; ++i) x[i - 1] = std::sqrt(1.0 / (half * half * half));
    const csrec::CompressibilityFit fit = csrec::structured_compressibility_fit(x, kPlain);
    CHECK(fit.s == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.g == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("structured_compressibility_fit flags model-sparse input") {
    csrec::Vec x(16, 0.0);
    x[3] = 5.0;
    const csrec::CompressibilityFit one = csrec::structured_compressibility_fit(x, kPlain);
    CHECK(std::isinf(one.s));
    CHECK(one.g == 0.0);

    x[7] = 2.0;  // two nonzeros leave a single usable point
    const csrec::CompressibilityFit two = csrec::structured_compressibility_fit(x, kPlain);
    CHECK(std::isinf(two.s));
    CHECK_THROWS_AS(csrec::structured_compressibility_fit(csrec::Vec{1.0, 2.0}, kPlain),
                    std::invalid_argument);
}

TEST_CASE("support_in_model understands each model's geometry") {
    CHECK(csrec::support_in_model({0, 2, 5}, kPlain, 8, 3));
    CHECK_FALSE(csrec::support_in_model({0, 2, 5}, kPlain, 8, 2));
    CHECK_FALSE(csrec::support_in_model({0, 9}, kPlain, 8, 2));

    CHECK(csrec::support_in_model({0, 1, 3}, tree_model(), 16, 3));
    CHECK_FALSE(csrec::support_in_model({0, 1, 4}, tree_model(), 16, 3));  // 4 needs parent 2
    CHECK_FALSE(csrec::support_in_model({1, 2}, tree_model(), 16, 2));     // missing root
    CHECK(csrec::support_in_model({}, tree_model(), 16, 1));

    const csrec::ModelKind block{csrec::BlockSparse{2, 4}};
    CHECK(csrec::support_in_model({2, 3}, block, 8, 1));
    CHECK(csrec::support_in_model({2, 4}, block, 8, 2));
    CHECK_FALSE(csrec::support_in_model({2, 4}, block, 8, 1));
}

TEST_CASE("model_approx error is nonincreasing in K and idempotent") {
    const csrec::Vec x = random_vec(32, 101u);
    for (const csrec::ModelKind& model :
         {kPlain, tree_model(), csrec::ModelKind{csrec::BlockSparse{4, 8}}}) {
        CAPTURE(csrec::model_name(model));
        double prev = csrec::norm2(x);
        for (std::size_t k = 1; k <= csrec::max_model_budget(model, 32); ++k) {
            const csrec::ApproxResult r = csrec::model_approx(x, model, k);
            CHECK(r.error_l2 <= prev + 1e-15);
            prev = r.error_l2;
            const csrec::ApproxResult again = csrec::model_approx(r.approximation, model, k);
            CHECK(again.approximation == r.approximation);
        }
    }
}
