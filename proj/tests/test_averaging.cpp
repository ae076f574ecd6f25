#include <doctest.h>

#include <cmath>
#include <vector>

#include "fclass/averaging.hpp"
#include "fclass/rng.hpp"

using namespace fclass;

TEST_SUITE("averaging") {

TEST_CASE("JPrior masses") {
    const auto g = JPrior::geometric(0.5, 5, 15);
    CHECK(g.support.size() == 11);
    double total = 0.0;
    for (Eigen::Index i = 0; i < g.log_mass.size(); ++i) total += std::exp(g.log_mass[i]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // geometric ratio preserved after renormalization
    CHECK(std::exp(g.log_mass[1] - g.log_mass[0]) == doctest::Approx(0.5).epsilon(1e-12));

    const auto p = JPrior::poisson(8.0, 5, 15);
    double ptotal = 0.0;
    for (Eigen::Index i = 0; i < p.log_mass.size(); ++i) ptotal += std::exp(p.log_mass[i]);
    CHECK(ptotal == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(JPrior::geometric(1.5, 5, 15));
    CHECK_THROWS(JPrior::poisson(-1.0, 5, 15));
}

TEST_CASE("classify_by_vote") {
    SUBCASE("identical draws reduce to the single-draw argmax") {
        Eigen::VectorXd p(3);
        p << 0.2, 0.5, 0.3;
        const auto pred = classify_by_vote(4, 100, 3, [&](int, int) { return p; });
        for (int v : pred) CHECK(v == 1);
    }
    SUBCASE("majority of votes wins") {
        const auto pred = classify_by_vote(1, 4000, 2, [&](int, int g) {
            Eigen::VectorXd p(2);
            if (g < 2001) {
                p << 0.9, 0.1;
            } else {
                p << 0.1, 0.9;
            }
            return p;
        });
        CHECK(pred[0] == 0);  // 2001 vs 1999
    }
    SUBCASE("ties break to the smallest index") {
        const auto pred = classify_by_vote(1, 2, 3, [&](int, int g) {
            Eigen::VectorXd p(3);
            if (g == 0) {
                p << 0.6, 0.3, 0.1;
            } else {
                p << 0.1, 0.3, 0.6;
            }
            return p;
        });
        CHECK(pred[0] == 0);
    }
    SUBCASE("matches a brute-force recount and is permutation invariant") {
        RngStream rng(5, 0);
        const int n = 20, G = 200, K = 4;
        std::vector<Eigen::VectorXd> probs(static_cast<std::size_t>(n * G));
        for (auto& p : probs) {
            p.resize(K);
            for (int k = 0; k < K; ++k) p[k] = rng.uniform();
            p /= p.sum();
        }
        auto fn = [&](int i, int g) { return probs[static_cast<std::size_t>(i * G + g)]; };
        const auto pred = classify_by_vote(n, G, K, fn);
        // recount oracle on stored per-draw argmaxes
        for (int i = 0; i < n; ++i) {
            std::vector<int> votes(K, 0);
            for (int g = 0; g < G; ++g) {
                int arg = 0;
                for (int k = 1; k < K; ++k) {
                    if (probs[static_cast<std::size_t>(i * G + g)][k] >
                        probs[static_cast<std::size_t>(i * G + g)][arg]) {
                        arg = k;
                    }
                }
                ++votes[static_cast<std::size_t>(arg)];
            }
            int best = 0;
            for (int k = 1; k < K; ++k) {
                if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(best)]) best = k;
            }
            CHECK(pred[static_cast<std::size_t>(i)] == best);
        }
        // permuting the draw order leaves predictions unchanged
        auto fn_rev = [&](int i, int g) { return fn(i, G - 1 - g); };
        CHECK(classify_by_vote(n, G, K, fn_rev) == pred);
    }
}

TEST_CASE("misclassification_rate") {
    CHECK(misclassification_rate({0, 1, 2}, {0, 1, 2}) == 0.0);
    CHECK(misclassification_rate({1, 2, 0}, {0, 1, 2}) == 1.0);
    std::vector<int> pred(180, 0), truth(180, 0);
    for (int i = 0; i < 14; ++i) pred[static_cast<std::size_t>(i)] = 1;
    CHECK(misclassification_rate(pred, truth) == doctest::Approx(14.0 / 180.0).epsilon(1e-15));
    CHECK_THROWS(misclassification_rate({0, 1}, {0}));
}

TEST_CASE("posterior_over_J") {
    const auto prior = JPrior::geometric(0.5, 5, 9);
    SUBCASE("equal marginals return the prior") {
        const Eigen::VectorXd lm = Eigen::VectorXd::Constant(5, -100.0);
        const auto post = posterior_over_J(lm, prior);
        for (int s = 0; s < 5; ++s) CHECK(post[s] == doctest::Approx(std::exp(prior.log_mass[s])).epsilon(1e-12));
    }
    SUBCASE("a 50-log-unit gap is a point mass") {
        Eigen::VectorXd lm = Eigen::VectorXd::Constant(5, -200.0);
        lm[2] = -150.0;
        const auto post = posterior_over_J(lm, prior);
        CHECK(1.0 - post[2] <= 1e-18);
    }
    SUBCASE("matches extended-precision normalization") {
        RngStream rng(7, 0);
        Eigen::VectorXd lm(5);
        for (int s = 0; s < 5; ++s) lm[s] = -500.0 + 30.0 * rng.normal();
        const auto post = posterior_over_J(lm, prior);
        long double total = 0.0L;
        std::vector<long double> raw(5);
        for (int s = 0; s < 5; ++s) {
            raw[static_cast<std::size_t>(s)] =
                expl(static_cast<long double>(lm[s]) + static_cast<long double>(prior.log_mass[s]) + 500.0L);
            total += raw[static_cast<std::size_t>(s)];
        }
        for (int s = 0; s < 5; ++s) {
            CHECK(post[s] == doctest::Approx(static_cast<double>(raw[static_cast<std::size_t>(s)] / total))
                                 .epsilon(1e-12));
        }
    }
    SUBCASE("shift invariance") {
        RngStream rng(9, 0);
        Eigen::VectorXd lm(5);
        for (int s = 0; s < 5; ++s) lm[s] = -40.0 + 5.0 * rng.normal();
        const auto a = posterior_over_J(lm, prior);
        const auto b = posterior_over_J(lm.array() + 1234.5, prior);
        for (int s = 0; s < 5; ++s) CHECK(a[s] == doctest::Approx(b[s]).epsilon(1e-12));
    }
    SUBCASE("-inf entries allowed, all -inf rejected") {
        Eigen::VectorXd lm = Eigen::VectorXd::Constant(5, -std::numeric_limits<double>::infinity());
        CHECK_THROWS(posterior_over_J(lm, prior));
        lm[0] = -10.0;
        const auto post = posterior_over_J(lm, prior);
        CHECK(post[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("model_averaged_rate") {
    Eigen::VectorXd rates(2);
    rates << 0.0, 0.1;
    Eigen::VectorXd point(2);
    point << 1.0, 0.0;
    CHECK(model_averaged_rate(rates, point) == 0.0);
    Eigen::VectorXd uniform = Eigen::VectorXd::Constant(2, 0.5);
    CHECK(model_averaged_rate(rates, uniform) == doctest::Approx(0.05).epsilon(1e-15));
    // averaged rate lies between the extremes
    RngStream rng(11, 0);
    Eigen::VectorXd r(6), p(6);
    for (int i = 0; i < 6; ++i) {
        r[i] = rng.uniform();
        p[i] = rng.uniform();
    }
    p /= p.sum();
    const double avg = model_averaged_rate(r, p);
    CHECK(avg >= r.minCoeff());
    CHECK(avg <= r.maxCoeff());
    CHECK_THROWS(model_averaged_rate(r, uniform));
}

}  // TEST_SUITE
