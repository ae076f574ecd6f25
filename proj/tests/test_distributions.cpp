#include <doctest.h>

#include <cmath>
#include <limits>

#include "fclass/distributions.hpp"
#include "fclass/grid.hpp"
#include "fclass/rng.hpp"

#include "oracles.hpp"

using namespace fclass;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("distributions") {

TEST_CASE("normal cdf and quantile") {
    CHECK(normal_cdf(0.0) == 0.5);
    // against an extended-precision erfc evaluation
    for (double z : {-8.0, -3.3, -1.0, -0.1, 0.4, 1.96, 5.5, 12.0}) {
        const long double ref = 0.5L * erfcl(-static_cast<long double>(z) / 1.41421356237309504880L);
        CHECK(normal_cdf(z) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
    }
    // quantile round trip, including far tails
    for (double p : {1e-300, 1e-12, 0.0001, 0.025, 0.5, 0.8, 0.999999, 1.0 - 1e-12}) {
        const double z = normal_quantile(p);
        CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-11));
    }
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS(normal_quantile(-0.1));
}

TEST_CASE("sample_mvn moments") {
    RngStream rng(11, 0);
    SUBCASE("identity covariance CLT bound") {
        const int N = 100000;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
        Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(3);
        for (int i = 0; i < N; ++i) acc += sample_mvn(mean, cov, rng);
        acc /= N;
        for (int d = 0; d < 3; ++d) CHECK(std::abs(acc[d]) < 4.0 / std::sqrt(static_cast<double>(N)));
    }
    SUBCASE("dimension 1 reduces to a scalar normal") {
        Eigen::VectorXd mean(1);
        mean << 2.0;
        Eigen::MatrixXd cov(1, 1);
        cov << 4.0;
        double acc = 0.0, acc2 = 0.0;
        const int N = 100000;
        for (int i = 0; i < N; ++i) {
            const double x = sample_mvn(mean, cov, rng)[0];
            acc += x;
            acc2 += x * x;
        }
        acc /= N;
        CHECK(acc == doctest::Approx(2.0).epsilon(0.02));
        CHECK(acc2 / N - acc * acc == doctest::Approx(4.0).epsilon(0.05));
    }
    SUBCASE("correlation recovered") {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
        Eigen::MatrixXd cov(2, 2);
        cov << 1.0, 0.5, 0.5, 1.0;
        const int N = 1000000;
        double sxy = 0.0;
        for (int i = 0; i < N; ++i) {
            const auto x = sample_mvn(mean, cov, rng);
            sxy += x[0] * x[1];
        }
        CHECK(sxy / N == doctest::Approx(0.5).epsilon(0.02));
    }
    SUBCASE("non-SPD names the leading minor") {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
        Eigen::MatrixXd bad(2, 2);
        bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
        CHECK_THROWS_WITH_AS(sample_mvn(mean, bad, rng), doctest::Contains("leading minor"), std::runtime_error);
    }
}

TEST_CASE("sample_truncnorm") {
    RngStream rng(13, 0);
    SUBCASE("half-normal mean") {
        const int N = 100000;
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += sample_truncnorm(0.0, 1.0, 0.0, kInf, rng);
        CHECK(acc / N == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(0.005 / 0.8));
    }
    SUBCASE("no truncation is standard normal") {
        const int N = 100000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double x = sample_truncnorm(0.0, 1.0, -kInf, kInf, rng);
            acc += x;
            acc2 += x * x;
        }
        CHECK(std::abs(acc / N) < 0.02);
        CHECK(acc2 / N == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("far-tail interval (8,9) against the quadrature oracle") {
        // oracle: mean of TN(0,1,8,9) by fine quadrature of x phi(x)
        const int M = 200001;
        const double h = 1.0 / (M - 1);
        long double num = 0.0L, den = 0.0L;
        for (int i = 0; i < M; ++i) {
            const double x = 8.0 + i * h;
            const long double w = (i == 0 || i == M - 1) ? 0.5L : 1.0L;
            const long double phi = expl(-0.5L * static_cast<long double>(x) * x);
            num += w * x * phi;
            den += w * phi;
        }
        const double oracle_mean = static_cast<double>(num / den);
        const int N = 100000;
        double acc = 0.0;
        for (int i = 0; i < N; ++i) {
            const double x = sample_truncnorm(0.0, 1.0, 8.0, 9.0, rng);
            REQUIRE(x > 8.0);
            REQUIRE(x < 9.0);
            acc += x;
        }
        CHECK(acc / N == doctest::Approx(oracle_mean).epsilon(0.01 / 8.0));
    }
    SUBCASE("tail safety out to 40 sigma") {
        for (double a : {20.0, 35.0, 39.0}) {
            for (int i = 0; i < 200; ++i) {
                const double x = sample_truncnorm(0.0, 1.0, a, a + 1.0, rng);
                REQUIRE(std::isfinite(x));
                REQUIRE(x > a);
                REQUIRE(x < a + 1.0);
            }
        }
        for (int i = 0; i < 200; ++i) {
            const double x = sample_truncnorm(0.0, 1.0, -40.0, -39.5, rng);
            REQUIRE(std::isfinite(x));
            REQUIRE(x > -40.0);
            REQUIRE(x < -39.5);
        }
    }
    SUBCASE("error paths") {
        CHECK_THROWS(sample_truncnorm(0.0, 1.0, 2.0, 1.0, rng));
        CHECK_THROWS(sample_truncnorm(0.0, -1.0, 0.0, 1.0, rng));
    }
}

TEST_CASE("sample_matrix_normal Kronecker structure") {
    RngStream rng(17, 0);
    SUBCASE("identity factors give iid entries") {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 3);
        Eigen::MatrixXd U = Eigen::MatrixXd::Identity(2, 2);
        Eigen::MatrixXd V = Eigen::MatrixXd::Identity(3, 3);
        const int N = 50000;
        Eigen::MatrixXd acc2 = Eigen::MatrixXd::Zero(2, 3);
        for (int i = 0; i < N; ++i) {
            const auto X = sample_matrix_normal(M, U, V, rng);
            acc2 += X.cwiseProduct(X);
        }
        acc2 /= N;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) CHECK(acc2(r, c) == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("1x1 reduces to N(M, U*V)") {
        Eigen::MatrixXd M(1, 1), U(1, 1), V(1, 1);
        M << 1.0;
        U << 2.0;
        V << 3.0;
        const int N = 100000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double x = sample_matrix_normal(M, U, V, rng)(0, 0);
            acc += x;
            acc2 += x * x;
        }
        acc /= N;
        CHECK(acc == doctest::Approx(1.0).epsilon(0.05));
        CHECK(acc2 / N - acc * acc == doctest::Approx(6.0).epsilon(0.05));
    }
    SUBCASE("vec covariance equals V (x) U") {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
        Eigen::MatrixXd U(2, 2), V(2, 2);
        U << 1.0, 0.3, 0.3, 1.5;
        V << 2.0, -0.4, -0.4, 1.0;
        const int N = 100000;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
        for (int i = 0; i < N; ++i) {
            const auto X = sample_matrix_normal(M, U, V, rng);
            Eigen::VectorXd v(4);
            v << X(0, 0), X(1, 0), X(0, 1), X(1, 1);  // column-major vec
            cov += v * v.transpose();
        }
        cov /= N;
        Eigen::MatrixXd kron(4, 4);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) kron(a * 2 + c, b * 2 + d) = V(a, b) * U(c, d);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) CHECK(std::abs(cov(r, c) - kron(r, c)) < 0.02 * 3.0);
    }
}

TEST_CASE("sample_inverse_wishart") {
    RngStream rng(19, 0);
    SUBCASE("scalar case is inverse gamma with the stated mean") {
        Eigen::MatrixXd scale(1, 1);
        scale << 3.0;
        const int N = 100000;
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += sample_inverse_wishart(5.0, scale, rng)(0, 0);
        CHECK(acc / N == doctest::Approx(3.0 / (5.0 - 2.0)).epsilon(0.05));
    }
    SUBCASE("draws are symmetric positive definite") {
        Eigen::MatrixXd scale(3, 3);
        scale << 2.0, 0.5, 0.1, 0.5, 1.5, -0.2, 0.1, -0.2, 1.0;
        for (int i = 0; i < 200; ++i) {
            const auto S = sample_inverse_wishart(6.0, scale, rng);
            CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-12);
            Eigen::LLT<Eigen::MatrixXd> llt(S);
            CHECK(llt.info() == Eigen::Success);
        }
    }
    SUBCASE("dim-2 mean matches scale/(nu-3)") {
        Eigen::MatrixXd scale(2, 2);
        scale << 2.0, 0.6, 0.6, 1.0;
        const double nu = 7.0;
        const int N = 100000;
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
        for (int i = 0; i < N; ++i) acc += sample_inverse_wishart(nu, scale, rng);
        acc /= N;
        const Eigen::MatrixXd expected = scale / (nu - 3.0);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) CHECK(acc(r, c) == doctest::Approx(expected(r, c)).epsilon(0.05));
    }
    SUBCASE("invalid degrees of freedom") {
        Eigen::MatrixXd scale = Eigen::MatrixXd::Identity(3, 3);
        CHECK_THROWS(sample_inverse_wishart(1.5, scale, rng));
    }
}

TEST_CASE("gauss_laguerre_rule") {
    SUBCASE("order 1 is node 1, weight 1") {
        const auto rule = gauss_laguerre_rule(1);
        CHECK(rule.nodes[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rule.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("weight sums and first moment") {
        for (int Q : {1, 2, 8, 32, 64}) {
            const auto rule = gauss_laguerre_rule(Q);
            CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(rule.weights.dot(rule.nodes) == doctest::Approx(1.0).epsilon(1e-12));
            for (int q = 1; q < Q; ++q) CHECK(rule.nodes[q] > rule.nodes[q - 1]);
        }
    }
    SUBCASE("integrates exp(-x) cos(x) to 1/2") {
        const auto rule = gauss_laguerre_rule(32);
        const double v = rule.integrate([](double x) { return std::cos(x); });
        CHECK(v == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("exact on polynomial moments up to degree 2Q-1") {
        for (int Q : {2, 5, 12}) {
            const auto rule = gauss_laguerre_rule(Q);
            double moment = 1.0;  // k!
            for (int k = 0; k <= 2 * Q - 1; ++k) {
                if (k > 0) moment *= k;
                const double v = rule.integrate([k](double x) { return std::pow(x, k); });
                CHECK(v == doctest::Approx(moment).epsilon(1e-9));
            }
        }
    }
    SUBCASE("errors") { CHECK_THROWS(gauss_laguerre_rule(0)); }
}

TEST_CASE("log densities") {
    SUBCASE("mvn_logpdf standard values") {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
        Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(1, 1);
        CHECK(mvn_logpdf(x, x, I1) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
    }
    SUBCASE("matnorm_logpdf equals mvn_logpdf on vec with Kronecker covariance") {
        RngStream rng(23, 0);
        Eigen::MatrixXd U(2, 2), V(3, 3);
        U << 1.3, 0.4, 0.4, 2.0;
        V << 1.0, 0.2, 0.0, 0.2, 1.5, -0.3, 0.0, -0.3, 0.8;
        Eigen::MatrixXd M(2, 3), X(2, 3);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 3; ++c) {
                M(r, c) = rng.normal();
                X(r, c) = rng.normal();
            }
        Eigen::MatrixXd kron(6, 6);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) kron(a * 2 + c, b * 2 + d) = V(a, b) * U(c, d);
        Eigen::VectorXd xv(6), mv(6);
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 2; ++r) {
                xv[c * 2 + r] = X(r, c);
                mv[c * 2 + r] = M(r, c);
            }
        CHECK(matnorm_logpdf(X, M, U, V) == doctest::Approx(mvn_logpdf(xv, mv, kron)).epsilon(1e-10));
    }
    SUBCASE("iw_logpdf scalar case matches inverse gamma") {
        // IW_nu(scale) in 1-d is IG(nu/2, scale/2)
        const double nu = 5.0, scale = 3.0, x = 0.8;
        Eigen::MatrixXd S(1, 1), P(1, 1);
        S << x;
        P << scale;
        const double a = nu / 2.0, b = scale / 2.0;
        const double ig = a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
        CHECK(iw_logpdf(S, nu, P) == doctest::Approx(ig).epsilon(1e-12));
    }
}

TEST_CASE("sample_gp") {
    const TimeGrid grid = TimeGrid::regular(21);
    SUBCASE("zero kernel returns the mean exactly") {
        RngStream rng(29, 0);
        const auto x = sample_gp([](double t) { return std::sin(t); }, [](double, double) { return 0.0; },
                                 grid, rng);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(x[i] == doctest::Approx(std::sin(grid[i])).epsilon(1e-15));
    }
    SUBCASE("pointwise variance of the experiment kernel") {
        RngStream rng(31, 0);
        GpSampler gp([](double) { return 0.0; },
                     [](double s, double t) { return 100.0 * std::exp(-100.0 * (s - t) * (s - t)); }, grid);
        const int N = 10000;
        std::vector<double> acc2(grid.size(), 0.0);
        for (int i = 0; i < N; ++i) {
            const auto x = gp.draw(rng);
            for (std::size_t j = 0; j < x.size(); ++j) acc2[j] += x[j] * x[j];
        }
        for (std::size_t j = 0; j < grid.size(); ++j) {
            CHECK(acc2[j] / N == doctest::Approx(100.0).epsilon(0.05));
        }
    }
    SUBCASE("empirical covariance matches the kernel in relative Frobenius") {
        RngStream rng(37, 0);
        auto kernel = [](double s, double t) { return std::exp(-30.0 * (s - t) * (s - t)); };
        GpSampler gp([](double) { return 0.0; }, kernel, grid);
        const auto m = static_cast<Eigen::Index>(grid.size());
        const int N = 100000;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < N; ++i) {
            const auto xv = gp.draw(rng);
            const Eigen::Map<const Eigen::VectorXd> x(xv.data(), m);
            cov += x * x.transpose();
        }
        cov /= N;
        Eigen::MatrixXd K(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b) K(a, b) = kernel(grid[static_cast<std::size_t>(a)], grid[static_cast<std::size_t>(b)]);
        CHECK((cov - K).norm() / K.norm() < 0.05);
    }
}

}  // TEST_SUITE
