#include <doctest.h>

#include <cmath>

#include "harqopt/errors.hpp"
#include "harqopt/mi_model.hpp"
#include "harqopt/numerics.hpp"
#include "harqopt/random.hpp"
#include "oracles.hpp"

using namespace harqopt;

TEST_CASE("downlink moments") {
    // mpmath quadrature, frozen
    const DownlinkSpec dl3 = make_downlink_spec(3.0);
    CHECK(dl3.snr_linear == doctest::Approx(1.9952623149688795));
    CHECK(dl3.mean_mi == doctest::Approx(1.3296367033304163).epsilon(1e-10));
    CHECK(dl3.var_mi == doctest::Approx(0.68478904722857328).epsilon(1e-9));
    CHECK(make_downlink_spec(0.0).mean_mi == doctest::Approx(0.86034738227088595).epsilon(1e-10));
    CHECK(make_downlink_spec(6.0).var_mi == doctest::Approx(1.1042264408917435).epsilon(1e-9));
    CHECK(make_downlink_spec(-3.0).mean_mi == doctest::Approx(0.52223663351934041).epsilon(1e-10));

    SUBCASE("Simpson oracle") {
        for (double db : {-5.0, 1.0, 8.0}) {
            const DownlinkSpec dl = make_downlink_spec(db);
            CHECK(dl.mean_mi == doctest::Approx(oracle::mean_mi(dl.snr_linear)).epsilon(1e-9));
            CHECK(dl.var_mi == doctest::Approx(oracle::var_mi(dl.snr_linear)).epsilon(1e-8));
        }
    }
    SUBCASE("closed-form mean") {
        const double x = 1.0 / dl3.snr_linear;
        CHECK(dl3.mean_mi == doctest::Approx(std::log2(std::exp(1.0)) * std::exp(x) * numerics::exp_integral_e1(x)));
    }
    SUBCASE("variance against sampled gains") {
        RandomStream rng(11, 0);
        const int n = 2'000'000;
        double s = 0.0;
        double s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double c = mi_of_gain(rng.exponential(), 1.0, dl3);
            s += c;
            s2 += c * c;
        }
        const double mean = s / n;
        const double var = s2 / n - mean * mean;
        // the fourth central moment is below 6 here, so the standard error of var is < sqrt(6 / n)
        CHECK(std::abs(var - dl3.var_mi) < 3.0 * std::sqrt(6.0 / n));
    }
    CHECK(make_downlink_spec(-60.0).mean_mi < 1e-5);
    CHECK_THROWS_AS(make_downlink_spec(std::nan("")), DomainError);
}

TEST_CASE("mi_of_gain") {
    DownlinkSpec unit;
    unit.snr_linear = 1.0;
    CHECK(mi_of_gain(0.0, 0.7, unit) == 0.0);
    CHECK(mi_of_gain(1.0, 1.0, unit) == doctest::Approx(1.0));
    CHECK(mi_of_gain(2.5, 0.8, unit) == doctest::Approx(2.0 * mi_of_gain(2.5, 0.4, unit)));
    CHECK_THROWS_AS(mi_of_gain(-1.0, 1.0, unit), DomainError);
}

TEST_CASE("Gaussian failure probability") {
    const DownlinkSpec dl = make_downlink_spec(3.0);
    const double sigma = std::sqrt(dl.var_mi);
    const double rho = 1.0 / dl.mean_mi;
    CHECK(p_fail_gaussian(rho, rho * rho, dl) == doctest::Approx(0.5));
    CHECK(p_fail_gaussian(40.0, 40.0, dl) < 1e-15);

    const std::vector<double> rhos{0.5, 0.25, 0.75};
    const auto p = p_fail_gaussian(rhos, dl);
    REQUIRE(p.size() == 3);
    const double s = 1.5;
    const double s2 = 0.25 + 0.0625 + 0.5625;
    CHECK(p[2] == doctest::Approx(numerics::q_function((s * dl.mean_mi - 1.0) / (std::sqrt(s2) * sigma))));
    CHECK(p[0] > p[1]);
    CHECK(p[1] > p[2]);
}

TEST_CASE("convolution failure probability against exact integrals") {
    const DownlinkSpec dl = make_downlink_spec(3.0);
    SUBCASE("single round closed form") {
        const auto p = p_fail_convolution(std::vector<double>{1.0}, dl);
        CHECK(p[0] == doctest::Approx(1.0 - std::exp(-1.0 / dl.snr_linear)).epsilon(1e-9));
        CHECK(p[0] == doctest::Approx(0.3941).epsilon(1e-3));
    }
    SUBCASE("two and three rounds") {
        const std::vector<double> two{0.5, 0.5};
        const std::vector<double> three{0.3, 0.2, 0.45};
        const auto p2 = p_fail_convolution(two, dl);
        const auto p3 = p_fail_convolution(three, dl);
        CHECK(p2[1] == doctest::Approx(oracle::p_fail_exact(two, dl.snr_linear)).epsilon(2e-3));
        CHECK(p3[1] == doctest::Approx(oracle::p_fail_exact({0.3, 0.2}, dl.snr_linear)).epsilon(2e-3));
        CHECK(p3[2] == doctest::Approx(oracle::p_fail_exact(three, dl.snr_linear, 400)).epsilon(5e-3));
    }
    SUBCASE("two rounds against sampled gains") {
        RandomStream rng(5, 0);
        const int n = 4'000'000;
        int fails = 0;
        for (int i = 0; i < n; ++i) {
            if (mi_of_gain(rng.exponential(), 0.5, dl) + mi_of_gain(rng.exponential(), 0.5, dl) < 1.0) ++fails;
        }
        const double f = static_cast<double>(fails) / n;
        const double p = p_fail_convolution(std::vector<double>{0.5, 0.5}, dl)[1];
        CHECK(std::abs(f - p) < 3.0 * std::sqrt(f * (1 - f) / n) + 2e-4);
    }
    SUBCASE("large single-round rate") {
        const double rho = 20.0 / dl.mean_mi;
        const double exact = -std::expm1(-std::expm1(std::log(2.0) / rho) / dl.snr_linear);
        CHECK(p_fail_convolution(std::vector<double>{rho}, dl)[0] == doctest::Approx(exact).epsilon(1e-2));
    }
    SUBCASE("finer grid converges") {
        const std::vector<double> rhos{0.4, 0.4, 0.4};
        const auto coarse = p_fail_convolution(rhos, dl, 1024);
        const auto fine = p_fail_convolution(rhos, dl, 8192);
        CHECK(coarse[2] == doctest::Approx(fine[2]).epsilon(1e-2));
    }
    CHECK_THROWS_AS(p_fail_convolution(std::vector<double>{0.5}, dl, 100), GridError);
    CHECK_THROWS_AS(p_fail_convolution(std::vector<double>{}, dl), DomainError);
}

TEST_CASE("failure probabilities are non-increasing in the round index") {
    for (double db : {0.0, 3.0, 6.0}) {
        const DownlinkSpec dl = make_downlink_spec(db);
        const std::vector<double> rhos{0.3, 0.1, 0.6, 0.25};
        for (auto model : {FailureModel::gaussian, FailureModel::convolution}) {
            const auto p = p_fail(rhos, dl, model);
            for (std::size_t k = 1; k < p.size(); ++k) CHECK(p[k] <= p[k - 1] + 1e-15);
        }
    }
}
