#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "harqopt/errors.hpp"
#include "harqopt/harq_analysis.hpp"
#include "harqopt/random.hpp"
#include "oracles.hpp"

using namespace harqopt;

namespace {

HarqPolicy make_policy(std::vector<double> rhos, std::vector<double> alphas) {
    HarqPolicy p;
    p.m_max = static_cast<int>(rhos.size());
    p.rhos = std::move(rhos);
    p.alphas = std::move(alphas);
    p.rho_min = 1.0 / 16.0;
    p.rho_max = 4.0;
    return p;
}

FeedbackErrorRates rates_at(double snr_u_db, std::vector<double> alphas) {
    return error_rates_for(FeedbackSpec::from_db(snr_u_db, std::move(alphas)));
}

}  // namespace

TEST_CASE("policy validation") {
    CHECK_NOTHROW(make_policy({0.5, 0.5}, {0.1}).validate());
    CHECK_THROWS_AS(make_policy({0.5, 0.5}, {}).validate(), DomainError);
    CHECK_THROWS_AS(make_policy({0.01, 0.5}, {0.0}).validate(), DomainError);
    CHECK_THROWS_AS(make_policy({3.0, 1.5}, {0.0}).validate(), DomainError);  // over N_m / N_b
    auto p = make_policy({0.5}, {});
    p.n_b = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("reliable throughput") {
    CHECK(reliable_throughput(std::vector<double>{0.5}, std::vector<double>{0.0}) == doctest::Approx(2.0));
    const std::vector<double> rhos{0.5, 0.25};
    const std::vector<double> pf{0.4, 0.1};
    CHECK(reliable_throughput(rhos, pf) == doctest::Approx(0.9 / (0.5 + 0.25 * 0.4)));
}

TEST_CASE("perfect feedback reduces to the reliable case") {
    const DownlinkSpec dl = make_downlink_spec(3.0);
    const auto policy = make_policy({0.5, 0.25, 0.25, 0.25}, {0.0, 0.0, 0.0});
    const auto pf = p_fail_gaussian(policy.rhos, dl);
    const auto b = evaluate_policy(policy, pf, FeedbackErrorRates::perfect(3));
    CHECK(b.p_out_unreliable == doctest::Approx(pf[3]));
    CHECK(b.throughput == doctest::Approx(reliable_throughput(policy.rhos, pf)));
    for (std::size_t i = 1; i < 4; ++i) CHECK(b.p_occur[i] == doctest::Approx(pf[i - 1]));
}

TEST_CASE("closed forms against the protocol enumeration") {
    RandomStream rng(42, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + static_cast<int>(rng.uniform() * 3);  // 2..4
        std::vector<double> pf;
        double f = 1.0;
        for (int k = 0; k < m; ++k) pf.push_back(f *= rng.uniform());
        FeedbackErrorRates rates;
        std::vector<double> rhos;
        for (int k = 0; k < m; ++k) rhos.push_back(0.1 + rng.uniform());
        for (int k = 0; k + 1 < m; ++k) {
            rates.p_nack.push_back(0.3 * rng.uniform());
            rates.p_ack.push_back(0.6 * rng.uniform());
        }
        CAPTURE(trial);
        const auto exact = oracle::enumerate_protocol(rhos, 1024, pf, rates.p_nack, rates.p_ack);

        const auto occur = transmission_probabilities(pf, rates);
        for (int i = 0; i < m; ++i) CHECK(occur[static_cast<std::size_t>(i)] == doctest::Approx(exact.p_occur[static_cast<std::size_t>(i)]).epsilon(1e-12));

        // The closed-form outage charges the premature-stop mass and the
        // final failure as if independent; the excess over the true law is
        // P_{M,f} * sum_i P_{N,i} (1 - P_{i,f}) prod_{j<i} (1 - P_{N,j}).
        double excess = 0.0;
        double survive = 1.0;
        for (int i = 0; i + 1 < m; ++i) {
            excess += rates.p_nack[static_cast<std::size_t>(i)] * (1.0 - pf[static_cast<std::size_t>(i)]) * survive;
            survive *= 1.0 - rates.p_nack[static_cast<std::size_t>(i)];
        }
        excess *= pf.back();
        const double closed = unreliable_outage(pf, rates);
        CHECK(closed == doctest::Approx(exact.p_out + excess).epsilon(1e-12));
        CHECK(closed >= exact.p_out - 1e-15);
    }
}

TEST_CASE("outage bounds and threshold monotonicity") {
    for (double snr_d : {0.0, 3.0, 6.0}) {
        const DownlinkSpec dl = make_downlink_spec(snr_d);
        const auto policy = make_policy({0.6, 0.3, 0.3, 0.5}, {0.0, 0.0, 0.0});
        const auto pf = p_fail_gaussian(policy.rhos, dl);
        for (double snr_u : {-15.0, -10.0, -5.0}) {
            double previous = 1.0;
            for (double a = 0.0; a <= 1.5 + 1e-9; a += 0.1) {
                const auto b = evaluate_policy(policy, pf, rates_at(snr_u, {a, a, a}));
                CHECK(b.p_out_unreliable >= b.p_out_reliable);
                CHECK(b.p_out_unreliable <= previous + 1e-15);
                CHECK(b.throughput <= dl.mean_mi);
                previous = b.p_out_unreliable;
                if (ack_error_rate(a, std::pow(10.0, snr_u / 10.0)) <= 0.5) {
                    for (std::size_t i = 1; i < 4; ++i) CHECK(b.p_occur[i] <= b.p_occur[i - 1] + 1e-15);
                }
            }
        }
    }
}

TEST_CASE("expected symbols and throughput") {
    const DownlinkSpec dl = make_downlink_spec(3.0);
    const auto policy = make_policy({0.5, 0.25, 0.25, 0.25}, {0.5, 0.5, 0.5});
    const auto rates = rates_at(-10.0, policy.alphas);
    const auto b = evaluate_policy(policy, dl, rates);
    double symbols = 0.0;
    for (std::size_t i = 0; i < 4; ++i) symbols += policy.rhos[i] * 1024 * b.p_occur[i];
    CHECK(b.expected_symbols == doctest::Approx(symbols));
    CHECK(b.throughput == doctest::Approx(1024.0 / symbols * (1.0 - b.p_out_unreliable)));
    CHECK(unreliable_throughput(policy, dl, FeedbackSpec::from_db(-10.0, policy.alphas)).throughput ==
          doctest::Approx(b.throughput));
    CHECK_THROWS_AS(unreliable_throughput(policy, dl, FeedbackSpec::from_db(-10.0, {0.0, 0.5, 0.5})), DomainError);
}

TEST_CASE("stage outage") {
    const std::vector<double> pf{0.6, 0.2, 0.05};
    const FeedbackErrorRates rates{{0.1, 0.05}, {0.2, 0.1}};
    const auto occur = transmission_probabilities(pf, rates);
    const auto stage = stage_outage(pf, rates, occur);
    CHECK(stage[0] == doctest::Approx(0.1 * 0.6));
    CHECK(stage[1] == doctest::Approx((0.1 * 0.6 + 0.05 * 0.2 * 0.9) / occur[1]));
    CHECK(stage[2] == doctest::Approx(0.05 / occur[2]));

    const std::vector<double> certain{0.0, 0.0};
    const auto never = transmission_probabilities(certain, FeedbackErrorRates::perfect(1));
    CHECK(never[1] == 0.0);
    CHECK_THROWS_AS(stage_outage(certain, FeedbackErrorRates::perfect(1), never), DegenerateStateError);
    CHECK(evaluate_policy(make_policy({0.5, 0.5}, {0.0}), certain, FeedbackErrorRates::perfect(1)).p_out_stage[1] == 0.0);
}

TEST_CASE("out-of-range probabilities are not clamped") {
    const std::vector<double> bad{1.2, 0.5};
    CHECK_THROWS_AS(evaluate_policy(make_policy({0.5, 0.5}, {0.0}), bad, FeedbackErrorRates::perfect(1)),
                    std::logic_error);
}

TEST_CASE("duplicated-ACK baseline") {
    const DownlinkSpec dl = make_downlink_spec(3.0);
    const auto policy = make_policy({0.5, 0.25, 0.25, 0.25}, {0.0, 0.0, 0.0});
    const auto fb = FeedbackSpec::from_db(-10.0, {0.0, 0.0, 0.0});
    const auto dup = duplicated_ack_performance(policy, dl, fb);
    const auto expected = evaluate_policy(policy, dl, duplicated_ack_rates(error_rates_for(fb)));
    CHECK(dup.throughput == doctest::Approx(expected.throughput));
    CHECK(dup.p_out_unreliable < unreliable_throughput(policy, dl, fb).p_out_unreliable);
    CHECK_THROWS_AS(duplicated_ack_performance(policy, dl, FeedbackSpec::from_db(-10.0, {0.1, 0.0, 0.0})), DomainError);

    const auto perfect = evaluate_policy(policy, dl, FeedbackErrorRates::perfect(3));
    const auto perfect_dup = evaluate_policy(policy, dl, duplicated_ack_rates(FeedbackErrorRates::perfect(3)));
    CHECK(perfect_dup.throughput == perfect.throughput);
}
