#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ccbart/diagnostics.hpp"
#include "ccbart/sim.hpp"
#include "test_util.hpp"

using namespace ccbart;

TEST_CASE("tau curves match their closed forms") {
    CHECK(tau_step(0.0) == doctest::Approx(0.3));
    CHECK(tau_step(0.5) == doctest::Approx(0.8));
    CHECK(tau_step(0.9) == doctest::Approx(0.3));
    CHECK(tau_step(1.0 / 3.0) == doctest::Approx(0.8)); // left edge belongs to the plateau
    CHECK(tau_sine(0.0) == doctest::Approx(0.5));
    CHECK(tau_sine(0.25) == doctest::Approx(0.7));
    CHECK(tau_sine(0.75) == doctest::Approx(0.3));
    CHECK(tau_curve(TauShape::step, 0.5) == tau_step(0.5));
    CHECK(tau_curve(TauShape::sine, 0.5) == tau_sine(0.5));
    CHECK(tau_shape_from_name("step") == TauShape::step);
    CHECK(tau_shape_from_name(tau_shape_name(TauShape::sine)) == TauShape::sine);
    CHECK_THROWS(tau_shape_from_name("triangle"));
}

TEST_CASE("generated datasets are valid, sorted, and consistent with the tau curve") {
    for (Family family : test_util::all_families()) {
        DgpConfig dgp;
        dgp.model = test_util::make_model(family);
        dgp.shape = TauShape::sine;
        dgp.n = 120;
        Rng rng(301);
        const auto sim = generate_dataset(dgp, rng);

        REQUIRE(sim.data.n() == dgp.n);
        REQUIRE(sim.tau.size() == dgp.n);
        REQUIRE(sim.theta.size() == dgp.n);
        CHECK(std::is_sorted(sim.data.x[0].begin(), sim.data.x[0].end()));
        for (std::size_t i = 0; i < dgp.n; ++i) {
            CHECK(sim.data.u1[i] > 0.0);
            CHECK(sim.data.u1[i] < 1.0);
            CHECK(sim.data.u2[i] > 0.0);
            CHECK(sim.data.u2[i] < 1.0);
            CHECK(sim.tau[i] == doctest::Approx(tau_sine(sim.data.x[0][i])));
            CHECK(sim.theta[i] ==
                  doctest::Approx(theta_from_tau(dgp.model, sim.tau[i])).epsilon(1e-10));
        }
    }
}

TEST_CASE("generate_dataset is deterministic in the seed") {
    DgpConfig dgp;
    dgp.model = test_util::make_model(Family::clayton);
    Rng r1(302), r2(302), r3(303);
    const auto a = generate_dataset(dgp, r1);
    const auto b = generate_dataset(dgp, r2);
    const auto c = generate_dataset(dgp, r3);
    CHECK(a.data.u1 == b.data.u1);
    CHECK(a.data.u2 == b.data.u2);
    CHECK(a.data.x[0] == b.data.x[0]);
    CHECK(a.data.u1 != c.data.u1);
}

TEST_CASE("generated pairs recover the target rank correlation") {
    // pool the high-tau plateau of the step design and compare the empirical
    // Kendall tau against the design value
    DgpConfig dgp;
    dgp.model = test_util::make_model(Family::frank);
    dgp.shape = TauShape::step;
    dgp.n = 3000;
    Rng rng(304);
    const auto sim = generate_dataset(dgp, rng);
    std::vector<double> u1, u2;
    for (std::size_t i = 0; i < dgp.n; ++i) {
        const double x = sim.data.x[0][i];
        if (x >= 1.0 / 3.0 && x < 2.0 / 3.0) {
            u1.push_back(sim.data.u1[i]);
            u2.push_back(sim.data.u2[i]);
        }
    }
    REQUIRE(u1.size() > 700);
    const double tau_hat = test_util::kendall_tau_empirical(u1, u2);
    CHECK(std::fabs(tau_hat - 0.8) < 4.0 * test_util::kendall_tau_se(u1.size()));
}

TEST_CASE("score_replicate on a chain that draws the exact truth") {
    DgpConfig dgp;
    dgp.model = test_util::make_model(Family::gaussian);
    dgp.n = 50;
    Rng rng(305);
    const auto sim = generate_dataset(dgp, rng);

    ChainTrace chain;
    chain.theta.assign(10, sim.theta); // every draw equals the truth
    MoveStats stats;
    stats.attempted[0] = 80;
    stats.accepted[0] = 20;
    chain.moves = stats;

    const auto m = score_replicate(sim, {chain});
    CHECK(m.rmse == doctest::Approx(0.0));
    CHECK(m.rmse_rooted == doctest::Approx(0.0));
    CHECK(m.ci_length == doctest::Approx(0.0));
    CHECK(m.ci_cov == doctest::Approx(1.0));
    CHECK(m.acceptance == doctest::Approx(0.25));
}

TEST_CASE("run_study produces finite aggregates and distinct replicates") {
    DgpConfig dgp;
    dgp.model = test_util::make_model(Family::gaussian);
    dgp.shape = TauShape::step;
    dgp.n = 60;

    SamplerConfig config;
    config.iterations = 200;
    config.adapt_start = 50;
    config.tree_prior.sign = PriorSign::penalizing;

    const auto study = run_study(dgp, config, 3, 2, 306);
    REQUIRE(study.reps.size() == 3);
    for (const auto& rep : study.reps) {
        CHECK(std::isfinite(rep.rmse));
        CHECK(rep.n_leaves >= 1.0);
        CHECK(rep.depth >= 0.0);
        CHECK(rep.acceptance >= 0.0);
        CHECK(rep.acceptance <= 1.0);
        CHECK(rep.ci_cov >= 0.0);
        CHECK(rep.ci_cov <= 1.0);
    }
    CHECK(study.reps[0].rmse != study.reps[1].rmse); // different data per replicate
    const double mean_rmse =
        (study.reps[0].rmse + study.reps[1].rmse + study.reps[2].rmse) / 3.0;
    CHECK(study.mean.rmse == doctest::Approx(mean_rmse));
    CHECK(study.sd.rmse >= 0.0);

    // same seed, same study
    const auto again = run_study(dgp, config, 3, 2, 306);
    CHECK(again.mean.rmse == study.mean.rmse);
    CHECK(again.mean.acceptance == study.mean.acceptance);
}
