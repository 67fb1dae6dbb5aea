#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_oracles.hpp"

#include "qigl/qgenerator.hpp"

#include <cmath>
#include <numbers>

using namespace qigl;

TEST_CASE("noise sampling") {
    const GeneratorEnsemble ensemble = GeneratorEnsemble::make(8, 5, 6, AssignmentMode::Balanced);
    Rng rng(101);
    const auto batch = sample_noise(ensemble, 200, rng);
    CHECK(batch.size() == 200);

    double total = 0.0;
    Index count = 0;
    for (const auto& noise : batch) {
        CHECK(noise.values.rows() == 8);
        CHECK(noise.values.cols() == 5);
        CHECK(noise.values.minCoeff() >= 0.0);
        CHECK(noise.values.maxCoeff() <= std::numbers::pi / 2.0);
        total += noise.values.sum();
        count += noise.values.size();
    }

    Rng more(999);
    const auto big = sample_noise(ensemble, 250, more);  // 10,000 scalar draws total
    for (const auto& noise : big) {
        total += noise.values.sum();
        count += noise.values.size();
    }
    CHECK(std::abs(total / static_cast<double>(count) - std::numbers::pi / 4.0) < 0.02);

    Rng a(7), b(7);
    const auto first = sample_noise(ensemble, 3, a);
    const auto second = sample_noise(ensemble, 3, b);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK((first[i].values - second[i].values).cwiseAbs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(sample_noise(ensemble, 0, a), ArgumentError);
}

TEST_CASE("forward at the zero point") {
    const GeneratorEnsemble ensemble = GeneratorEnsemble::make(8, 5, 6, AssignmentMode::Balanced);
    NoiseVector zero{Mat::Zero(8, 5)};
    CHECK(forward(ensemble, zero).cwiseAbs().maxCoeff() == 0.0);

    NoiseVector bad{Mat::Zero(7, 5)};
    CHECK_THROWS_AS(forward(ensemble, bad), ShapeError);
}

TEST_CASE("assignment reordering") {
    Rng rng(11);
    GeneratorEnsemble ensemble = GeneratorEnsemble::make(8, 5, 6, AssignmentMode::Balanced, &rng);
    const auto noise = sample_noise(ensemble, 1, rng);

    const Vec raw = forward_raw(ensemble, noise[0]);
    const Vec out = forward(ensemble, noise[0]);
    CHECK(out.minCoeff() >= -1.0 - 1e-12);
    CHECK(out.maxCoeff() <= 1.0 + 1e-12);

    // sub-generator 0, qubit 1 lands at canonical index 39 under the
    // balanced assignment
    CHECK(out[39] == raw[1]);

    // inverse-permuting recovers the raw concatenation exactly
    const int nq = ensemble.circuit.n_qubits;
    for (int i = 0; i < ensemble.n_subgens(); ++i) {
        for (int q = 0; q < nq; ++q) {
            CHECK(out[ensemble.assignment.subsets[static_cast<std::size_t>(i)]
                                                 [static_cast<std::size_t>(q)]] ==
                  raw[i * nq + q]);
        }
    }
}

TEST_CASE("single-parameter toy derivative") {
    GeneratorEnsemble toy = GeneratorEnsemble::make(1, 1, 1, AssignmentMode::Conventional);
    NoiseVector zero{Mat::Zero(1, 1)};
    const Mat jac = parameter_shift_jacobian(toy, zero);
    REQUIRE(jac.rows() == 1);
    REQUIRE(jac.cols() == 1);
    CHECK(jac(0, 0) == doctest::Approx(1.0).epsilon(1e-12));  // d sin(theta)/d theta at 0
}

TEST_CASE("parameter shift matches finite differences") {
    Rng rng(23);
    GeneratorEnsemble ensemble = GeneratorEnsemble::make(1, 5, 6, AssignmentMode::Balanced);
    for (auto& sub : ensemble.sub_generators) {
        for (Index i = 0; i < sub.weights.size(); ++i) {
            sub.weights.data()[i] = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
    }
    const auto noise = sample_noise(ensemble, 1, rng);
    const Mat analytic = parameter_shift_jacobian(ensemble, noise[0]);
    const Mat fd = test::fd_jacobian(ensemble, noise[0], 1e-5);
    CHECK((analytic - fd).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("cross-sub-generator blocks are exactly zero") {
    Rng rng(29);
    GeneratorEnsemble ensemble = GeneratorEnsemble::make(3, 2, 2, AssignmentMode::Balanced, &rng);
    const auto noise = sample_noise(ensemble, 1, rng);
    const Mat jac = parameter_shift_jacobian(ensemble, noise[0]);

    const int per_sub = ensemble.circuit.depth * ensemble.circuit.n_qubits;
    for (int sub = 0; sub < ensemble.n_subgens(); ++sub) {
        const auto& subset = ensemble.assignment.subsets[static_cast<std::size_t>(sub)];
        for (Index f = 0; f < jac.rows(); ++f) {
            const bool owned = std::find(subset.begin(), subset.end(), static_cast<int>(f)) !=
                               subset.end();
            for (int p = sub * per_sub; p < (sub + 1) * per_sub; ++p) {
                if (!owned) CHECK(jac(f, p) == 0.0);
            }
        }
    }
}

TEST_CASE("parameter counts") {
    CHECK(generator_param_count(GeneratorEnsemble::make(8, 5, 6, AssignmentMode::Balanced)) ==
          240);
    CHECK(generator_param_count(GeneratorEnsemble::make(2, 5, 6, AssignmentMode::Balanced)) ==
          60);
    CHECK(generator_param_count(GeneratorEnsemble::make(1, 1, 1, AssignmentMode::Conventional)) ==
          1);
}

TEST_CASE("flatten and set round-trip") {
    Rng rng(31);
    GeneratorEnsemble ensemble = GeneratorEnsemble::make(2, 3, 4, AssignmentMode::Balanced, &rng);
    const Vec flat = flatten_params(ensemble);
    GeneratorEnsemble other = GeneratorEnsemble::make(2, 3, 4, AssignmentMode::Balanced);
    set_params(other, flat);
    CHECK((flatten_params(other) - flat).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(set_params(other, Vec::Zero(5)), ShapeError);
}
