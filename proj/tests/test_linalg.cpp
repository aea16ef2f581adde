#include "doctest.h"

#include "bleep/adamw.hpp"
#include "bleep/linalg.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace bleep;

TEST_CASE("matmul identity and scalar cases") {
    std::mt19937_64 rng(1);
    DenseMatrix m = oracle::random_matrix<float>(3, 4, rng);
    DenseMatrix eye = DenseMatrix::Identity(3, 3);
    CHECK(matmul(eye, m) == m);

    DenseMatrix two(1, 1), three(1, 1);
    two << 2;
    three << 3;
    CHECK(matmul(two, three)(0, 0) == 6.0f);
}

TEST_CASE("matmul matches a triple-loop oracle") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> dim(1, 12);

    auto check = [&](Index m, Index k, Index n) {
        DenseMatrix a = oracle::random_matrix<float>(m, k, rng);
        DenseMatrix b = oracle::random_matrix<float>(k, n, rng);
        auto expected = oracle::triple_loop(oracle::to_vectors(a), oracle::to_vectors(b));
        auto actual = matmul(a, b);
        REQUIRE(actual.rows() == m);
        REQUIRE(actual.cols() == n);
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < n; ++j) {
                double e = expected[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                CHECK(std::abs(actual(i, j) - e) <= 1e-6 * std::max(1.0, std::abs(e)));
            }
        }
    };

    check(7, 5, 3);
    for (int trial = 0; trial < 100; ++trial) {
        check(dim(rng), dim(rng), dim(rng));
    }
}

TEST_CASE("matmul rejects mismatched shapes with both shapes in the message") {
    DenseMatrix a(2, 3), b(4, 2);
    try {
        matmul(a, b);
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("4x2") != std::string::npos);
    }
}

TEST_CASE("matmul is deterministic and worker-count independent") {
    std::mt19937_64 rng(3);
    DenseMatrix a = oracle::random_matrix<float>(37, 19, rng);
    DenseMatrix b = oracle::random_matrix<float>(19, 23, rng);
    auto first = matmul(a, b);
    CHECK(matmul(a, b) == first);

    set_workers(4);
    auto parallel = matmul(a, b);
    set_workers(1);
    for (Index i = 0; i < first.rows(); ++i) {
        for (Index j = 0; j < first.cols(); ++j) {
            CHECK(std::abs(parallel(i, j) - first(i, j)) <= 1e-6 * std::max(1.0f, std::abs(first(i, j))));
        }
    }
}

TEST_CASE("row_softmax examples") {
    DenseMatrix zeros = DenseMatrix::Zero(1, 2);
    auto sym = row_softmax(zeros, 1.0);
    CHECK(sym(0, 0) == doctest::Approx(0.5));
    CHECK(sym(0, 1) == doctest::Approx(0.5));

    DenseMatrix row(1, 2);
    row << 1, 0;
    auto p = row_softmax(row, 1.0);
    CHECK(std::abs(p(0, 0) - 0.7311) < 1e-4);
    CHECK(std::abs(p(0, 1) - 0.2689) < 1e-4);

    std::mt19937_64 rng(4);
    DenseMatrix any = oracle::random_matrix<float>(3, 5, rng, 10.0);
    auto uniform = row_softmax(any, 0.0);
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 5; ++j) {
            CHECK(uniform(i, j) == doctest::Approx(0.2));
        }
    }
}

TEST_CASE("row_softmax is row-stochastic for large magnitudes") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        DenseMatrix m = oracle::random_matrix<float>(6, 9, rng, 1e4);
        auto p = row_softmax(m, 1.0);
        REQUIRE(p.allFinite());
        for (Index r = 0; r < p.rows(); ++r) {
            double total = 0;
            for (Index c = 0; c < p.cols(); ++c) {
                total += p(r, c);
            }
            CHECK(std::abs(total - 1.0) <= 1e-6);
        }
    }
}

TEST_CASE("soft_cross_entropy examples") {
    DenseMatrix single(1, 1), one(1, 1);
    single << 42;
    one << 1;
    CHECK(soft_cross_entropy(single, one)[0] == doctest::Approx(0.0));

    DenseMatrix logits(1, 2);
    logits << 1, 0;
    auto target = row_softmax(logits, 1.0);
    double p = std::exp(1.0) / (std::exp(1.0) + 1.0);
    double entropy = -(p * std::log(p) + (1 - p) * std::log(1 - p));
    CHECK(std::abs(entropy - 0.5823) < 1e-3);
    CHECK(std::abs(soft_cross_entropy(logits, target)[0] - 0.5823) < 1e-3);

    DenseMatrix sharp(1, 2), hard(1, 2);
    sharp << 10, -10;
    hard << 1, 0;
    double loss = soft_cross_entropy(sharp.cast<double>().eval(), hard.cast<double>().eval())[0];
    CHECK(loss == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-6));
    CHECK(loss < 1e-8);
}

TEST_CASE("soft_cross_entropy against its own softmax is the entropy") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix<double> logits = oracle::random_matrix<double>(4, 7, rng, 3.0);
        auto p = row_softmax(logits, 1.0);
        auto ce = soft_cross_entropy(logits, p);
        for (Index r = 0; r < 4; ++r) {
            double entropy = 0;
            for (Index c = 0; c < 7; ++c) {
                entropy -= p(r, c) * std::log(p(r, c));
            }
            CHECK(std::abs(ce[r] - entropy) <= 1e-6);
        }
    }
}

TEST_CASE("soft_cross_entropy rejects non-stochastic targets and shape mismatch") {
    DenseMatrix logits = DenseMatrix::Zero(2, 2);
    DenseMatrix bad(2, 2);
    bad << 0.5, 0.4, 0.5, 0.5;
    CHECK_THROWS_AS(soft_cross_entropy(logits, bad), ValidationError);
    CHECK_THROWS_AS(soft_cross_entropy(logits, DenseMatrix::Identity(3, 3)), ShapeError);
}

TEST_CASE("adamw zero gradient cases") {
    DenseMatrix param(2, 2);
    param << 1, -2, 3, 0.5;
    DenseMatrix zero = DenseMatrix::Zero(2, 2);

    {
        DenseMatrix p = param;
        AdamWState<float> state(2, 2, AdamWOptions{0.1, 0.9, 0.999, 1e-8, 0.0});
        adamw_step(p, zero, state);
        CHECK(p == param);
        CHECK(state.step == 1);
    }
    {
        DenseMatrix p = param;
        AdamWState<float> state(2, 2, AdamWOptions{0.1, 0.9, 0.999, 1e-8, 0.01});
        adamw_step(p, zero, state);
        for (Index i = 0; i < 4; ++i) {
            CHECK(p.data()[i] == doctest::Approx(param.data()[i] * 0.999).epsilon(1e-7));
        }
    }
}

TEST_CASE("adamw first step moves by the learning rate against the gradient sign") {
    for (double g : {3.0, -0.25, 1e-3}) {
        Matrix<double> w(1, 1), grad(1, 1);
        w << 0.7;
        grad << g;
        AdamWState<double> state(1, 1, AdamWOptions{0.05, 0.9, 0.999, 1e-8, 0.0});
        adamw_step(w, grad, state);
        double expected = 0.7 - 0.05 * (g > 0 ? 1 : -1);
        CHECK(std::abs(w(0, 0) - expected) <= 0.05 * 1e-8 / std::abs(g) + 1e-12);
    }
}

TEST_CASE("adamw counts steps and validates inputs") {
    DenseMatrix p = DenseMatrix::Ones(2, 3);
    AdamWState<float> state(2, 3);
    for (int i = 1; i <= 3; ++i) {
        adamw_step(p, DenseMatrix::Ones(2, 3), state);
        CHECK(state.step == static_cast<std::uint64_t>(i));
    }
    CHECK_THROWS_AS(adamw_step(p, DenseMatrix::Ones(3, 2), state), ShapeError);

    AdamWState<float> bad(2, 3, AdamWOptions{0.0});
    CHECK_THROWS_AS(adamw_step(p, DenseMatrix::Ones(2, 3), bad), ValidationError);
}
