#include "doctest.h"

#include "bleep/contrastive.hpp"
#include "gradient_check.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace bleep;

TEST_CASE("objective names parse") {
    CHECK(parse_objective("smoothed") == Objective::smoothed);
    CHECK(parse_objective("one_hot") == Objective::one_hot);
    CHECK(parse_objective("one-hot") == Objective::one_hot);
    CHECK(parse_objective("clip") == Objective::one_hot);
    CHECK_THROWS_AS(parse_objective("triplet"), ValidationError);
}

TEST_CASE("similarities match explicit dot products and internals are symmetric") {
    std::mt19937_64 rng(11);
    DenseMatrix hv = oracle::random_matrix<float>(5, 3, rng);
    DenseMatrix hx = oracle::random_matrix<float>(5, 3, rng);
    auto block = similarities(hv, hx);
    REQUIRE(block.cross.rows() == 5);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            double cross = 0, vv = 0, xx = 0;
            for (Index d = 0; d < 3; ++d) {
                cross += double(hx(i, d)) * hv(j, d);
                vv += double(hv(i, d)) * hv(j, d);
                xx += double(hx(i, d)) * hx(j, d);
            }
            CHECK(block.cross(i, j) == doctest::Approx(cross).epsilon(1e-5));
            CHECK(block.img_internal(i, j) == doctest::Approx(vv).epsilon(1e-5));
            CHECK(block.expr_internal(i, j) == doctest::Approx(xx).epsilon(1e-5));
            CHECK(std::abs(block.img_internal(i, j) - block.img_internal(j, i)) <= 1e-5);
            CHECK(std::abs(block.expr_internal(i, j) - block.expr_internal(j, i)) <= 1e-5);
        }
    }
}

TEST_CASE("smoothed targets are row-stochastic") {
    std::mt19937_64 rng(12);
    DenseMatrix hv = oracle::random_matrix<float>(6, 4, rng);
    DenseMatrix hx = oracle::random_matrix<float>(6, 4, rng);
    auto t = smoothed_targets(similarities(hv, hx), 0.5);
    for (Index r = 0; r < 6; ++r) {
        CHECK(t.row(r).minCoeff() >= 0);
        CHECK(std::abs(t.row(r).cast<double>().sum() - 1.0) <= 1e-5);
    }
    CHECK_THROWS_AS(smoothed_targets(similarities(hv, hx), 0.0), ValidationError);
}

TEST_CASE("single-pair batch has zero loss and zero gradient") {
    std::mt19937_64 rng(13);
    for (auto objective : {Objective::smoothed, Objective::one_hot}) {
        DenseMatrix hv = oracle::random_matrix<float>(1, 7, rng);
        DenseMatrix hx = oracle::random_matrix<float>(1, 7, rng);
        auto result = bleep_loss(hv, hx, LossConfig{1.0, objective});
        CHECK(result.loss == doctest::Approx(0.0));
        CHECK(result.grad_image.cwiseAbs().maxCoeff() == 0.0f);
        CHECK(result.grad_expression.cwiseAbs().maxCoeff() == 0.0f);
    }
}

TEST_CASE("identity embeddings give the hand-computed losses") {
    DenseMatrix eye = DenseMatrix::Identity(2, 2);
    auto smoothed = bleep_loss(eye, eye, LossConfig{1.0, Objective::smoothed});
    CHECK(std::abs(smoothed.loss - 0.5823) < 1e-3);
    auto one_hot = bleep_loss(eye, eye, LossConfig{1.0, Objective::one_hot});
    CHECK(std::abs(one_hot.loss - 0.3133) < 1e-3);
    CHECK(std::abs(one_hot.loss - std::log1p(std::exp(-1.0))) < 1e-6);
}

TEST_CASE("loss rejects mismatched shapes") {
    CHECK_THROWS_AS(bleep_loss(DenseMatrix::Zero(3, 2), DenseMatrix::Zero(4, 2), LossConfig{}), ShapeError);
    CHECK_THROWS_AS(bleep_loss(DenseMatrix::Zero(3, 2), DenseMatrix::Zero(3, 5), LossConfig{}), ShapeError);
    CHECK_THROWS_AS(bleep_loss(DenseMatrix::Zero(3, 2), DenseMatrix::Zero(3, 2), LossConfig{0.0}), ValidationError);
}

TEST_CASE("analytic gradients match central finite differences") {
    for (const auto& inst : gradient_check::run(20, 14)) {
        CAPTURE(inst.batch);
        CAPTURE(inst.width);
        CAPTURE(objective_name(inst.objective));
        CHECK(inst.loss_gap <= 1e-9 * std::max(1.0, inst.loss_gap));
        CHECK(inst.image_error < 1e-4);
        CHECK(inst.expression_error < 1e-4);
    }
}

TEST_CASE("one-hot gradients match differences of the loss itself") {
    // Without a smoothed target there is nothing to freeze: differentiate the library loss directly.
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 6; ++trial) {
        Matrix<double> hv = oracle::random_matrix<double>(4, 5, rng, 0.7);
        Matrix<double> hx = oracle::random_matrix<double>(4, 5, rng, 0.7);
        LossConfig cfg{1.0, Objective::one_hot};
        auto analytic = bleep_loss(hv, hx, cfg);
        auto direct = oracle::finite_difference([&](const Matrix<double>& v) { return bleep_loss(v, hx, cfg).loss; }, hv, 1e-4);
        CHECK(oracle::relative_error(analytic.grad_image, direct) < 1e-4);
    }
}

TEST_CASE("swapping the modalities exchanges the two cross-entropy terms") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix<double> hv = oracle::random_matrix<double>(6, 5, rng);
        Matrix<double> hx = oracle::random_matrix<double>(6, 5, rng);

        // With a symmetric target (one-hot) the loss is unchanged by the swap.
        LossConfig one_hot{1.0, Objective::one_hot};
        CHECK(bleep_loss(hv, hx, one_hot).loss == doctest::Approx(bleep_loss(hx, hv, one_hot).loss).epsilon(1e-10));

        // A row softmax target is generally not symmetric, so in smoothed mode the swap
        // pairs S^T with T and S with T^T: loss(h_x, h_v) = [ce(S^T, T) + ce(S, T^T)] / 2B.
        LossConfig smoothed{1.0, Objective::smoothed};
        Matrix<double> s = hx * hv.transpose();
        Matrix<double> t = smoothed_targets(similarities(hv, hx), 1.0);
        double expected = 0;
        for (Index i = 0; i < 6; ++i) {
            double rmax = s.row(i).maxCoeff(), cmax = s.col(i).maxCoeff();
            double rsum = (s.row(i).array() - rmax).exp().sum();
            double csum = (s.col(i).array() - cmax).exp().sum();
            for (Index j = 0; j < 6; ++j) {
                expected -= t(j, i) * (s(i, j) - rmax - std::log(rsum));
                expected -= t(i, j) * (s(j, i) - cmax - std::log(csum));
            }
        }
        CHECK(bleep_loss(hx, hv, smoothed).loss == doctest::Approx(expected / 12.0).epsilon(1e-10));
    }

    // Orthonormal embeddings give a symmetric smoothed target, and then the swap is exact.
    Matrix<double> q = Matrix<double>::Identity(4, 4);
    Matrix<double> r = q.rowwise().reverse();
    LossConfig smoothed{1.0, Objective::smoothed};
    CHECK(bleep_loss(q, r, smoothed).loss == doctest::Approx(bleep_loss(r, q, smoothed).loss).epsilon(1e-12));
}

TEST_CASE("smoothed loss is invariant to a shared row permutation") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix<double> hv = oracle::random_matrix<double>(8, 4, rng);
        Matrix<double> hx = oracle::random_matrix<double>(8, 4, rng);
        std::vector<Index> perm(8);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix<double> pv(8, 4), px(8, 4);
        for (Index i = 0; i < 8; ++i) {
            pv.row(i) = hv.row(perm[static_cast<std::size_t>(i)]);
            px.row(i) = hx.row(perm[static_cast<std::size_t>(i)]);
        }
        LossConfig cfg{1.0, Objective::smoothed};
        CHECK(bleep_loss(pv, px, cfg).loss == doctest::Approx(bleep_loss(hv, hx, cfg).loss).epsilon(1e-10));
    }
}

TEST_CASE("loss is non-negative in both modes") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        for (auto objective : {Objective::smoothed, Objective::one_hot}) {
            DenseMatrix hv = oracle::random_matrix<float>(4, 3, rng, 3.0);
            DenseMatrix hx = oracle::random_matrix<float>(4, 3, rng, 3.0);
            CHECK(bleep_loss(hv, hx, LossConfig{2.0, objective}).loss >= 0.0);
        }
    }
}
