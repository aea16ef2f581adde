#include "doctest.h"

#include "bleep/metrics.hpp"
#include "metrics_examples.hpp"
#include "oracles.hpp"

#include <numeric>
#include <random>

using namespace bleep;

TEST_CASE("metrics worked examples") {
    for (const auto& outcome : metrics_examples::run()) {
        CAPTURE(outcome.name);
        CHECK(outcome.passed);
    }
}

TEST_CASE("pearson_per_gene validates inputs") {
    CHECK_THROWS_AS(pearson_per_gene(DenseMatrix::Zero(3, 2), DenseMatrix::Zero(3, 3)), ShapeError);
    CHECK_THROWS_AS(pearson_per_gene(DenseMatrix::Zero(1, 2), DenseMatrix::Zero(1, 2)), ValidationError);
    CHECK_THROWS_AS(ggc(DenseMatrix::Zero(1, 2)), ValidationError);
    CHECK_THROWS_AS(moment_preservation(DenseMatrix::Zero(3, 2), DenseMatrix::Zero(2, 2)), ShapeError);
    CHECK_THROWS_AS(cluster_agreement({0, 1}, {0}), ValidationError);
    CHECK_THROWS_AS(kmeans(DenseMatrix::Zero(3, 2), 4, 1), ValidationError);
    CHECK_THROWS_AS(kmeans(DenseMatrix::Zero(3, 2), 0, 1), ValidationError);
}

TEST_CASE("constant prediction column is flagged") {
    std::mt19937_64 rng(42);
    DenseMatrix truth = oracle::random_matrix<float>(20, 2, rng);
    DenseMatrix pred = truth;
    pred.col(0).setConstant(1.0f);
    auto r = pearson_per_gene(pred, truth);
    CHECK(!r.valid[0]);
    CHECK(r.r[0] == 0.0);
    CHECK(r.valid[1]);
}

TEST_CASE("ggc equals column-pairwise pearson") {
    std::mt19937_64 rng(43);
    DenseMatrix expr = oracle::random_matrix<float>(30, 5, rng);
    expr.col(4) = expr.col(0) * 0.5f + expr.col(1);
    auto g = ggc(expr);
    for (Index i = 0; i < 5; ++i) {
        for (Index j = 0; j < 5; ++j) {
            std::vector<double> x, y;
            for (Index r = 0; r < 30; ++r) {
                x.push_back(expr(r, i));
                y.push_back(expr(r, j));
            }
            CHECK(std::abs(g(i, j) - oracle::pearson(x, y)) <= 1e-6);
        }
    }
}

TEST_CASE("metrics are row-order invariant under a shared permutation") {
    std::mt19937_64 rng(44);
    DenseMatrix truth = oracle::random_matrix<float>(60, 6, rng);
    DenseMatrix pred = truth + oracle::random_matrix<float>(60, 6, rng);
    std::vector<Index> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    DenseMatrix pt(60, 6), pp(60, 6);
    for (Index i = 0; i < 60; ++i) {
        pt.row(i) = truth.row(perm[static_cast<std::size_t>(i)]);
        pp.row(i) = pred.row(perm[static_cast<std::size_t>(i)]);
    }
    auto a = pearson_per_gene(pred, truth);
    auto b = pearson_per_gene(pp, pt);
    auto ma = moment_preservation(pred, truth);
    auto mb = moment_preservation(pp, pt);
    for (std::size_t g = 0; g < 6; ++g) {
        CHECK(a.r[g] == doctest::Approx(b.r[g]).epsilon(1e-9));
        CHECK(ma.var_ratio[g] == doctest::Approx(mb.var_ratio[g]).epsilon(1e-9));
    }
}

TEST_CASE("nmi of independent labelings is small and of nested partitions is between 0 and 1") {
    std::vector<int> fine{0, 1, 2, 3, 0, 1, 2, 3};
    std::vector<int> coarse{0, 0, 1, 1, 0, 0, 1, 1};
    auto agreement = cluster_agreement(fine, coarse);
    CHECK(agreement.nmi > 0.0);
    CHECK(agreement.nmi < 1.0);
    // Both single-cluster labelings: entropies vanish and NMI is defined as 1.
    CHECK(cluster_agreement({0, 0, 0}, {5, 5, 5}).nmi == 1.0);
}

TEST_CASE("evaluate assembles a report") {
    std::mt19937_64 rng(45);
    DenseMatrix truth = oracle::random_matrix<float>(80, 10, rng);
    DenseMatrix pred = truth + 0.5f * oracle::random_matrix<float>(80, 10, rng);
    std::vector<NamedGeneSet> sets{{"first", GeneSet{GeneSetLabel::custom, {0, 1, 2}}}, {"rest", GeneSet{GeneSetLabel::custom, {3, 4, 5, 6, 7, 8, 9}}}};
    auto report = evaluate(pred, truth, sets, EvaluateOptions{4, 1, 1});
    CHECK(report.per_gene_r.r.size() == 10);
    CHECK(report.set_averages.size() == 2);
    CHECK(report.ggc_pred.rows() == 7);
    CHECK(report.ggc_truth.rows() == 7);
    CHECK(report.clusters == 4);
    CHECK(report.clustering.ari > -1.0);
    auto again = evaluate(pred, truth, sets, EvaluateOptions{4, 1, 1});
    CHECK(again.clustering.ari == report.clustering.ari);
}
