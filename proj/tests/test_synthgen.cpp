#include "doctest.h"

#include "bleep/io.hpp"
#include "bleep/synthgen.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace bleep;

namespace {

SynthConfig small(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_spots = 300;
    cfg.n_genes = 40;
    cfg.n_zonated = 10;
    cfg.d_img = 12;
    cfg.seed = seed;
    return cfg;
}

std::vector<double> column(const DenseMatrix& m, Index c) {
    std::vector<double> out;
    for (Index r = 0; r < m.rows(); ++r) {
        out.push_back(m(r, c));
    }
    return out;
}

}

TEST_CASE("generation is deterministic per seed") {
    auto a = generate(small(1));
    auto b = generate(small(1));
    CHECK(bmat_bytes(a.dataset.features) == bmat_bytes(b.dataset.features));
    CHECK(bmat_bytes(a.dataset.expression) == bmat_bytes(b.dataset.expression));
    CHECK(a.truth.latent == b.truth.latent);
    CHECK(a.dataset.gene_names == b.dataset.gene_names);
    REQUIRE(a.dataset.coords.has_value());
    CHECK(*a.dataset.coords == *b.dataset.coords);

    auto c = generate(small(2));
    CHECK(bmat_bytes(a.dataset.expression) != bmat_bytes(c.dataset.expression));
}

TEST_CASE("generated shapes and invariants") {
    auto result = generate(small(3));
    const auto& d = result.dataset;
    CHECK_NOTHROW(d.validate());
    CHECK(d.features.rows() == 300);
    CHECK(d.features.cols() == 12);
    CHECK(d.expression.cols() == 40);
    CHECK(d.expression.minCoeff() >= 0);
    for (double z : result.truth.latent) {
        CHECK(z >= 0.0);
        CHECK(z <= 1.0);
    }
    CHECK(result.truth.zonated_genes().size() == 10);
    CHECK(clean_expression(result.truth.latent, result.truth.loadings, result.truth.baselines) == result.truth.clean);
}

TEST_CASE("noiseless mode reproduces the clean matrix") {
    auto cfg = small(4);
    cfg.expression_noise = 0;
    cfg.dropout = 0;
    cfg.noiseless = true;
    auto result = generate(cfg);
    CHECK(result.dataset.expression == result.truth.clean);
}

TEST_CASE("zonated clean means are monotone in the latent") {
    auto result = generate(small(5));
    for (Index g : result.truth.zonated_genes()) {
        double loading = result.truth.loadings[static_cast<std::size_t>(g)];
        double baseline = result.truth.baselines[static_cast<std::size_t>(g)];
        double previous = clean_mean(0.0, loading, baseline);
        for (int step = 1; step <= 20; ++step) {
            double value = clean_mean(step / 20.0, loading, baseline);
            CHECK((loading > 0 ? value > previous : value < previous));
            previous = value;
        }
        CHECK(clean_mean(0.5, loading, baseline) == doctest::Approx(baseline));
    }
}

TEST_CASE("without zonated genes no gene tracks the latent") {
    SynthConfig cfg;
    cfg.n_spots = 2000;
    cfg.n_genes = 50;
    cfg.n_zonated = 0;
    cfg.seed = 6;
    auto result = generate(cfg);
    for (Index g = 0; g < 50; ++g) {
        CHECK(std::abs(oracle::pearson(column(result.dataset.expression, g), result.truth.latent)) < 0.1);
    }
}

TEST_CASE("oracle ceiling examples") {
    auto cfg = small(7);
    cfg.n_spots = 2000;
    cfg.expression_noise = 0;
    cfg.dropout = 0;
    cfg.noiseless = true;
    auto clean = generate(cfg);
    GeneSet zonated{GeneSetLabel::custom, clean.truth.zonated_genes()};
    CHECK(oracle_ceiling(clean.truth, clean.dataset, zonated) == doctest::Approx(1.0).epsilon(0.02));

    auto noisy = generate(small(7));
    std::vector<Index> flat;
    for (Index g = 10; g < 40; ++g) {
        flat.push_back(g);
    }
    CHECK(std::abs(oracle_ceiling(noisy.truth, noisy.dataset, GeneSet{GeneSetLabel::custom, flat})) < 0.1);
    CHECK_THROWS_AS(oracle_ceiling(noisy.truth, noisy.dataset, GeneSet{}), ValidationError);
}

TEST_CASE("more expression noise does not raise the ceiling") {
    double previous = 2.0;
    for (double sigma : {0.0, 0.3, 0.8}) {
        double total = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto cfg = small(100 + seed);
            cfg.expression_noise = sigma;
            auto result = generate(cfg);
            total += oracle_ceiling(result.truth, result.dataset, GeneSet{GeneSetLabel::custom, result.truth.zonated_genes()});
        }
        double mean = total / 5;
        CHECK(mean <= previous);
        previous = mean;
    }
}

TEST_CASE("configuration validation") {
    auto cfg = small(8);
    cfg.n_zonated = 41;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
    cfg = small(8);
    cfg.dropout = 1.0;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
    cfg = small(8);
    cfg.expression_noise = -0.1;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
    cfg = small(8);
    cfg.n_spots = 0;
    CHECK_THROWS_AS(generate(cfg), ValidationError);
}

TEST_CASE("subset_truth keeps the selected rows") {
    auto result = generate(small(9));
    auto sub = subset_truth(result.truth, {4, 2});
    CHECK(sub.latent == std::vector<double>{result.truth.latent[4], result.truth.latent[2]});
    CHECK(sub.clean.row(1) == result.truth.clean.row(2));
    CHECK(sub.loadings == result.truth.loadings);
}
