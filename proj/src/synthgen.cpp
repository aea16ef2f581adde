#include "bleep/synthgen.hpp"
#include "bleep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace bleep {

void SynthConfig::validate() const {
    if (n_spots < 1 || n_genes < 1 || d_img < 1) {
        throw ValidationError("synth: n_spots, n_genes and d_img must be at least 1");
    }
    if (n_zonated < 0 || n_zonated > n_genes) {
        throw ValidationError("synth: n_zonated must lie in [0, n_genes]");
    }
    if (!(expression_noise >= 0) || !(feature_noise >= 0)) {
        throw ValidationError("synth: noise levels must be non-negative");
    }
    if (!(dropout >= 0 && dropout < 1)) {
        throw ValidationError("synth: dropout must lie in [0, 1)");
    }
}

std::vector<Index> GroundTruth::zonated_genes() const {
    std::vector<Index> out;
    for (std::size_t g = 0; g < loadings.size(); ++g) {
        if (loadings[g] != 0) {
            out.push_back(static_cast<Index>(g));
        }
    }
    return out;
}

double clean_mean(double z, double loading, double baseline) {
    return baseline * std::exp(loading * (z - 0.5));
}

DenseMatrix clean_expression(const std::vector<double>& latent, const std::vector<double>& loadings, const std::vector<double>& baselines) {
    if (loadings.size() != baselines.size()) {
        throw ShapeError("clean_expression: loadings and baselines differ in length");
    }
    DenseMatrix out(static_cast<Index>(latent.size()), static_cast<Index>(loadings.size()));
    for (std::size_t i = 0; i < latent.size(); ++i) {
        for (std::size_t g = 0; g < loadings.size(); ++g) {
            out(static_cast<Index>(i), static_cast<Index>(g)) = static_cast<float>(clean_mean(latent[i], loadings[g], baselines[g]));
        }
    }
    return out;
}

namespace {

std::string padded(const char* prefix, Index i, Index total) {
    int width = 1;
    for (Index t = std::max<Index>(total - 1, 1); t >= 10; t /= 10) {
        ++width;
    }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%s%0*lld", prefix, width, static_cast<long long>(i));
    return buffer;
}

}

SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto ngenes = static_cast<std::size_t>(cfg.n_genes);
    const auto nspots = static_cast<std::size_t>(cfg.n_spots);
    const auto dimg = static_cast<std::size_t>(cfg.d_img);

    SynthResult out;
    auto& truth = out.truth;
    truth.loadings.assign(ngenes, 0);
    truth.baselines.assign(ngenes, 0);
    for (std::size_t g = 0; g < ngenes; ++g) {
        // Log-uniform baselines between 2 and 50 counts.
        truth.baselines[g] = std::exp(std::log(2.0) + unif(rng) * (std::log(50.0) - std::log(2.0)));
        double magnitude = 1.5 + 1.5 * unif(rng);
        if (static_cast<Index>(g) < cfg.n_zonated) {
            truth.loadings[g] = (g % 2 == 0) ? magnitude : -magnitude;
        }
    }

    // Fixed mixing from latents to image features.
    std::vector<double> z_weight(dimg), bias(dimg);
    Matrix<double> nuisance_weight(cfg.d_img, synth_nuisance_dims);
    for (std::size_t j = 0; j < dimg; ++j) {
        z_weight[j] = 2.5 * normal(rng);
        bias[j] = 0.5 * normal(rng);
        for (Index m = 0; m < synth_nuisance_dims; ++m) {
            nuisance_weight(static_cast<Index>(j), m) = 0.5 * normal(rng);
        }
    }

    truth.latent.resize(nspots);
    for (auto& z : truth.latent) {
        z = unif(rng);
    }
    truth.clean = clean_expression(truth.latent, truth.loadings, truth.baselines);

    auto& data = out.dataset;
    data.features.resize(cfg.n_spots, cfg.d_img);
    data.expression.resize(cfg.n_spots, cfg.n_genes);
    RowVector<double> nuisance(synth_nuisance_dims);
    for (std::size_t i = 0; i < nspots; ++i) {
        auto row = static_cast<Index>(i);
        double zc = 4.0 * (truth.latent[i] - 0.5);
        for (Index m = 0; m < synth_nuisance_dims; ++m) {
            nuisance[m] = normal(rng);
        }
        for (std::size_t j = 0; j < dimg; ++j) {
            double pre = z_weight[j] * zc + bias[j] + nuisance.dot(nuisance_weight.row(static_cast<Index>(j)));
            data.features(row, static_cast<Index>(j)) = static_cast<float>(std::tanh(pre) + cfg.feature_noise * normal(rng));
        }

        for (std::size_t g = 0; g < ngenes; ++g) {
            double mean = truth.clean(row, static_cast<Index>(g));
            if (cfg.expression_noise > 0) {
                double s = cfg.expression_noise;
                mean *= std::exp(s * normal(rng) - s * s / 2);
            }
            double count = mean;
            if (!cfg.noiseless) {
                std::poisson_distribution<long long> pois(mean);
                count = static_cast<double>(pois(rng));
            }
            if (cfg.dropout > 0 && unif(rng) < cfg.dropout) {
                count = 0;
            }
            data.expression(row, static_cast<Index>(g)) = static_cast<float>(count);
        }
    }

    data.gene_names.reserve(ngenes);
    for (std::size_t g = 0; g < ngenes; ++g) {
        data.gene_names.push_back(padded("G", static_cast<Index>(g), cfg.n_genes));
    }
    data.spot_ids.reserve(nspots);
    for (std::size_t i = 0; i < nspots; ++i) {
        data.spot_ids.push_back(padded("spot", static_cast<Index>(i), cfg.n_spots));
    }

    // Grid positions ordered by distance from the center receive spots in increasing z.
    Index side = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(cfg.n_spots))));
    double center = (static_cast<double>(side) - 1) / 2;
    std::vector<std::pair<double, Index>> positions;
    for (Index p = 0; p < side * side; ++p) {
        double dr = static_cast<double>(p / side) - center, dc = static_cast<double>(p % side) - center;
        positions.emplace_back(dr * dr + dc * dc, p);
    }
    std::stable_sort(positions.begin(), positions.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<Index> by_latent(nspots);
    std::iota(by_latent.begin(), by_latent.end(), Index(0));
    std::stable_sort(by_latent.begin(), by_latent.end(), [&](Index a, Index b) {
        return truth.latent[static_cast<std::size_t>(a)] < truth.latent[static_cast<std::size_t>(b)];
    });

    data.coords = DenseMatrix(cfg.n_spots, 2);
    for (std::size_t rank = 0; rank < nspots; ++rank) {
        Index p = positions[rank].second;
        data.coords->row(by_latent[rank]) << static_cast<float>(p / side), static_cast<float>(p % side);
    }

    return out;
}

GroundTruth subset_truth(const GroundTruth& truth, const std::vector<Index>& rows) {
    GroundTruth out;
    out.loadings = truth.loadings;
    out.baselines = truth.baselines;
    out.latent.reserve(rows.size());
    out.clean.resize(static_cast<Index>(rows.size()), truth.clean.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.latent.push_back(truth.latent.at(static_cast<std::size_t>(rows[i])));
        out.clean.row(static_cast<Index>(i)) = truth.clean.row(rows[i]);
    }
    return out;
}

double oracle_ceiling(const GroundTruth& truth, const PairedDataset& dataset, const GeneSet& genes) {
    if (genes.indices.empty()) {
        throw ValidationError("oracle_ceiling: empty gene set");
    }
    const Index n = dataset.expression.rows();
    if (static_cast<Index>(truth.latent.size()) != n) {
        throw ValidationError("oracle_ceiling: " + std::to_string(truth.latent.size()) + " latents for " + std::to_string(n) + " spots");
    }
    if (n < 3) {
        throw ValidationError("oracle_ceiling: at least three spots are required");
    }
    genes.validate(dataset.expression.cols());

    std::vector<int> bin(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        double z = std::clamp(truth.latent[static_cast<std::size_t>(i)], 0.0, 1.0);
        bin[static_cast<std::size_t>(i)] = std::min(oracle_bins - 1, static_cast<int>(z * oracle_bins));
    }

    DenseMatrix pred(n, static_cast<Index>(genes.indices.size()));
    DenseMatrix actual(n, static_cast<Index>(genes.indices.size()));
    for (std::size_t s = 0; s < genes.indices.size(); ++s) {
        Index g = genes.indices[s];
        auto col = static_cast<Index>(s);

        std::vector<double> sums(oracle_bins, 0), counts(oracle_bins, 0);
        double total = 0;
        for (Index i = 0; i < n; ++i) {
            auto b = static_cast<std::size_t>(bin[static_cast<std::size_t>(i)]);
            sums[b] += dataset.expression(i, g);
            counts[b] += 1;
            total += dataset.expression(i, g);
        }

        // Leave-one-out bin means: each spot is predicted without its own value.
        for (Index i = 0; i < n; ++i) {
            auto b = static_cast<std::size_t>(bin[static_cast<std::size_t>(i)]);
            double v = dataset.expression(i, g);
            double p = counts[b] > 1 ? (sums[b] - v) / (counts[b] - 1) : (total - v) / static_cast<double>(n - 1);
            pred(i, col) = static_cast<float>(p);
        }
        actual.col(col) = dataset.expression.col(g);
    }

    auto r = pearson_per_gene(pred, actual);
    double total = 0;
    for (auto v : r.r) {
        total += v;
    }
    return total / static_cast<double>(r.r.size());
}

}
