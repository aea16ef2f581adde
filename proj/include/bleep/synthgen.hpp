#ifndef BLEEP_SYNTHGEN_HPP
#define BLEEP_SYNTHGEN_HPP

#include "dataset.hpp"

#include <cstdint>
#include <vector>

/**
 * @file synthgen.hpp
 *
 * @brief Synthetic paired datasets driven by a latent zonation coordinate, with a known recovery ceiling.
 *
 * Each spot has a latent `z` in [0, 1]. Zonated gene `g` has clean mean `baseline_g * exp(loading_g * (z - 0.5))`,
 * with loadings alternating in sign; the other genes have constant mean `baseline_g`.
 * Observed counts apply multiplicative log-normal noise, Poisson sampling and dropout.
 * Image features are a fixed random nonlinear mixing of `z` and nuisance latents plus Gaussian noise.
 */

namespace bleep {

struct SynthConfig {
    Index n_spots = 2000;
    Index n_genes = 200;
    Index n_zonated = 50;
    Index d_img = 64;

    /** Standard deviation of the log-normal multiplicative expression noise. */
    double expression_noise = 0.3;

    /** Standard deviation of Gaussian noise added to each image feature. */
    double feature_noise = 0.1;

    /** Probability that an individual count is zeroed. */
    double dropout = 0.1;

    /** Replaces Poisson sampling by its mean. */
    bool noiseless = false;

    std::uint64_t seed = 0;

    /**
     * @throws ValidationError for empty sizes, `n_zonated > n_genes`, negative noise or dropout outside [0, 1).
     */
    void validate() const;
};

inline constexpr Index synth_nuisance_dims = 4;

struct GroundTruth {
    std::vector<double> latent;
    std::vector<double> loadings;
    std::vector<double> baselines;

    /** Noise-free expression means, `n_spots x n_genes`. */
    DenseMatrix clean;

    std::vector<Index> zonated_genes() const;
};

/**
 * Clean mean of one gene at latent position `z`.
 */
double clean_mean(double z, double loading, double baseline);

/**
 * Recomputes the clean matrix from latents, loadings and baselines.
 */
DenseMatrix clean_expression(const std::vector<double>& latent, const std::vector<double>& loadings, const std::vector<double>& baselines);

struct SynthResult {
    PairedDataset dataset;
    GroundTruth truth;
};

/**
 * Deterministic in `cfg`; expression holds raw counts (or clean means in noiseless mode without noise).
 * Spots are laid on a square grid so that `z` increases with distance from the grid center.
 */
SynthResult generate(const SynthConfig& cfg);

/**
 * Ground truth restricted to the spots at `rows`.
 */
GroundTruth subset_truth(const GroundTruth& truth, const std::vector<Index>& rows);

inline constexpr int oracle_bins = 20;

/**
 * Average Pearson r over `genes` achieved by the best function of the true latent:
 * per-gene means in 20 equal-width bins of `z`, each spot predicted from its bin with its own value left out.
 * Genes whose expression is constant contribute 0.
 *
 * @throws ValidationError if `genes` is empty or sizes disagree.
 */
double oracle_ceiling(const GroundTruth& truth, const PairedDataset& dataset, const GeneSet& genes);

}

#endif
