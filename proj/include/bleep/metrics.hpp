#ifndef BLEEP_METRICS_HPP
#define BLEEP_METRICS_HPP

#include "dataset.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

/**
 * @file metrics.hpp
 *
 * @brief Evaluation of predicted expression: per-gene correlation, gene-set averages,
 * moment preservation, gene-gene correlation and clustering agreement.
 */

namespace bleep {

/**
 * Column-wise Pearson correlations. A gene is invalid when either column has zero variance;
 * its `r` is then 0.
 */
struct GeneCorrelations {
    std::vector<double> r;
    std::vector<bool> valid;

    std::size_t size() const { return r.size(); }
    std::size_t num_invalid() const;
};

/**
 * @throws ShapeError if the shapes differ.
 * @throws ValidationError if there are fewer than two rows.
 */
GeneCorrelations pearson_per_gene(const DenseMatrix& pred, const DenseMatrix& truth);

struct SetAverage {
    double mean = 0;
    std::size_t used = 0;
    std::size_t excluded = 0;
};

/**
 * Mean correlation over the valid genes of `set`.
 * @throws ValidationError if the set has no valid genes or indexes outside `r`.
 */
SetAverage set_average(const GeneCorrelations& r, const GeneSet& set);

/**
 * Gene-gene Pearson correlation matrix. Zero-variance genes get an all-zero row and column, including the diagonal.
 * @throws ValidationError if there are fewer than two rows.
 */
DenseMatrix ggc(const DenseMatrix& expr);

/**
 * Per-gene ratios of predicted to true mean and variance. A ratio is flagged invalid (and set to 0)
 * when its denominator is zero.
 */
struct MomentRatios {
    std::vector<double> mean_ratio;
    std::vector<double> var_ratio;
    std::vector<bool> mean_valid;
    std::vector<bool> var_valid;
};

MomentRatios moment_preservation(const DenseMatrix& pred, const DenseMatrix& truth);

inline constexpr int kmeans_max_iterations = 100;
inline constexpr double kmeans_tolerance = 1e-4;

struct KMeansResult {
    std::vector<int> labels;
    Matrix<double> centers;
    int iterations = 0;
};

/**
 * k-means++ seeding followed by Lloyd iterations until no center moves more than 1e-4 or 100 iterations pass.
 * Deterministic for a given seed.
 *
 * @throws ValidationError unless `1 <= k <= rows.rows()`.
 */
KMeansResult kmeans_fit(const DenseMatrix& rows, int k, std::uint64_t seed);

inline std::vector<int> kmeans(const DenseMatrix& rows, int k, std::uint64_t seed) {
    return kmeans_fit(rows, k, seed).labels;
}

struct Agreement {
    double ari = 0;
    double nmi = 0;
};

/**
 * Adjusted Rand index (permutation-model expectation) and normalized mutual information with arithmetic-mean normalization.
 * @throws ValidationError if the labelings differ in length.
 */
Agreement cluster_agreement(const std::vector<int>& a, const std::vector<int>& b);

/**
 * Mean and maximum absolute deviation from the mean across replicates.
 */
struct ReplicateSummary {
    double mean = 0;
    double max_deviation = 0;
};

ReplicateSummary summarize_replicates(const std::vector<double>& values);

struct NamedGeneSet {
    std::string name;
    GeneSet set;
};

struct MetricsReport {
    GeneCorrelations per_gene_r;
    std::map<std::string, SetAverage> set_averages;
    MomentRatios moments;
    std::vector<Index> ggc_genes;
    DenseMatrix ggc_pred;
    DenseMatrix ggc_truth;
    Agreement clustering;
    int clusters = 0;
    int pred_clusters_used = 0;
    int truth_clusters_used = 0;
};

struct EvaluateOptions {
    int clusters = 6;
    std::uint64_t seed = 0;
    /** Index into the supplied gene sets used for the gene-gene correlation matrices. */
    std::size_t ggc_set = 0;
};

/**
 * Runs every metric on one prediction. Sets with no valid genes are omitted from `set_averages`.
 */
MetricsReport evaluate(const DenseMatrix& pred, const DenseMatrix& truth, const std::vector<NamedGeneSet>& sets, const EvaluateOptions& options);

}

#endif
