#ifndef BLEEP_PREPROCESS_HPP
#define BLEEP_PREPROCESS_HPP

#include "dataset.hpp"

#include <string>
#include <vector>

/**
 * @file preprocess.hpp
 *
 * @brief Total-count normalization, log transform and gene-set selection (highly variable / highly expressed genes).
 */

namespace bleep {

inline constexpr double default_target_sum = 1e4;

/**
 * Scales each row of non-negative counts to sum to `target_sum`.
 *
 * @param spot_ids Optional names used in the error message; row indices are reported otherwise.
 * @throws ValidationError listing every row whose sum is zero, or if any count is negative.
 */
DenseMatrix scale_to_total(const DenseMatrix& raw_counts, double target_sum = default_target_sum, const std::vector<std::string>* spot_ids = nullptr);

/**
 * `log1p(scale_to_total(raw_counts, target_sum))`.
 */
DenseMatrix normalize(const DenseMatrix& raw_counts, double target_sum = default_target_sum, const std::vector<std::string>* spot_ids = nullptr);

/**
 * Inverse of the log step in `normalize()`, recovering total-count-normalized values.
 */
DenseMatrix expm1_matrix(const DenseMatrix& normalized);

/**
 * Per-gene summary produced while ranking highly variable genes.
 */
struct HvgStatistics {
    std::vector<double> means;
    std::vector<double> dispersions;
    std::vector<double> zscores;
    std::vector<int> bins;
    std::vector<bool> expressed;
};

/** Upper limit on the number of mean bins used for dispersion z-scoring. */
inline constexpr int hvg_max_bins = 20;

/** Minimum number of expressed genes per bin; fewer genes use proportionally fewer bins. */
inline constexpr int hvg_min_bin_size = 5;

HvgStatistics hvg_statistics(const DenseMatrix& normalized_pre_log);

/**
 * Dispersion-based highly variable gene selection on total-count-normalized (pre-log) values.
 *
 * Genes with zero mean are not expressed and never selected.
 * Expressed genes are sorted by mean and split into equal-frequency bins (at most 20, at least 5 genes each);
 * the dispersion `var / mean` is z-scored within each bin.
 * Genes with non-zero variance outrank constant genes; then the highest z-score wins, ties going to the lower index.
 *
 * @throws ValidationError if `n` exceeds the number of expressed genes.
 */
GeneSet select_hvg(const DenseMatrix& normalized_pre_log, Index n);

/**
 * Union of per-slice gene sets, indices sorted ascending.
 * `gene_universes[i]` names the genes that `per_slice_sets[i]` indexes into.
 *
 * @throws ValidationError if the universes differ or the two lists have different lengths.
 */
GeneSet hvg_union(const std::vector<GeneSet>& per_slice_sets, const std::vector<std::vector<std::string>>& gene_universes);

/**
 * Top `n` genes by mean normalized expression, ties going to the lower index.
 * @throws ValidationError if `n` exceeds the number of genes.
 */
GeneSet select_heg(const DenseMatrix& normalized, Index n);

/**
 * Partial marker panel used when no marker-gene list is supplied.
 */
std::vector<std::string> default_marker_genes();

}

#endif
