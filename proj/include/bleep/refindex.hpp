#ifndef BLEEP_REFINDEX_HPP
#define BLEEP_REFINDEX_HPP

#include "dataset.hpp"
#include "model.hpp"

#include <string>
#include <vector>

/**
 * @file refindex.hpp
 *
 * @brief Exact Euclidean k-nearest-neighbor search over reference embeddings and query-reference imputation.
 */

namespace bleep {

/**
 * Which reference embedding is searched. Queries are always embedded with the image encoder.
 */
enum class IndexKey {
    image,
    expression
};

const char* index_key_name(IndexKey key);
IndexKey parse_index_key(const std::string& name);

/**
 * Immutable after construction; safe to query concurrently.
 */
struct ReferenceIndex {
    DenseMatrix embeddings;
    DenseMatrix expression;
    std::string checkpoint_hash;
    std::vector<std::string> gene_names;
    IndexKey key = IndexKey::image;

    Index size() const { return embeddings.rows(); }

    void validate() const;
};

/**
 * Embeds every reference spot with the checkpoint and stores the reference expression alongside.
 *
 * @throws ValidationError for an empty reference.
 * @throws ShapeError if the reference does not fit the encoder input.
 */
ReferenceIndex build_index(const ModelCheckpoint& ckpt, const PairedDataset& reference, std::string checkpoint_hash, IndexKey key = IndexKey::image);

struct Neighbors {
    std::vector<Index> indices;
    std::vector<float> distances;
};

/**
 * The `k` reference rows closest to `query` by Euclidean distance, ascending, ties to the lower index.
 * Distances are accumulated in double precision.
 *
 * @throws ValidationError unless `1 <= k <= index.size()`.
 * @throws ShapeError if the query width differs from the embedding width.
 */
Neighbors knn(const ReferenceIndex& index, const Eigen::Ref<const RowVector<float>>& query, Index k);

/**
 * `knn()` for every row of `queries`, distributed over `workers()`.
 * Results are identical to calling `knn()` one query at a time.
 */
std::vector<Neighbors> knn_batch(const ReferenceIndex& index, const DenseMatrix& queries, Index k);

enum class Aggregation {
    simple,
    average,
    weighted
};

const char* aggregation_name(Aggregation agg);
Aggregation parse_aggregation(const std::string& name);

inline constexpr double weighted_epsilon = 1e-8;

struct ImputationConfig {
    Index k = 50;
    Aggregation aggregation = Aggregation::average;

    /** Neighbors actually retrieved: 1 for `simple`, otherwise `k`. */
    Index effective_k() const { return aggregation == Aggregation::simple ? 1 : k; }

    /**
     * @throws ValidationError unless the effective `k` lies in `[1, n_ref]`.
     */
    void validate(Index n_ref) const;
};

/**
 * Combines the expression rows of `neighbors`:
 * `simple` copies the nearest, `average` takes the unweighted mean,
 * `weighted` uses weights proportional to `1 / (d^2 + 1e-8)` normalized to sum to 1.
 */
RowVector<float> aggregate(const DenseMatrix& expression, const Neighbors& neighbors, Aggregation agg);

/**
 * Predicts expression for query patch features: embed with the image encoder, retrieve neighbors, aggregate.
 *
 * @throws ValidationError if the configuration does not fit the index.
 * @throws NumericalError if any predicted value is not finite.
 */
DenseMatrix impute(const ReferenceIndex& index, const ModelCheckpoint& ckpt, const DenseMatrix& query_features, const ImputationConfig& cfg);

/**
 * Imputation from precomputed query embeddings.
 */
DenseMatrix impute_embedded(const ReferenceIndex& index, const DenseMatrix& query_embeddings, const ImputationConfig& cfg);

}

#endif
