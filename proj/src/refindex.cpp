#include "bleep/refindex.hpp"
#include "bleep/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bleep {

const char* index_key_name(IndexKey key) {
    return key == IndexKey::image ? "image" : "expression";
}

IndexKey parse_index_key(const std::string& name) {
    if (name == "image") {
        return IndexKey::image;
    }
    if (name == "expression") {
        return IndexKey::expression;
    }
    throw ValidationError("unknown index key '" + name + "' (expected image or expression)");
}

void ReferenceIndex::validate() const {
    if (embeddings.rows() != expression.rows()) {
        throw ShapeError("index: " + std::to_string(embeddings.rows()) + " embeddings but " + std::to_string(expression.rows()) + " expression rows");
    }
    if (!gene_names.empty() && static_cast<Index>(gene_names.size()) != expression.cols()) {
        throw ShapeError("index: " + std::to_string(gene_names.size()) + " gene names for " + std::to_string(expression.cols()) + " expression columns");
    }
}

ReferenceIndex build_index(const ModelCheckpoint& ckpt, const PairedDataset& reference, std::string checkpoint_hash, IndexKey key) {
    if (reference.features.rows() == 0) {
        throw ValidationError("build_index: reference is empty");
    }
    if (reference.features.rows() != reference.expression.rows()) {
        throw ShapeError("build_index: reference features have " + std::to_string(reference.features.rows()) + " rows but expression has " + std::to_string(reference.expression.rows()));
    }

    ReferenceIndex output;
    output.embeddings = key == IndexKey::image ? encode_image(ckpt, reference.features) : encode_expression(ckpt, reference.expression);
    output.expression = reference.expression;
    output.checkpoint_hash = std::move(checkpoint_hash);
    output.gene_names = reference.gene_names;
    output.key = key;
    return output;
}

namespace {

void check_k(const ReferenceIndex& index, Index k) {
    if (k < 1 || k > index.size()) {
        throw ValidationError("knn: k = " + std::to_string(k) + " outside [1, " + std::to_string(index.size()) + "]");
    }
}

Neighbors search(const Matrix<double>& reference, const RowVector<double>& query, Index k, std::vector<double>& dist, std::vector<Index>& order) {
    const Index n = reference.rows();
    dist.resize(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
        dist[static_cast<std::size_t>(r)] = (reference.row(r) - query).squaredNorm();
    }

    order.resize(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    auto closer = [&](Index a, Index b) {
        double da = dist[static_cast<std::size_t>(a)], db = dist[static_cast<std::size_t>(b)];
        return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);

    Neighbors output;
    output.indices.assign(order.begin(), order.begin() + k);
    output.distances.reserve(static_cast<std::size_t>(k));
    for (auto i : output.indices) {
        output.distances.push_back(static_cast<float>(std::sqrt(dist[static_cast<std::size_t>(i)])));
    }
    return output;
}

}

Neighbors knn(const ReferenceIndex& index, const Eigen::Ref<const RowVector<float>>& query, Index k) {
    check_k(index, k);
    if (query.cols() != index.embeddings.cols()) {
        throw ShapeError("knn: query has " + std::to_string(query.cols()) + " dims but the index has " + std::to_string(index.embeddings.cols()));
    }
    Matrix<double> reference = index.embeddings.cast<double>();
    RowVector<double> q = query.cast<double>();
    std::vector<double> dist;
    std::vector<Index> order;
    return search(reference, q, k, dist, order);
}

std::vector<Neighbors> knn_batch(const ReferenceIndex& index, const DenseMatrix& queries, Index k) {
    check_k(index, k);
    if (queries.cols() != index.embeddings.cols()) {
        throw ShapeError("knn: queries have " + std::to_string(queries.cols()) + " dims but the index has " + std::to_string(index.embeddings.cols()));
    }

    Matrix<double> reference = index.embeddings.cast<double>();
    std::vector<Neighbors> output(static_cast<std::size_t>(queries.rows()));
    parallel_ranges(output.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist;
        std::vector<Index> order;
        for (std::size_t q = begin; q < end; ++q) {
            RowVector<double> query = queries.row(static_cast<Index>(q)).cast<double>();
            output[q] = search(reference, query, k, dist, order);
        }
    });
    return output;
}

const char* aggregation_name(Aggregation agg) {
    switch (agg) {
        case Aggregation::simple: return "simple";
        case Aggregation::average: return "average";
        case Aggregation::weighted: return "weighted";
    }
    return "average";
}

Aggregation parse_aggregation(const std::string& name) {
    if (name == "simple") {
        return Aggregation::simple;
    }
    if (name == "average") {
        return Aggregation::average;
    }
    if (name == "weighted") {
        return Aggregation::weighted;
    }
    throw ValidationError("unknown aggregation '" + name + "' (expected simple, average or weighted)");
}

void ImputationConfig::validate(Index n_ref) const {
    Index used = effective_k();
    if (used < 1 || used > n_ref) {
        throw ValidationError("impute: k = " + std::to_string(used) + " outside [1, " + std::to_string(n_ref) + "] for this reference");
    }
}

RowVector<float> aggregate(const DenseMatrix& expression, const Neighbors& neighbors, Aggregation agg) {
    if (neighbors.indices.empty()) {
        throw ValidationError("aggregate: no neighbors");
    }
    const Index ngenes = expression.cols();

    if (agg == Aggregation::simple) {
        return expression.row(neighbors.indices.front());
    }

    std::vector<double> weights(neighbors.indices.size());
    if (agg == Aggregation::average) {
        std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(weights.size()));
    } else {
        double total = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            double d = neighbors.distances[i];
            weights[i] = 1.0 / (d * d + weighted_epsilon);
            total += weights[i];
        }
        for (auto& w : weights) {
            w /= total;
        }
    }

    RowVector<double> acc = RowVector<double>::Zero(ngenes);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i] * expression.row(neighbors.indices[i]).cast<double>();
    }
    return acc.cast<float>();
}

DenseMatrix impute_embedded(const ReferenceIndex& index, const DenseMatrix& query_embeddings, const ImputationConfig& cfg) {
    cfg.validate(index.size());
    auto neighbors = knn_batch(index, query_embeddings, cfg.effective_k());

    DenseMatrix output(query_embeddings.rows(), index.expression.cols());
    parallel_ranges(neighbors.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t q = begin; q < end; ++q) {
            output.row(static_cast<Index>(q)) = aggregate(index.expression, neighbors[q], cfg.aggregation);
        }
    });

    if (!output.allFinite()) {
        throw NumericalError("impute: prediction contains non-finite values");
    }
    return output;
}

DenseMatrix impute(const ReferenceIndex& index, const ModelCheckpoint& ckpt, const DenseMatrix& query_features, const ImputationConfig& cfg) {
    cfg.validate(index.size());
    return impute_embedded(index, encode_image(ckpt, query_features), cfg);
}

}
