#ifndef BLEEP_CONTRASTIVE_HPP
#define BLEEP_CONTRASTIVE_HPP

#include "linalg.hpp"

#include <string>

/**
 * @file contrastive.hpp
 *
 * @brief Similarity-smoothed bidirectional contrastive loss between paired image and expression embeddings.
 *
 * For a batch of `B` pairs with image embeddings `H_v` and expression embeddings `H_x` (both `B x h`),
 * the cross similarity is `S = H_x H_v^T` and the target is the row-wise softmax of the mean internal similarity,
 * `T = softmax(tau * (H_v H_v^T + H_x H_x^T) / 2)`.
 * The loss averages the cross-entropy of the rows of `S` against `T` and of the rows of `S^T` against `T^T`.
 */

namespace bleep {

enum class Objective {
    smoothed,
    one_hot
};

inline const char* objective_name(Objective o) {
    return o == Objective::smoothed ? "smoothed" : "one_hot";
}

inline Objective parse_objective(const std::string& name) {
    if (name == "smoothed") {
        return Objective::smoothed;
    }
    if (name == "one_hot" || name == "one-hot" || name == "clip") {
        return Objective::one_hot;
    }
    throw ValidationError("unknown objective '" + name + "' (expected smoothed or one_hot)");
}

struct LossConfig {
    /**
     * Multiplies the averaged internal similarities inside the target softmax. Must be positive.
     * Cross logits are not scaled.
     */
    double temperature = 1.0;

    /**
     * `one_hot` replaces the smoothed target with the identity, recovering the plain CLIP objective.
     */
    Objective objective = Objective::smoothed;
};

template<typename Scalar>
struct SimilarityBlock {
    /** `H_x H_v^T`: entry (i, j) pairs expression i with image j. */
    Matrix<Scalar> cross;
    /** `H_v H_v^T`. */
    Matrix<Scalar> img_internal;
    /** `H_x H_x^T`. */
    Matrix<Scalar> expr_internal;
};

template<typename Scalar>
struct LossResult {
    double loss = 0;
    Matrix<Scalar> grad_image;
    Matrix<Scalar> grad_expression;
};

namespace detail {

template<class DerivedV, class DerivedX>
void check_pair(const Eigen::MatrixBase<DerivedV>& h_v, const Eigen::MatrixBase<DerivedX>& h_x, const char* caller) {
    if (h_v.rows() != h_x.rows() || h_v.cols() != h_x.cols()) {
        throw ShapeError(std::string(caller) + ": image embeddings are " + shape_string(h_v) + " but expression embeddings are " + shape_string(h_x));
    }
    if (h_v.rows() < 1) {
        throw ShapeError(std::string(caller) + ": batch must contain at least one pair");
    }
}

}

template<class DerivedV, class DerivedX>
SimilarityBlock<typename DerivedV::Scalar> similarities(const Eigen::MatrixBase<DerivedV>& h_v, const Eigen::MatrixBase<DerivedX>& h_x) {
    detail::check_pair(h_v, h_x, "similarities");
    SimilarityBlock<typename DerivedV::Scalar> output;
    output.cross = matmul_nt(h_x, h_v);
    output.img_internal = matmul_nt(h_v, h_v);
    output.expr_internal = matmul_nt(h_x, h_x);
    return output;
}

/**
 * Row-stochastic target `softmax(temperature * (img_internal + expr_internal) / 2)`.
 */
template<typename Scalar>
Matrix<Scalar> smoothed_targets(const SimilarityBlock<Scalar>& block, double temperature) {
    if (!(temperature > 0)) {
        throw ValidationError("smoothed_targets: temperature must be positive");
    }
    const auto& vv = block.img_internal;
    const auto& xx = block.expr_internal;
    if (vv.rows() != vv.cols() || xx.rows() != xx.cols() || vv.rows() != xx.rows() || block.cross.rows() != vv.rows() || block.cross.cols() != vv.cols()) {
        throw ShapeError("smoothed_targets: similarity blocks must all be BxB with the same B");
    }

    Matrix<double> averaged = (vv.template cast<double>() + xx.template cast<double>()) / 2.0;
    return row_softmax(averaged, temperature).template cast<Scalar>();
}

/**
 * Loss value and analytic gradients with respect to both embedding matrices.
 * The target is treated as a constant; no gradient flows through the internal similarities.
 */
template<class DerivedV, class DerivedX>
LossResult<typename DerivedV::Scalar> bleep_loss(const Eigen::MatrixBase<DerivedV>& h_v, const Eigen::MatrixBase<DerivedX>& h_x, const LossConfig& cfg) {
    using Scalar = typename DerivedV::Scalar;
    detail::check_pair(h_v, h_x, "bleep_loss");
    if (!(cfg.temperature > 0)) {
        throw ValidationError("bleep_loss: temperature must be positive");
    }

    const Index batch = h_v.rows();
    auto block = similarities(h_v, h_x);

    Matrix<double> target;
    if (cfg.objective == Objective::smoothed) {
        Matrix<double> averaged = (block.img_internal.template cast<double>() + block.expr_internal.template cast<double>()) / 2.0;
        target = row_softmax(averaged, cfg.temperature);
    } else {
        target = Matrix<double>::Identity(batch, batch);
    }

    Matrix<double> cross = block.cross.template cast<double>();
    Matrix<double> cross_t = cross.transpose();
    Matrix<double> target_t = target.transpose();

    auto logp_rows = row_log_softmax(cross);
    auto logp_cols = row_log_softmax(cross_t);

    double total = 0;
    for (Index i = 0; i < batch; ++i) {
        for (Index j = 0; j < batch; ++j) {
            if (target(i, j) > 0) {
                total -= target(i, j) * logp_rows(i, j);
            }
            if (target_t(i, j) > 0) {
                total -= target_t(i, j) * logp_cols(i, j);
            }
        }
    }

    const double norm = 2.0 * static_cast<double>(batch);
    LossResult<Scalar> output;
    output.loss = total / norm;

    // For a target row t and predicted row p, d ce / d logits = p * sum(t) - t.
    // Rows of T sum to one, but rows of T^T (columns of T) generally do not.
    Eigen::VectorXd col_mass = target_t.rowwise().sum();
    Matrix<double> grad_rows = logp_rows.array().exp().matrix() - target;
    Matrix<double> grad_cols = (logp_cols.array().exp().colwise() * col_mass.array()).matrix() - target_t;
    Matrix<double> grad_cross = (grad_rows + grad_cols.transpose()) / norm;

    output.grad_expression = matmul(grad_cross, h_v.template cast<double>()).template cast<Scalar>();
    output.grad_image = matmul_tn(grad_cross, h_x.template cast<double>()).template cast<Scalar>();
    return output;
}

}

#endif
