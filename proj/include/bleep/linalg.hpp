#ifndef BLEEP_LINALG_HPP
#define BLEEP_LINALG_HPP

#include "types.hpp"
#include "parallel.hpp"

#include <cmath>
#include <string>

/**
 * @file linalg.hpp
 *
 * @brief Deterministic dense kernels: products with 64-bit accumulation, row-wise softmax and soft-target cross-entropy.
 */

namespace bleep {

/**
 * Matrix product `a * b`, accumulated in double precision and rounded back to the input scalar.
 * Rows of the output are distributed over `workers()`; with one worker the result is bit-exact across runs.
 *
 * @throws ShapeError if `a.cols() != b.rows()`.
 */
template<class DerivedA, class DerivedB>
Matrix<typename DerivedA::Scalar> matmul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    static_assert(std::is_same_v<Scalar, typename DerivedB::Scalar>, "matmul operands must share a scalar type");

    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: cannot multiply " + shape_string(a) + " by " + shape_string(b));
    }

    Matrix<double> left = a.template cast<double>();
    Matrix<double> right = b.template cast<double>();
    Matrix<Scalar> output(a.rows(), b.cols());
    if (output.size() == 0) {
        return output;
    }
    if (a.cols() == 0) {
        output.setZero();
        return output;
    }

    parallel_ranges(static_cast<std::size_t>(a.rows()), [&](std::size_t begin, std::size_t end) {
        Index len = static_cast<Index>(end - begin);
        Matrix<double> block = left.middleRows(static_cast<Index>(begin), len) * right;
        output.middleRows(static_cast<Index>(begin), len) = block.template cast<Scalar>();
    });
    return output;
}

/**
 * `a * b^T`, the shape of every similarity product.
 */
template<class DerivedA, class DerivedB>
Matrix<typename DerivedA::Scalar> matmul_nt(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt: cannot multiply " + shape_string(a) + " by the transpose of " + shape_string(b));
    }
    return matmul(a, b.transpose());
}

/**
 * `a^T * b`, used by weight gradients.
 */
template<class DerivedA, class DerivedB>
Matrix<typename DerivedA::Scalar> matmul_tn(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_tn: cannot multiply the transpose of " + shape_string(a) + " by " + shape_string(b));
    }
    return matmul(a.transpose(), b);
}

/**
 * Row-wise `softmax(scale * m)` with per-row max subtraction.
 */
template<class Derived>
Matrix<typename Derived::Scalar> row_softmax(const Eigen::MatrixBase<Derived>& m, double scale = 1.0) {
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> output(m.rows(), m.cols());
    for (Index r = 0; r < m.rows(); ++r) {
        if (m.cols() == 0) {
            continue;
        }
        double maxed = -INFINITY;
        for (Index c = 0; c < m.cols(); ++c) {
            maxed = std::max(maxed, scale * static_cast<double>(m(r, c)));
        }
        double total = 0;
        for (Index c = 0; c < m.cols(); ++c) {
            double e = std::exp(scale * static_cast<double>(m(r, c)) - maxed);
            output(r, c) = static_cast<Scalar>(e);
            total += e;
        }
        for (Index c = 0; c < m.cols(); ++c) {
            output(r, c) = static_cast<Scalar>(static_cast<double>(output(r, c)) / total);
        }
    }
    return output;
}

/**
 * Row-wise `log(softmax(m))` via log-sum-exp, never evaluating `log(0)`.
 */
template<class Derived>
Matrix<typename Derived::Scalar> row_log_softmax(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    Matrix<Scalar> output(m.rows(), m.cols());
    for (Index r = 0; r < m.rows(); ++r) {
        if (m.cols() == 0) {
            continue;
        }
        double maxed = -INFINITY;
        for (Index c = 0; c < m.cols(); ++c) {
            maxed = std::max(maxed, static_cast<double>(m(r, c)));
        }
        double total = 0;
        for (Index c = 0; c < m.cols(); ++c) {
            total += std::exp(static_cast<double>(m(r, c)) - maxed);
        }
        double lse = maxed + std::log(total);
        for (Index c = 0; c < m.cols(); ++c) {
            output(r, c) = static_cast<Scalar>(static_cast<double>(m(r, c)) - lse);
        }
    }
    return output;
}

/**
 * Per-row cross-entropy of `softmax(logits)` against row-stochastic `targets`:
 * `loss[i] = -sum_j targets(i, j) * log_softmax(logits)(i, j)`.
 *
 * @throws ShapeError if the shapes differ.
 * @throws ValidationError if a target row has negative entries or does not sum to 1 within 1e-5.
 */
template<class DerivedL, class DerivedT>
Vector<typename DerivedL::Scalar> soft_cross_entropy(const Eigen::MatrixBase<DerivedL>& logits, const Eigen::MatrixBase<DerivedT>& targets) {
    using Scalar = typename DerivedL::Scalar;
    if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
        throw ShapeError("soft_cross_entropy: logits are " + shape_string(logits) + " but targets are " + shape_string(targets));
    }

    for (Index r = 0; r < targets.rows(); ++r) {
        double total = 0;
        for (Index c = 0; c < targets.cols(); ++c) {
            double t = static_cast<double>(targets(r, c));
            if (!(t >= 0)) {
                throw ValidationError("soft_cross_entropy: target row " + std::to_string(r) + " has a negative or non-finite entry");
            }
            total += t;
        }
        if (std::abs(total - 1.0) > 1e-5) {
            throw ValidationError("soft_cross_entropy: target row " + std::to_string(r) + " sums to " + std::to_string(total) + ", not 1");
        }
    }

    auto logp = row_log_softmax(logits);
    Vector<Scalar> output(logits.rows());
    for (Index r = 0; r < logits.rows(); ++r) {
        double loss = 0;
        for (Index c = 0; c < logits.cols(); ++c) {
            double t = static_cast<double>(targets(r, c));
            if (t > 0) {
                loss -= t * static_cast<double>(logp(r, c));
            }
        }
        output[r] = static_cast<Scalar>(loss);
    }
    return output;
}

template<class Derived>
Matrix<typename Derived::Scalar> relu(const Eigen::MatrixBase<Derived>& m) {
    return m.cwiseMax(typename Derived::Scalar(0));
}

}

#endif
