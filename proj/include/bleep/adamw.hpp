#ifndef BLEEP_ADAMW_HPP
#define BLEEP_ADAMW_HPP

#include "types.hpp"

#include <cmath>
#include <cstdint>

namespace bleep {

struct AdamWOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

/**
 * Moment estimates for one parameter matrix.
 */
template<typename Scalar>
struct AdamWState {
    AdamWState() = default;
    AdamWState(Index rows, Index cols, AdamWOptions opt = {}) :
        first(Matrix<Scalar>::Zero(rows, cols)), second(Matrix<Scalar>::Zero(rows, cols)), options(opt) {}

    Matrix<Scalar> first;
    Matrix<Scalar> second;
    std::uint64_t step = 0;
    AdamWOptions options;
};

/**
 * One AdamW update with decoupled weight decay and bias correction:
 * `param <- param * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps)`.
 *
 * @throws ShapeError if `param`, `grad` and the state moments disagree in shape.
 * @throws ValidationError if the learning rate is not positive.
 */
template<typename Scalar, class Derived>
void adamw_step(Matrix<Scalar>& param, const Eigen::MatrixBase<Derived>& grad, AdamWState<Scalar>& state) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
        throw ShapeError("adamw_step: parameter is " + shape_string(param) + " but gradient is " + shape_string(grad));
    }
    if (state.first.rows() != param.rows() || state.first.cols() != param.cols()
        || state.second.rows() != param.rows() || state.second.cols() != param.cols()) {
        throw ShapeError("adamw_step: optimizer state is " + shape_string(state.first) + " but parameter is " + shape_string(param));
    }

    const auto& opt = state.options;
    if (!(opt.learning_rate > 0)) {
        throw ValidationError("adamw_step: learning rate must be positive");
    }

    ++state.step;
    double t = static_cast<double>(state.step);
    double correction1 = 1.0 - std::pow(opt.beta1, t);
    double correction2 = 1.0 - std::pow(opt.beta2, t);
    double decay = 1.0 - opt.learning_rate * opt.weight_decay;

    for (Index r = 0; r < param.rows(); ++r) {
        for (Index c = 0; c < param.cols(); ++c) {
            double g = static_cast<double>(grad(r, c));
            double m = opt.beta1 * static_cast<double>(state.first(r, c)) + (1 - opt.beta1) * g;
            double v = opt.beta2 * static_cast<double>(state.second(r, c)) + (1 - opt.beta2) * g * g;
            state.first(r, c) = static_cast<Scalar>(m);
            state.second(r, c) = static_cast<Scalar>(v);

            double mhat = m / correction1;
            double vhat = v / correction2;
            double p = static_cast<double>(param(r, c)) * decay - opt.learning_rate * mhat / (std::sqrt(vhat) + opt.epsilon);
            param(r, c) = static_cast<Scalar>(p);
        }
    }
}

}

#endif
