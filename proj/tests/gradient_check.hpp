#ifndef BLEEP_TEST_GRADIENT_CHECK_HPP
#define BLEEP_TEST_GRADIENT_CHECK_HPP

// Finite-difference check of the contrastive loss gradients, shared by the unit tests and the acceptance report.

#include "bleep/contrastive.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace gradient_check {

using namespace bleep;

struct Instance {
    Index batch = 0;
    Index width = 0;
    Objective objective = Objective::smoothed;
    double temperature = 1.0;
    double loss_gap = 0;
    double image_error = 0;
    double expression_error = 0;
};

/**
 * Loss with the target frozen at `target`, written out element by element.
 * The analytic gradient treats the target as a constant, so this is the function it differentiates.
 */
inline double frozen_loss(const Matrix<double>& v, const Matrix<double>& x, const Matrix<double>& target) {
    const Index b = v.rows();
    Matrix<double> s = x * v.transpose();
    double total = 0;
    for (Index i = 0; i < b; ++i) {
        double rmax = s.row(i).maxCoeff(), cmax = s.col(i).maxCoeff();
        double rsum = 0, csum = 0;
        for (Index j = 0; j < b; ++j) {
            rsum += std::exp(s(i, j) - rmax);
            csum += std::exp(s(j, i) - cmax);
        }
        for (Index j = 0; j < b; ++j) {
            total -= target(i, j) * (s(i, j) - rmax - std::log(rsum));
            total -= target(j, i) * (s(j, i) - cmax - std::log(csum));
        }
    }
    return total / (2.0 * static_cast<double>(b));
}

/**
 * Runs `per_mode` random instances for each objective, cycling B over {2, 4, 8} and h over {3, 16}.
 * Inputs are drawn as 32-bit floats and promoted to 64-bit; central differences use step 1e-3.
 */
inline std::vector<Instance> run(int per_mode, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Index batches[] = {2, 4, 8};
    const Index widths[] = {3, 16};
    std::vector<Instance> out;
    for (auto objective : {Objective::smoothed, Objective::one_hot}) {
        for (int trial = 0; trial < per_mode; ++trial) {
            Instance inst;
            inst.batch = batches[trial % 3];
            inst.width = widths[(trial / 3) % 2];
            inst.objective = objective;
            inst.temperature = (trial % 4 == 0) ? 0.5 : 1.0;
            LossConfig cfg{inst.temperature, objective};

            Matrix<double> hv = oracle::random_matrix<float>(inst.batch, inst.width, rng, 0.7).cast<double>();
            Matrix<double> hx = oracle::random_matrix<float>(inst.batch, inst.width, rng, 0.7).cast<double>();
            auto analytic = bleep_loss(hv, hx, cfg);

            Matrix<double> target = objective == Objective::smoothed ? smoothed_targets(similarities(hv, hx), inst.temperature)
                                                                     : Matrix<double>::Identity(inst.batch, inst.batch);
            inst.loss_gap = std::abs(frozen_loss(hv, hx, target) - analytic.loss);
            auto num_v = oracle::finite_difference([&](const Matrix<double>& v) { return frozen_loss(v, hx, target); }, hv, 1e-3);
            auto num_x = oracle::finite_difference([&](const Matrix<double>& x) { return frozen_loss(hv, x, target); }, hx, 1e-3);
            inst.image_error = oracle::relative_error(analytic.grad_image, num_v);
            inst.expression_error = oracle::relative_error(analytic.grad_expression, num_x);
            out.push_back(inst);
        }
    }
    return out;
}

}

#endif
