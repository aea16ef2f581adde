#ifndef BLEEP_ENCODER_HPP
#define BLEEP_ENCODER_HPP

#include "linalg.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

/**
 * @file encoder.hpp
 *
 * @brief Fully connected encoder (affine + rectifier per hidden layer, final affine) with a hand-written backward pass.
 */

namespace bleep {

struct EncoderSpec {
    Index input_dim = 0;
    std::vector<Index> hidden_dims{512};
    Index output_dim = 256;

    void validate(const std::string& name) const {
        if (input_dim < 1 || output_dim < 1) {
            throw ValidationError(name + " encoder: input and output dimensions must be at least 1");
        }
        for (auto h : hidden_dims) {
            if (h < 1) {
                throw ValidationError(name + " encoder: hidden dimensions must be at least 1");
            }
        }
    }

    /** Layer widths from input to output, inclusive. */
    std::vector<Index> widths() const {
        std::vector<Index> output{input_dim};
        output.insert(output.end(), hidden_dims.begin(), hidden_dims.end());
        output.push_back(output_dim);
        return output;
    }

    bool operator==(const EncoderSpec&) const = default;
};

/**
 * Weights of one encoder. Layer `l` maps `x` to `x * weights[l] + biases[l]`;
 * `weights[l]` is `in x out` and `biases[l]` is `1 x out`.
 */
template<typename Scalar>
struct Mlp {
    EncoderSpec spec;
    std::vector<Matrix<Scalar>> weights;
    std::vector<Matrix<Scalar>> biases;

    std::size_t num_layers() const { return weights.size(); }

    /** Zero-initialized parameters with the shapes implied by `spec`. */
    static Mlp zeros(const EncoderSpec& spec) {
        Mlp output;
        output.spec = spec;
        auto w = spec.widths();
        for (std::size_t l = 0; l + 1 < w.size(); ++l) {
            output.weights.push_back(Matrix<Scalar>::Zero(w[l], w[l + 1]));
            output.biases.push_back(Matrix<Scalar>::Zero(1, w[l + 1]));
        }
        return output;
    }

    /**
     * He-style fan-in uniform initialization, `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))` for weights and zero biases.
     */
    template<class Engine>
    static Mlp he_uniform(const EncoderSpec& spec, Engine& rng) {
        auto output = zeros(spec);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (auto& w : output.weights) {
            double bound = std::sqrt(6.0 / static_cast<double>(w.rows()));
            for (Index r = 0; r < w.rows(); ++r) {
                for (Index c = 0; c < w.cols(); ++c) {
                    w(r, c) = static_cast<Scalar>(bound * unif(rng));
                }
            }
        }
        return output;
    }

    template<typename Other>
    Mlp<Other> cast() const {
        Mlp<Other> output;
        output.spec = spec;
        for (const auto& w : weights) {
            output.weights.push_back(w.template cast<Other>());
        }
        for (const auto& b : biases) {
            output.biases.push_back(b.template cast<Other>());
        }
        return output;
    }

    void check_consistent(const std::string& name) const {
        auto w = spec.widths();
        if (weights.size() + 1 != w.size() || biases.size() != weights.size()) {
            throw ShapeError(name + " encoder: expected " + std::to_string(w.size() - 1) + " layers, found " + std::to_string(weights.size()));
        }
        for (std::size_t l = 0; l < weights.size(); ++l) {
            if (weights[l].rows() != w[l] || weights[l].cols() != w[l + 1] || biases[l].rows() != 1 || biases[l].cols() != w[l + 1]) {
                throw ShapeError(name + " encoder: layer " + std::to_string(l) + " has weights " + shape_string(weights[l]) + " and bias " + shape_string(biases[l]));
            }
        }
    }
};

/**
 * Per-layer inputs and pre-activations saved by `forward_cached()` for the backward pass.
 */
template<typename Scalar>
struct ForwardCache {
    std::vector<Matrix<Scalar>> inputs;
    std::vector<Matrix<Scalar>> preactivations;
};

template<typename Scalar>
struct MlpGradients {
    std::vector<Matrix<Scalar>> weights;
    std::vector<Matrix<Scalar>> biases;
    Matrix<Scalar> input;
};

namespace detail {

template<typename Scalar>
Matrix<Scalar> affine(const Matrix<Scalar>& x, const Matrix<Scalar>& w, const Matrix<Scalar>& b) {
    Matrix<Scalar> z = matmul(x, w);
    z.rowwise() += b.row(0);
    return z;
}

}

template<typename Scalar>
Matrix<Scalar> forward_cached(const Mlp<Scalar>& net, const Matrix<Scalar>& x, ForwardCache<Scalar>& cache, const std::string& name = "encoder") {
    if (x.cols() != net.spec.input_dim) {
        throw ShapeError(name + " encoder expects " + std::to_string(net.spec.input_dim) + " input columns, got " + std::to_string(x.cols()));
    }
    cache.inputs.clear();
    cache.preactivations.clear();

    Matrix<Scalar> current = x;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        cache.inputs.push_back(current);
        Matrix<Scalar> z = detail::affine(current, net.weights[l], net.biases[l]);
        bool last = (l + 1 == net.num_layers());
        current = last ? z : relu(z);
        cache.preactivations.push_back(std::move(z));
    }
    return current;
}

template<typename Scalar>
Matrix<Scalar> forward(const Mlp<Scalar>& net, const Matrix<Scalar>& x, const std::string& name = "encoder") {
    if (x.cols() != net.spec.input_dim) {
        throw ShapeError(name + " encoder expects " + std::to_string(net.spec.input_dim) + " input columns, got " + std::to_string(x.cols()));
    }
    Matrix<Scalar> current = x;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix<Scalar> z = detail::affine(current, net.weights[l], net.biases[l]);
        current = (l + 1 == net.num_layers()) ? std::move(z) : relu(z);
    }
    return current;
}

/**
 * Gradients of a scalar objective with respect to every parameter, given its gradient `grad_output` at the encoder output.
 * Uses the subgradient 0 for the rectifier at exactly 0.
 */
template<typename Scalar>
MlpGradients<Scalar> backward(const Mlp<Scalar>& net, const ForwardCache<Scalar>& cache, const Matrix<Scalar>& grad_output, bool want_input = false) {
    const std::size_t layers = net.num_layers();
    MlpGradients<Scalar> output;
    output.weights.resize(layers);
    output.biases.resize(layers);

    Matrix<Scalar> grad = grad_output;
    for (std::size_t i = layers; i-- > 0;) {
        output.weights[i] = matmul_tn(cache.inputs[i], grad);
        output.biases[i] = grad.template cast<double>().colwise().sum().template cast<Scalar>();

        if (i == 0 && !want_input) {
            break;
        }
        Matrix<Scalar> upstream = matmul_nt(grad, net.weights[i]);
        if (i > 0) {
            const auto& z = cache.preactivations[i - 1];
            upstream = (z.array() > Scalar(0)).select(upstream, Scalar(0));
            grad = std::move(upstream);
        } else {
            output.input = std::move(upstream);
        }
    }
    return output;
}

}

#endif
