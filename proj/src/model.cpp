#include "bleep/model.hpp"
#include "bleep/adamw.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace bleep {

void TrainConfig::validate() const {
    if (batch_size < 2) {
        throw ValidationError("train: batch size must be at least 2");
    }
    if (epochs < 1) {
        throw ValidationError("train: epochs must be at least 1");
    }
    if (!(learning_rate > 0)) {
        throw ValidationError("train: learning rate must be positive");
    }
    if (!(temperature > 0)) {
        throw ValidationError("train: temperature must be positive");
    }
    if (!(weight_decay >= 0)) {
        throw ValidationError("train: weight decay must be non-negative");
    }
    if (embedding_dim < 1) {
        throw ValidationError("train: embedding dimension must be at least 1");
    }
}

void ModelCheckpoint::validate() const {
    image.check_consistent("image");
    expression.check_consistent("expression");
    if (image.spec.output_dim != expression.spec.output_dim) {
        throw ShapeError("checkpoint: image encoder emits " + std::to_string(image.spec.output_dim) + " dims but expression encoder emits " + std::to_string(expression.spec.output_dim));
    }
}

DenseMatrix encode_image(const ModelCheckpoint& ckpt, const DenseMatrix& features) {
    return forward(ckpt.image, features, "image");
}

DenseMatrix encode_expression(const ModelCheckpoint& ckpt, const DenseMatrix& expression) {
    return forward(ckpt.expression, expression, "expression");
}

ModelCheckpoint initialize_model(Index feature_dim, Index num_genes, const TrainConfig& cfg) {
    EncoderSpec img{feature_dim, cfg.hidden_dims, cfg.embedding_dim};
    EncoderSpec expr{num_genes, cfg.hidden_dims, cfg.embedding_dim};
    img.validate("image");
    expr.validate("expression");

    std::mt19937_64 rng(cfg.seed);
    ModelCheckpoint output;
    output.image = Mlp<float>::he_uniform(img, rng);
    output.expression = Mlp<float>::he_uniform(expr, rng);
    output.config = cfg;
    return output;
}

namespace {

struct EncoderOptimizer {
    std::vector<AdamWState<float>> weights;
    std::vector<AdamWState<float>> biases;

    EncoderOptimizer(const Mlp<float>& net, const AdamWOptions& opt) {
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            weights.emplace_back(net.weights[l].rows(), net.weights[l].cols(), opt);
            biases.emplace_back(net.biases[l].rows(), net.biases[l].cols(), opt);
        }
    }

    void step(Mlp<float>& net, const MlpGradients<float>& grads) {
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            adamw_step(net.weights[l], grads.weights[l], weights[l]);
            adamw_step(net.biases[l], grads.biases[l], biases[l]);
        }
    }
};

DenseMatrix gather_rows(const DenseMatrix& source, const std::vector<Index>& order, std::size_t begin, std::size_t end) {
    DenseMatrix output(static_cast<Index>(end - begin), source.cols());
    for (std::size_t i = begin; i < end; ++i) {
        output.row(static_cast<Index>(i - begin)) = source.row(order[i]);
    }
    return output;
}

}

ModelCheckpoint train(const PairedDataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    if (dataset.features.rows() == 0) {
        throw ValidationError("train: dataset is empty");
    }
    if (dataset.features.rows() != dataset.expression.rows()) {
        throw ShapeError("train: features have " + std::to_string(dataset.features.rows()) + " rows but expression has " + std::to_string(dataset.expression.rows()));
    }
    const Index n = dataset.features.rows();
    if (n < 2) {
        throw ValidationError("train: at least two spots are required");
    }

    auto ckpt = initialize_model(dataset.features.cols(), dataset.expression.cols(), cfg);

    Index batch = cfg.batch_size;
    if (batch > n) {
        ckpt.warnings.push_back("batch_size " + std::to_string(batch) + " clamped to " + std::to_string(n) + " (number of spots)");
        batch = n;
        ckpt.config.batch_size = batch;
    }

    AdamWOptions opt;
    opt.learning_rate = cfg.learning_rate;
    opt.weight_decay = cfg.weight_decay;
    EncoderOptimizer img_opt(ckpt.image, opt), expr_opt(ckpt.expression, opt);

    LossConfig loss_cfg{cfg.temperature, cfg.objective};

    // Separate engine from initialization so that the shuffle stream does not depend on model size.
    std::mt19937_64 shuffler(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Index> order(static_cast<std::size_t>(n));

    ForwardCache<float> img_cache, expr_cache;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), Index(0));
        std::shuffle(order.begin(), order.end(), shuffler);

        double total = 0;
        int count = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
            if (end - start < 2) {
                continue;
            }

            auto feats = gather_rows(dataset.features, order, start, end);
            auto expr = gather_rows(dataset.expression, order, start, end);

            auto h_v = forward_cached(ckpt.image, feats, img_cache, "image");
            auto h_x = forward_cached(ckpt.expression, expr, expr_cache, "expression");
            auto result = bleep_loss(h_v, h_x, loss_cfg);
            if (!std::isfinite(result.loss) || !result.grad_image.allFinite() || !result.grad_expression.allFinite()) {
                throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(count + 1));
            }

            auto img_grads = backward(ckpt.image, img_cache, result.grad_image);
            auto expr_grads = backward(ckpt.expression, expr_cache, result.grad_expression);
            img_opt.step(ckpt.image, img_grads);
            expr_opt.step(ckpt.expression, expr_grads);

            total += result.loss;
            ++count;
        }

        double mean = count ? total / count : 0.0;
        ckpt.loss_trace.push_back(mean);
        if (on_epoch) {
            on_epoch(epoch + 1, mean);
        }
    }

    return ckpt;
}

}
