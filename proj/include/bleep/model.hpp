#ifndef BLEEP_MODEL_HPP
#define BLEEP_MODEL_HPP

#include "contrastive.hpp"
#include "dataset.hpp"
#include "encoder.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

/**
 * @file model.hpp
 *
 * @brief Two-tower model (image-feature encoder and expression encoder) and its contrastive training loop.
 */

namespace bleep {

struct TrainConfig {
    Index batch_size = 512;
    double learning_rate = 1e-3;
    int epochs = 150;
    double temperature = 1.0;
    Objective objective = Objective::smoothed;
    std::uint64_t seed = 0;
    double weight_decay = 0.01;

    /** Hidden widths shared by both encoders. */
    std::vector<Index> hidden_dims{512};

    /** Width of the joint embedding space. */
    Index embedding_dim = 256;

    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct ModelCheckpoint {
    Mlp<float> image;
    Mlp<float> expression;
    TrainConfig config;

    /** Mean batch loss of each epoch. */
    std::vector<double> loss_trace;

    /** Non-fatal adjustments made during training, e.g. batch-size clamping. */
    std::vector<std::string> warnings;

    Index embedding_dim() const { return image.spec.output_dim; }

    /**
     * @throws ShapeError if either encoder's weights disagree with its spec or the output widths differ.
     */
    void validate() const;
};

/**
 * Embeds precomputed patch features with the image encoder.
 * @throws ShapeError naming the image encoder if `features.cols()` does not match its input width.
 */
DenseMatrix encode_image(const ModelCheckpoint& ckpt, const DenseMatrix& features);

DenseMatrix encode_expression(const ModelCheckpoint& ckpt, const DenseMatrix& expression);

/**
 * Fresh, seeded parameters for both encoders sized for `feature_dim` and `num_genes` inputs.
 * The image encoder is drawn first, then the expression encoder, from one engine seeded by `cfg.seed`.
 */
ModelCheckpoint initialize_model(Index feature_dim, Index num_genes, const TrainConfig& cfg);

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/**
 * Trains both encoders on `dataset` with the contrastive loss and AdamW.
 *
 * Each epoch shuffles spots with a seeded permutation and walks consecutive batches;
 * a trailing batch of a single spot is dropped.
 * If `cfg.batch_size` exceeds the number of spots it is clamped and a warning is recorded.
 * With one worker the returned checkpoint is bit-identical for identical inputs.
 *
 * @throws ValidationError for an empty dataset, fewer than two spots or an invalid configuration.
 * @throws ShapeError if features and expression have different row counts.
 * @throws NumericalError if a batch loss is not finite.
 */
ModelCheckpoint train(const PairedDataset& dataset, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}

#endif
