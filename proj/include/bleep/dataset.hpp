#ifndef BLEEP_DATASET_HPP
#define BLEEP_DATASET_HPP

#include "types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bleep {

/**
 * Spot-aligned pairing of image-patch features with expression profiles.
 * Row `i` of every matrix describes the spot `spot_ids[i]`.
 */
struct PairedDataset {
    DenseMatrix features;
    DenseMatrix expression;
    std::vector<std::string> gene_names;
    std::vector<std::string> spot_ids;
    std::optional<DenseMatrix> coords;

    Index num_spots() const { return features.rows(); }
    Index num_genes() const { return expression.cols(); }

    /**
     * @throws ShapeError if row counts disagree or name lists have the wrong length.
     * @throws ValidationError if gene names are not unique.
     */
    void validate() const;

    /**
     * Copy of the spots at `rows`, in that order.
     */
    PairedDataset subset(const std::vector<Index>& rows) const;
};

enum class GeneSetLabel {
    MG,
    HEG,
    HVG,
    custom
};

const char* gene_set_label_name(GeneSetLabel label);

struct GeneSet {
    GeneSetLabel label = GeneSetLabel::custom;
    std::vector<Index> indices;

    /**
     * @throws ValidationError on out-of-range or repeated indices.
     */
    void validate(Index num_genes) const;
};

/**
 * Builds a gene set by looking up names in `gene_names`.
 * Unknown names are collected in `missing` when supplied, otherwise they raise a `ValidationError`.
 */
GeneSet gene_set_from_names(GeneSetLabel label, const std::vector<std::string>& names, const std::vector<std::string>& gene_names, std::vector<std::string>* missing = nullptr);

std::vector<std::string> gene_set_names(const GeneSet& set, const std::vector<std::string>& gene_names);

}

#endif
