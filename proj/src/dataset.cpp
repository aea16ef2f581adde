#include "bleep/dataset.hpp"

#include <unordered_map>
#include <unordered_set>

namespace bleep {

void PairedDataset::validate() const {
    const Index n = features.rows();
    if (expression.rows() != n) {
        throw ShapeError("dataset: features have " + std::to_string(n) + " rows but expression has " + std::to_string(expression.rows()));
    }
    if (static_cast<Index>(spot_ids.size()) != n) {
        throw ShapeError("dataset: " + std::to_string(spot_ids.size()) + " spot ids for " + std::to_string(n) + " spots");
    }
    if (static_cast<Index>(gene_names.size()) != expression.cols()) {
        throw ShapeError("dataset: " + std::to_string(gene_names.size()) + " gene names for " + std::to_string(expression.cols()) + " expression columns");
    }
    if (coords && (coords->rows() != n || coords->cols() != 2)) {
        throw ShapeError("dataset: coordinates are " + shape_string(*coords) + ", expected " + std::to_string(n) + "x2");
    }

    std::unordered_set<std::string> seen;
    for (const auto& g : gene_names) {
        if (!seen.insert(g).second) {
            throw ValidationError("dataset: duplicate gene name '" + g + "'");
        }
    }
}

PairedDataset PairedDataset::subset(const std::vector<Index>& rows) const {
    PairedDataset output;
    output.gene_names = gene_names;
    output.features.resize(static_cast<Index>(rows.size()), features.cols());
    output.expression.resize(static_cast<Index>(rows.size()), expression.cols());
    if (coords) {
        output.coords = DenseMatrix(static_cast<Index>(rows.size()), 2);
    }
    output.spot_ids.reserve(rows.size());

    for (std::size_t i = 0; i < rows.size(); ++i) {
        Index r = rows[i];
        if (r < 0 || r >= features.rows()) {
            throw ValidationError("dataset: subset row " + std::to_string(r) + " out of range");
        }
        Index o = static_cast<Index>(i);
        output.features.row(o) = features.row(r);
        output.expression.row(o) = expression.row(r);
        if (coords) {
            output.coords->row(o) = coords->row(r);
        }
        output.spot_ids.push_back(spot_ids[static_cast<std::size_t>(r)]);
    }
    return output;
}

const char* gene_set_label_name(GeneSetLabel label) {
    switch (label) {
        case GeneSetLabel::MG: return "MG";
        case GeneSetLabel::HEG: return "HEG";
        case GeneSetLabel::HVG: return "HVG";
        case GeneSetLabel::custom: return "custom";
    }
    return "custom";
}

void GeneSet::validate(Index num_genes) const {
    std::unordered_set<Index> seen;
    for (auto i : indices) {
        if (i < 0 || i >= num_genes) {
            throw ValidationError("gene set: index " + std::to_string(i) + " outside [0, " + std::to_string(num_genes) + ")");
        }
        if (!seen.insert(i).second) {
            throw ValidationError("gene set: index " + std::to_string(i) + " repeated");
        }
    }
}

GeneSet gene_set_from_names(GeneSetLabel label, const std::vector<std::string>& names, const std::vector<std::string>& gene_names, std::vector<std::string>* missing) {
    std::unordered_map<std::string, Index> lookup;
    for (std::size_t g = 0; g < gene_names.size(); ++g) {
        lookup.emplace(gene_names[g], static_cast<Index>(g));
    }

    GeneSet output;
    output.label = label;
    std::unordered_set<Index> seen;
    for (const auto& name : names) {
        auto it = lookup.find(name);
        if (it == lookup.end()) {
            if (missing) {
                missing->push_back(name);
                continue;
            }
            throw ValidationError("gene set: unknown gene '" + name + "'");
        }
        if (seen.insert(it->second).second) {
            output.indices.push_back(it->second);
        }
    }
    return output;
}

std::vector<std::string> gene_set_names(const GeneSet& set, const std::vector<std::string>& gene_names) {
    std::vector<std::string> output;
    output.reserve(set.indices.size());
    for (auto i : set.indices) {
        output.push_back(gene_names.at(static_cast<std::size_t>(i)));
    }
    return output;
}

}
