#include "bleep/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace bleep {

DenseMatrix scale_to_total(const DenseMatrix& raw_counts, double target_sum, const std::vector<std::string>* spot_ids) {
    if (!(target_sum > 0)) {
        throw ValidationError("normalize: target sum must be positive");
    }

    DenseMatrix output(raw_counts.rows(), raw_counts.cols());
    std::vector<std::string> offenders;
    for (Index r = 0; r < raw_counts.rows(); ++r) {
        double total = 0;
        for (Index c = 0; c < raw_counts.cols(); ++c) {
            double v = raw_counts(r, c);
            if (!(v >= 0) || !std::isfinite(v)) {
                throw ValidationError("normalize: row " + std::to_string(r) + " has a negative or non-finite count");
            }
            total += v;
        }
        if (total <= 0) {
            offenders.push_back(spot_ids && static_cast<Index>(spot_ids->size()) > r ? (*spot_ids)[static_cast<std::size_t>(r)] : std::to_string(r));
            continue;
        }
        double scale = target_sum / total;
        for (Index c = 0; c < raw_counts.cols(); ++c) {
            output(r, c) = static_cast<float>(raw_counts(r, c) * scale);
        }
    }

    if (!offenders.empty()) {
        std::string message = "normalize: zero total count for spots";
        for (const auto& o : offenders) {
            message += " " + o;
        }
        throw ValidationError(message);
    }
    return output;
}

DenseMatrix normalize(const DenseMatrix& raw_counts, double target_sum, const std::vector<std::string>* spot_ids) {
    DenseMatrix scaled = scale_to_total(raw_counts, target_sum, spot_ids);
    return scaled.unaryExpr([](float v) { return static_cast<float>(std::log1p(static_cast<double>(v))); });
}

DenseMatrix expm1_matrix(const DenseMatrix& normalized) {
    return normalized.unaryExpr([](float v) { return static_cast<float>(std::expm1(static_cast<double>(v))); });
}

HvgStatistics hvg_statistics(const DenseMatrix& values) {
    const Index n = values.rows(), ngenes = values.cols();
    HvgStatistics stats;
    stats.means.assign(static_cast<std::size_t>(ngenes), 0);
    stats.dispersions.assign(static_cast<std::size_t>(ngenes), 0);
    stats.zscores.assign(static_cast<std::size_t>(ngenes), 0);
    stats.bins.assign(static_cast<std::size_t>(ngenes), -1);
    stats.expressed.assign(static_cast<std::size_t>(ngenes), false);

    std::vector<double> variances(static_cast<std::size_t>(ngenes), 0);
    for (Index g = 0; g < ngenes; ++g) {
        auto gi = static_cast<std::size_t>(g);
        double total = 0;
        for (Index r = 0; r < n; ++r) {
            total += values(r, g);
        }
        double mean = n ? total / static_cast<double>(n) : 0.0;
        double ss = 0;
        for (Index r = 0; r < n; ++r) {
            double d = values(r, g) - mean;
            ss += d * d;
        }
        stats.means[gi] = mean;
        variances[gi] = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
        stats.expressed[gi] = mean > 0;
        stats.dispersions[gi] = mean > 0 ? variances[gi] / mean : 0.0;
    }

    std::vector<Index> expressed;
    for (Index g = 0; g < ngenes; ++g) {
        if (stats.expressed[static_cast<std::size_t>(g)]) {
            expressed.push_back(g);
        }
    }
    if (expressed.empty()) {
        return stats;
    }

    std::stable_sort(expressed.begin(), expressed.end(), [&](Index a, Index b) {
        return stats.means[static_cast<std::size_t>(a)] < stats.means[static_cast<std::size_t>(b)];
    });

    const auto nexpr = expressed.size();
    const std::size_t nbins = std::clamp<std::size_t>(nexpr / hvg_min_bin_size, 1, hvg_max_bins);
    std::vector<std::vector<Index>> members(nbins);
    for (std::size_t rank = 0; rank < nexpr; ++rank) {
        std::size_t bin = rank * nbins / nexpr;
        stats.bins[static_cast<std::size_t>(expressed[rank])] = static_cast<int>(bin);
        members[bin].push_back(expressed[rank]);
    }

    for (const auto& bin : members) {
        double total = 0;
        for (auto g : bin) {
            total += stats.dispersions[static_cast<std::size_t>(g)];
        }
        double mean = total / static_cast<double>(bin.size());
        double ss = 0;
        for (auto g : bin) {
            double d = stats.dispersions[static_cast<std::size_t>(g)] - mean;
            ss += d * d;
        }
        double sd = bin.size() > 1 ? std::sqrt(ss / static_cast<double>(bin.size() - 1)) : 0.0;
        for (auto g : bin) {
            auto gi = static_cast<std::size_t>(g);
            stats.zscores[gi] = sd > 0 ? (stats.dispersions[gi] - mean) / sd : 0.0;
        }
    }

    return stats;
}

GeneSet select_hvg(const DenseMatrix& values, Index n) {
    if (n < 0) {
        throw ValidationError("select_hvg: requested a negative number of genes");
    }
    auto stats = hvg_statistics(values);

    std::vector<Index> candidates;
    std::vector<bool> varying(stats.means.size(), false);
    for (Index g = 0; g < values.cols(); ++g) {
        auto gi = static_cast<std::size_t>(g);
        if (stats.expressed[gi]) {
            candidates.push_back(g);
            varying[gi] = stats.dispersions[gi] > 0;
        }
    }
    if (n > static_cast<Index>(candidates.size())) {
        throw ValidationError("select_hvg: requested " + std::to_string(n) + " genes but only " + std::to_string(candidates.size()) + " are expressed");
    }

    std::stable_sort(candidates.begin(), candidates.end(), [&](Index a, Index b) {
        auto ai = static_cast<std::size_t>(a), bi = static_cast<std::size_t>(b);
        if (varying[ai] != varying[bi]) {
            return static_cast<bool>(varying[ai]);
        }
        if (stats.zscores[ai] != stats.zscores[bi]) {
            return stats.zscores[ai] > stats.zscores[bi];
        }
        return a < b;
    });

    GeneSet output;
    output.label = GeneSetLabel::HVG;
    output.indices.assign(candidates.begin(), candidates.begin() + n);
    return output;
}

GeneSet hvg_union(const std::vector<GeneSet>& per_slice_sets, const std::vector<std::vector<std::string>>& gene_universes) {
    if (per_slice_sets.size() != gene_universes.size()) {
        throw ValidationError("hvg_union: " + std::to_string(per_slice_sets.size()) + " gene sets but " + std::to_string(gene_universes.size()) + " gene universes");
    }
    for (std::size_t i = 1; i < gene_universes.size(); ++i) {
        if (gene_universes[i] != gene_universes[0]) {
            throw ValidationError("hvg_union: slice " + std::to_string(i) + " uses a different gene universe than slice 0");
        }
    }

    std::set<Index> merged;
    for (std::size_t i = 0; i < per_slice_sets.size(); ++i) {
        per_slice_sets[i].validate(static_cast<Index>(gene_universes[i].size()));
        merged.insert(per_slice_sets[i].indices.begin(), per_slice_sets[i].indices.end());
    }

    GeneSet output;
    output.label = GeneSetLabel::HVG;
    output.indices.assign(merged.begin(), merged.end());
    return output;
}

GeneSet select_heg(const DenseMatrix& normalized, Index n) {
    if (n < 0 || n > normalized.cols()) {
        throw ValidationError("select_heg: requested " + std::to_string(n) + " genes out of " + std::to_string(normalized.cols()));
    }

    std::vector<double> means(static_cast<std::size_t>(normalized.cols()), 0);
    for (Index g = 0; g < normalized.cols(); ++g) {
        double total = 0;
        for (Index r = 0; r < normalized.rows(); ++r) {
            total += normalized(r, g);
        }
        means[static_cast<std::size_t>(g)] = normalized.rows() ? total / static_cast<double>(normalized.rows()) : 0.0;
    }

    std::vector<Index> order(static_cast<std::size_t>(normalized.cols()));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return means[static_cast<std::size_t>(a)] > means[static_cast<std::size_t>(b)];
    });

    GeneSet output;
    output.label = GeneSetLabel::HEG;
    output.indices.assign(order.begin(), order.begin() + n);
    return output;
}

std::vector<std::string> default_marker_genes() {
    return { "CYP3A4", "CYP1A2", "CYP2E1", "GLUL", "FABP1", "SLCO1B3" };
}

}
