#include "bleep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>

namespace bleep {

std::size_t GeneCorrelations::num_invalid() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), false));
}

namespace {

struct ColumnMoments {
    std::vector<double> mean;
    std::vector<double> ss;
};

ColumnMoments column_moments(const DenseMatrix& m) {
    ColumnMoments out;
    out.mean.assign(static_cast<std::size_t>(m.cols()), 0);
    out.ss.assign(static_cast<std::size_t>(m.cols()), 0);
    const double n = static_cast<double>(m.rows());
    for (Index c = 0; c < m.cols(); ++c) {
        double total = 0;
        for (Index r = 0; r < m.rows(); ++r) {
            total += m(r, c);
        }
        double mean = total / n;
        double ss = 0;
        for (Index r = 0; r < m.rows(); ++r) {
            double d = m(r, c) - mean;
            ss += d * d;
        }
        out.mean[static_cast<std::size_t>(c)] = mean;
        out.ss[static_cast<std::size_t>(c)] = ss;
    }
    return out;
}

double clamp_unit(double r) {
    return std::clamp(r, -1.0, 1.0);
}

// A column with sum of squares this small relative to its scale is treated as constant.
bool degenerate(double ss, double mean, Index n) {
    double scale = std::max(1.0, mean * mean) * static_cast<double>(n);
    return !(ss > 1e-24 * scale);
}

}

GeneCorrelations pearson_per_gene(const DenseMatrix& pred, const DenseMatrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw ShapeError("pearson_per_gene: prediction is " + shape_string(pred) + " but truth is " + shape_string(truth));
    }
    if (pred.rows() < 2) {
        throw ValidationError("pearson_per_gene: at least two rows are required");
    }

    auto pm = column_moments(pred);
    auto tm = column_moments(truth);
    GeneCorrelations out;
    out.r.assign(static_cast<std::size_t>(pred.cols()), 0);
    out.valid.assign(static_cast<std::size_t>(pred.cols()), false);

    for (Index c = 0; c < pred.cols(); ++c) {
        auto ci = static_cast<std::size_t>(c);
        if (degenerate(pm.ss[ci], pm.mean[ci], pred.rows()) || degenerate(tm.ss[ci], tm.mean[ci], truth.rows())) {
            continue;
        }
        double cross = 0;
        for (Index r = 0; r < pred.rows(); ++r) {
            cross += (pred(r, c) - pm.mean[ci]) * (truth(r, c) - tm.mean[ci]);
        }
        out.r[ci] = clamp_unit(cross / std::sqrt(pm.ss[ci] * tm.ss[ci]));
        out.valid[ci] = true;
    }
    return out;
}

SetAverage set_average(const GeneCorrelations& r, const GeneSet& set) {
    set.validate(static_cast<Index>(r.size()));
    SetAverage out;
    double total = 0;
    for (auto g : set.indices) {
        auto gi = static_cast<std::size_t>(g);
        if (r.valid[gi]) {
            total += r.r[gi];
            ++out.used;
        } else {
            ++out.excluded;
        }
    }
    if (out.used == 0) {
        throw ValidationError(std::string("set_average: gene set ") + gene_set_label_name(set.label) + " has no genes with a valid correlation");
    }
    out.mean = total / static_cast<double>(out.used);
    return out;
}

DenseMatrix ggc(const DenseMatrix& expr) {
    if (expr.rows() < 2) {
        throw ValidationError("ggc: at least two rows are required");
    }

    auto mom = column_moments(expr);
    const Index g = expr.cols();
    Matrix<double> centered(expr.rows(), g);
    std::vector<bool> valid(static_cast<std::size_t>(g));
    for (Index c = 0; c < g; ++c) {
        auto ci = static_cast<std::size_t>(c);
        valid[ci] = !degenerate(mom.ss[ci], mom.mean[ci], expr.rows());
        double scale = valid[ci] ? 1.0 / std::sqrt(mom.ss[ci]) : 0.0;
        for (Index r = 0; r < expr.rows(); ++r) {
            centered(r, c) = (expr(r, c) - mom.mean[ci]) * scale;
        }
    }

    Matrix<double> corr = centered.transpose() * centered;
    DenseMatrix out(g, g);
    for (Index i = 0; i < g; ++i) {
        for (Index j = i; j < g; ++j) {
            double v = 0;
            if (valid[static_cast<std::size_t>(i)] && valid[static_cast<std::size_t>(j)]) {
                v = i == j ? 1.0 : clamp_unit(corr(i, j));
            }
            out(i, j) = static_cast<float>(v);
            out(j, i) = static_cast<float>(v);
        }
    }
    return out;
}

MomentRatios moment_preservation(const DenseMatrix& pred, const DenseMatrix& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
        throw ShapeError("moment_preservation: prediction is " + shape_string(pred) + " but truth is " + shape_string(truth));
    }
    if (pred.rows() < 1) {
        throw ValidationError("moment_preservation: no rows");
    }

    auto pm = column_moments(pred);
    auto tm = column_moments(truth);
    const auto ngenes = static_cast<std::size_t>(pred.cols());
    MomentRatios out;
    out.mean_ratio.assign(ngenes, 0);
    out.var_ratio.assign(ngenes, 0);
    out.mean_valid.assign(ngenes, false);
    out.var_valid.assign(ngenes, false);

    for (std::size_t c = 0; c < ngenes; ++c) {
        if (tm.mean[c] != 0) {
            out.mean_ratio[c] = pm.mean[c] / tm.mean[c];
            out.mean_valid[c] = true;
        }
        if (!degenerate(tm.ss[c], tm.mean[c], truth.rows())) {
            out.var_ratio[c] = pm.ss[c] / tm.ss[c];
            out.var_valid[c] = true;
        }
    }
    return out;
}

KMeansResult kmeans_fit(const DenseMatrix& rows, int k, std::uint64_t seed) {
    const Index n = rows.rows();
    if (k < 1 || k > n) {
        throw ValidationError("kmeans: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }

    Matrix<double> data = rows.cast<double>();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    KMeansResult out;
    out.centers.resize(k, data.cols());

    // k-means++ seeding.
    std::vector<double> closest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    Index first = std::min<Index>(n - 1, static_cast<Index>(unif(rng) * static_cast<double>(n)));
    for (int c = 0; c < k; ++c) {
        Index pick = first;
        if (c > 0) {
            double total = 0;
            for (auto d : closest) {
                total += d;
            }
            pick = -1;
            if (total > 0) {
                double target = unif(rng) * total, running = 0;
                for (Index i = 0; i < n; ++i) {
                    running += closest[static_cast<std::size_t>(i)];
                    if (closest[static_cast<std::size_t>(i)] > 0 && running >= target) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0) {
                    for (Index i = n; i-- > 0;) {
                        if (closest[static_cast<std::size_t>(i)] > 0) {
                            pick = i;
                            break;
                        }
                    }
                }
            }
            if (pick < 0) {
                // All remaining points coincide with a center.
                for (Index i = 0; i < n; ++i) {
                    if (!chosen[static_cast<std::size_t>(i)]) {
                        pick = i;
                        break;
                    }
                }
            }
        }
        chosen[static_cast<std::size_t>(pick)] = true;
        out.centers.row(c) = data.row(pick);
        for (Index i = 0; i < n; ++i) {
            double d = (data.row(i) - out.centers.row(c)).squaredNorm();
            auto ii = static_cast<std::size_t>(i);
            closest[ii] = std::min(closest[ii], d);
        }
    }

    out.labels.assign(static_cast<std::size_t>(n), 0);
    auto assign = [&]() {
        for (Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = (data.row(i) - out.centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            out.labels[static_cast<std::size_t>(i)] = best;
        }
    };

    assign();
    for (int iter = 0; iter < kmeans_max_iterations; ++iter) {
        Matrix<double> sums = Matrix<double>::Zero(k, data.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            int l = out.labels[static_cast<std::size_t>(i)];
            sums.row(l) += data.row(i);
            ++counts[static_cast<std::size_t>(l)];
        }

        double moved = 0;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                continue;
            }
            RowVector<double> updated = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            moved = std::max(moved, (updated - out.centers.row(c)).norm());
            out.centers.row(c) = updated;
        }

        out.iterations = iter + 1;
        assign();
        if (moved < kmeans_tolerance) {
            break;
        }
    }

    return out;
}

namespace {

double choose2(double x) {
    return x * (x - 1) / 2;
}

std::vector<int> compact(const std::vector<int>& labels, int& count) {
    std::unordered_map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (auto l : labels) {
        auto it = remap.emplace(l, static_cast<int>(remap.size())).first;
        out.push_back(it->second);
    }
    count = static_cast<int>(remap.size());
    return out;
}

}

Agreement cluster_agreement(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("cluster_agreement: labelings have lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    Agreement out;
    const double n = static_cast<double>(a.size());
    if (a.empty()) {
        out.ari = 1;
        out.nmi = 1;
        return out;
    }

    int na = 0, nb = 0;
    auto ca = compact(a, na);
    auto cb = compact(b, nb);

    std::vector<double> table(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb), 0);
    std::vector<double> rows(static_cast<std::size_t>(na), 0), cols(static_cast<std::size_t>(nb), 0);
    for (std::size_t i = 0; i < ca.size(); ++i) {
        table[static_cast<std::size_t>(ca[i]) * static_cast<std::size_t>(nb) + static_cast<std::size_t>(cb[i])] += 1;
        rows[static_cast<std::size_t>(ca[i])] += 1;
        cols[static_cast<std::size_t>(cb[i])] += 1;
    }

    double index = 0, sum_rows = 0, sum_cols = 0;
    for (auto v : table) {
        index += choose2(v);
    }
    for (auto v : rows) {
        sum_rows += choose2(v);
    }
    for (auto v : cols) {
        sum_cols += choose2(v);
    }
    double pairs = choose2(n);
    double expected = pairs > 0 ? sum_rows * sum_cols / pairs : 0;
    double maximum = (sum_rows + sum_cols) / 2;
    double denom = maximum - expected;
    out.ari = denom == 0 ? 1.0 : (index - expected) / denom;

    double ha = 0, hb = 0, mi = 0;
    for (auto v : rows) {
        ha -= (v / n) * std::log(v / n);
    }
    for (auto v : cols) {
        hb -= (v / n) * std::log(v / n);
    }
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            double v = table[static_cast<std::size_t>(i) * static_cast<std::size_t>(nb) + static_cast<std::size_t>(j)];
            if (v > 0) {
                mi += (v / n) * std::log(v * n / (rows[static_cast<std::size_t>(i)] * cols[static_cast<std::size_t>(j)]));
            }
        }
    }

    if (ha == 0 && hb == 0) {
        out.nmi = 1.0;
    } else {
        out.nmi = std::clamp(mi / ((ha + hb) / 2), 0.0, 1.0);
    }
    return out;
}

ReplicateSummary summarize_replicates(const std::vector<double>& values) {
    ReplicateSummary out;
    if (values.empty()) {
        return out;
    }
    for (auto v : values) {
        out.mean += v;
    }
    out.mean /= static_cast<double>(values.size());
    for (auto v : values) {
        out.max_deviation = std::max(out.max_deviation, std::abs(v - out.mean));
    }
    return out;
}

MetricsReport evaluate(const DenseMatrix& pred, const DenseMatrix& truth, const std::vector<NamedGeneSet>& sets, const EvaluateOptions& options) {
    MetricsReport out;
    out.per_gene_r = pearson_per_gene(pred, truth);
    for (const auto& named : sets) {
        named.set.validate(pred.cols());
        bool any = false;
        for (auto g : named.set.indices) {
            any = any || out.per_gene_r.valid[static_cast<std::size_t>(g)];
        }
        if (any) {
            out.set_averages[named.name] = set_average(out.per_gene_r, named.set);
        }
    }

    out.moments = moment_preservation(pred, truth);

    if (options.ggc_set < sets.size()) {
        out.ggc_genes = sets[options.ggc_set].set.indices;
    } else {
        for (Index g = 0; g < pred.cols(); ++g) {
            out.ggc_genes.push_back(g);
        }
    }
    DenseMatrix pred_sub(pred.rows(), static_cast<Index>(out.ggc_genes.size()));
    DenseMatrix truth_sub(truth.rows(), static_cast<Index>(out.ggc_genes.size()));
    for (std::size_t i = 0; i < out.ggc_genes.size(); ++i) {
        pred_sub.col(static_cast<Index>(i)) = pred.col(out.ggc_genes[i]);
        truth_sub.col(static_cast<Index>(i)) = truth.col(out.ggc_genes[i]);
    }
    out.ggc_pred = ggc(pred_sub);
    out.ggc_truth = ggc(truth_sub);

    out.clusters = std::min<int>(options.clusters, static_cast<int>(pred.rows()));
    auto pl = kmeans(pred, out.clusters, options.seed);
    auto tl = kmeans(truth, out.clusters, options.seed);
    out.pred_clusters_used = static_cast<int>(std::set<int>(pl.begin(), pl.end()).size());
    out.truth_clusters_used = static_cast<int>(std::set<int>(tl.begin(), tl.end()).size());
    out.clustering = cluster_agreement(pl, tl);
    return out;
}

}
