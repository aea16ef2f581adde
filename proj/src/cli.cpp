#include "bleep/cli.hpp"
#include "bleep/io.hpp"
#include "bleep/metrics.hpp"
#include "bleep/parallel.hpp"
#include "bleep/preprocess.hpp"
#include "bleep/refindex.hpp"
#include "bleep/synthgen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace bleep::cli {

using json = nlohmann::json;

namespace {

/*****************
 *** synth ***
 *****************/

struct SynthArgs {
    std::string config;
    std::string out;
};

SynthConfig synth_config_from_json(const json& j, Index& n_query) {
    if (!j.contains("seed")) {
        throw ValidationError("synth: config must set 'seed'");
    }
    SynthConfig cfg;
    cfg.n_spots = j.value("n_spots", cfg.n_spots);
    cfg.n_genes = j.value("n_genes", cfg.n_genes);
    cfg.n_zonated = j.value("n_zonated", cfg.n_zonated);
    cfg.d_img = j.value("d_img", cfg.d_img);
    cfg.expression_noise = j.value("expression_noise", cfg.expression_noise);
    cfg.feature_noise = j.value("feature_noise", cfg.feature_noise);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.noiseless = j.value("noiseless", cfg.noiseless);
    cfg.seed = j.at("seed").get<std::uint64_t>();
    n_query = j.value("n_query", Index(0));
    if (n_query < 0) {
        throw ValidationError("synth: n_query must be non-negative");
    }
    return cfg;
}

json synth_config_to_json(const SynthConfig& cfg, Index n_query) {
    return json{
        {"n_spots", cfg.n_spots}, {"n_query", n_query}, {"n_genes", cfg.n_genes}, {"n_zonated", cfg.n_zonated},
        {"d_img", cfg.d_img}, {"expression_noise", cfg.expression_noise}, {"feature_noise", cfg.feature_noise},
        {"dropout", cfg.dropout}, {"noiseless", cfg.noiseless}, {"seed", cfg.seed}
    };
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void run_synth(const SynthArgs& args, std::ostream& out) {
    auto j = parse_json_file(args.config);
    Index n_query = 0;
    SynthConfig cfg;
    try {
        cfg = synth_config_from_json(j, n_query);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("synth: bad config: ") + e.what());
    }

    // Reference and query spots come from one draw so that they share gene programs and feature mixing.
    SynthConfig total = cfg;
    total.n_spots = cfg.n_spots + n_query;
    auto result = generate(total);

    fs::path dir(args.out);
    std::vector<Index> ref_rows, query_rows;
    for (Index i = 0; i < total.n_spots; ++i) {
        (i < cfg.n_spots ? ref_rows : query_rows).push_back(i);
    }

    Preprocessing raw;
    auto emit = [&](const std::string& split, const std::vector<Index>& rows) {
        auto data = result.dataset.subset(rows);
        auto manifest = write_dataset(dir / split, data, raw, split);
        write_ground_truth(dir / split / "truth", subset_truth(result.truth, rows), data.gene_names);
        out << split << " " << manifest.string() << "\n";
    };
    emit("reference", ref_rows);
    if (n_query > 0) {
        emit("query", query_rows);
    }

    GeneSet zonated{GeneSetLabel::custom, result.truth.zonated_genes()};
    write_lines(dir / "zonated.txt", gene_set_names(zonated, result.dataset.gene_names));
    write_file(dir / "synth.json", synth_config_to_json(cfg, n_query).dump(2) + "\n");
}

/*****************
 *** preprocess ***
 *****************/

struct PreprocessArgs {
    std::vector<std::string> inputs;
    Index hvg = 1000;
    Index heg = 50;
    double target_sum = default_target_sum;
    std::string genes;
    bool subset_hvg = false;
    std::string out;
};

PairedDataset restrict_genes(const PairedDataset& data, const GeneSet& set) {
    PairedDataset out = data;
    out.expression.resize(data.expression.rows(), static_cast<Index>(set.indices.size()));
    out.gene_names.clear();
    for (std::size_t i = 0; i < set.indices.size(); ++i) {
        out.expression.col(static_cast<Index>(i)) = data.expression.col(set.indices[i]);
        out.gene_names.push_back(data.gene_names[static_cast<std::size_t>(set.indices[i])]);
    }
    return out;
}

void run_preprocess(const PreprocessArgs& args, std::ostream& out, std::ostream& err) {
    std::vector<PairedDataset> slices;
    for (const auto& in : args.inputs) {
        auto manifest = load_manifest(in);
        if (manifest.preprocessing.normalized) {
            throw ValidationError("preprocess: '" + in + "' is already normalized");
        }
        slices.push_back(load_dataset(manifest));
        if (slices.back().gene_names != slices.front().gene_names) {
            throw ValidationError("preprocess: '" + in + "' has a different gene universe than '" + args.inputs.front() + "'");
        }
    }

    std::vector<DenseMatrix> scaled, normalized;
    std::vector<GeneSet> hvgs;
    std::vector<std::vector<std::string>> universes;
    for (const auto& data : slices) {
        scaled.push_back(scale_to_total(data.expression, args.target_sum, &data.spot_ids));
        normalized.push_back(scaled.back().unaryExpr([](float v) { return static_cast<float>(std::log1p(static_cast<double>(v))); }));

        auto stats = hvg_statistics(scaled.back());
        Index expressed = static_cast<Index>(std::count(stats.expressed.begin(), stats.expressed.end(), true));
        Index n = args.hvg;
        if (n > expressed) {
            err << "warning: --hvg " << n << " exceeds the " << expressed << " expressed genes; selecting all of them\n";
            n = expressed;
        }
        hvgs.push_back(select_hvg(scaled.back(), n));
        universes.push_back(data.gene_names);
    }
    auto hvg = hvg_union(hvgs, universes);
    const auto& genes = slices.front().gene_names;

    std::optional<GeneSet> keep;
    if (!args.genes.empty()) {
        keep = gene_set_from_names(GeneSetLabel::custom, read_lines(args.genes), genes);
    } else if (args.subset_hvg) {
        keep = hvg;
    }

    fs::path dir(args.out);
    Preprocessing prep{true, true, args.target_sum, false};
    for (std::size_t s = 0; s < slices.size(); ++s) {
        PairedDataset data = slices[s];
        data.expression = normalized[s];
        if (keep) {
            data = restrict_genes(data, *keep);
        }
        fs::path target = slices.size() == 1 ? dir : dir / ("slice" + std::to_string(s));
        auto manifest = write_dataset(target, data, prep, load_manifest(args.inputs[s]).split);
        out << "normalized " << manifest.string() << "\n";
    }

    write_lines(dir / "hvg.txt", gene_set_names(hvg, genes));
    DenseMatrix pooled(0, normalized.front().cols());
    for (const auto& n : normalized) {
        DenseMatrix grown(pooled.rows() + n.rows(), n.cols());
        grown << pooled, n;
        pooled = std::move(grown);
    }
    auto heg = select_heg(pooled, std::min<Index>(args.heg, pooled.cols()));
    write_lines(dir / "heg.txt", gene_set_names(heg, genes));

    json provenance{
        {"inputs", args.inputs}, {"hvg", args.hvg}, {"heg", args.heg}, {"target_sum", args.target_sum},
        {"subset_hvg", args.subset_hvg}, {"genes", args.genes}, {"hvg_union_size", hvg.indices.size()}
    };
    write_file(dir / "preprocess.json", provenance.dump(2) + "\n");
}

/*****************
 *** train ***
 *****************/

struct TrainArgs {
    std::string data;
    TrainConfig cfg;
    std::string objective = "smoothed";
    std::uint64_t seed = 0;
    std::string out;
    bool quiet = false;
};

void run_train(TrainArgs args, std::ostream& out, std::ostream& err) {
    args.cfg.objective = parse_objective(args.objective);
    args.cfg.seed = args.seed;
    auto data = load_dataset(load_manifest(args.data));

    auto ckpt = train(data, args.cfg, [&](int epoch, double loss) {
        if (!args.quiet) {
            err << "epoch " << epoch << " loss " << std::setprecision(6) << loss << "\n";
        }
    });
    for (const auto& w : ckpt.warnings) {
        err << "warning: " << w << "\n";
    }
    save_checkpoint(args.out, ckpt);
    out << "checkpoint " << checkpoint_hash(ckpt) << "\n";
}

/*****************
 *** index ***
 *****************/

struct IndexArgs {
    std::string ckpt;
    std::string reference;
    std::string key = "image";
    std::string out;
};

void run_index(const IndexArgs& args, std::ostream& out) {
    std::string hash;
    auto ckpt = load_checkpoint(args.ckpt, &hash);
    auto data = load_dataset(load_manifest(args.reference));
    auto index = build_index(ckpt, data, hash, parse_index_key(args.key));
    save_index(args.out, index);
    out << "index " << sha256_file(args.out) << " n_ref " << index.size() << "\n";
}

/*****************
 *** impute ***
 *****************/

struct ImputeArgs {
    std::string ckpt;
    std::string index;
    std::string queries;
    Index k = 50;
    std::string agg = "average";
    std::string out;
};

void run_impute(const ImputeArgs& args, std::ostream& out) {
    ImputationConfig cfg{args.k, parse_aggregation(args.agg)};
    std::string hash;
    auto ckpt = load_checkpoint(args.ckpt, &hash);
    auto index = load_index(args.index);
    if (index.checkpoint_hash != hash) {
        throw IoError("impute: index was built from checkpoint " + index.checkpoint_hash + " but '" + args.ckpt + "' is " + hash);
    }
    cfg.validate(index.size());

    auto data = load_dataset(load_manifest(args.queries));
    auto pred = impute(index, ckpt, data.features, cfg);
    save_matrix(args.out, pred);

    // BMAT carries no header, so the settings that produced the prediction go in a sidecar.
    json provenance{
        {"checkpoint", hash}, {"index", sha256_file(args.index)}, {"queries", args.queries},
        {"k", args.k}, {"effective_k", cfg.effective_k()}, {"aggregation", aggregation_name(cfg.aggregation)},
        {"index_key", index_key_name(index.key)}, {"genes", index.gene_names}
    };
    write_file(args.out + ".json", provenance.dump(2) + "\n");
    out << "prediction " << pred.rows() << "x" << pred.cols() << " " << sha256_file(args.out) << "\n";
}

/*****************
 *** eval ***
 *****************/

struct EvalArgs {
    std::string pred;
    std::string truth;
    std::string sets = "heg,hvg";
    Index set_size = 50;
    int clusters = 6;
    std::uint64_t seed = 0;
    std::string out;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::vector<NamedGeneSet> resolve_sets(const std::vector<std::string>& tokens, const DenseMatrix& truth, bool truth_is_log, const std::vector<std::string>& genes, Index set_size, std::ostream& err) {
    std::vector<NamedGeneSet> out;
    for (const auto& token : tokens) {
        if (token == "heg") {
            out.push_back({"HEG", select_heg(truth, std::min<Index>(set_size, truth.cols()))});
        } else if (token == "hvg") {
            DenseMatrix pre_log = truth_is_log ? expm1_matrix(truth) : truth;
            auto stats = hvg_statistics(pre_log);
            Index expressed = static_cast<Index>(std::count(stats.expressed.begin(), stats.expressed.end(), true));
            out.push_back({"HVG", select_hvg(pre_log, std::min(set_size, expressed))});
        } else {
            bool builtin = token == "mg";
            auto names = builtin ? default_marker_genes() : read_lines(token);
            std::vector<std::string> missing;
            fs::path p(token);
            auto stem = p.stem().string();
            bool marker = builtin || stem.rfind("mg", 0) == 0 || stem.rfind("MG", 0) == 0;
            auto set = gene_set_from_names(marker ? GeneSetLabel::MG : GeneSetLabel::custom, names, genes, &missing);
            if (!missing.empty()) {
                err << "warning: " << missing.size() << " genes of set '" << token << "' are absent from the data\n";
            }
            if (set.indices.empty()) {
                err << "warning: set '" << token << "' has no genes in the data; skipped\n";
                continue;
            }
            out.push_back({marker ? std::string("MG") : stem, set});
        }
    }
    return out;
}

void write_ggc(const fs::path& path, const DenseMatrix& m, const std::vector<std::string>& names) {
    std::ostringstream out;
    out << std::setprecision(9) << "gene";
    for (const auto& n : names) {
        out << ',' << n;
    }
    out << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        out << names[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m.cols(); ++j) {
            out << ',' << m(i, j);
        }
        out << '\n';
    }
    write_file(path, out.str());
}

void run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    auto pred = load_matrix(args.pred);
    auto manifest = load_manifest(args.truth);
    auto truth = load_dataset(manifest);
    if (pred.rows() != truth.expression.rows() || pred.cols() != truth.expression.cols()) {
        throw ShapeError("eval: prediction is " + shape_string(pred) + " but truth is " + shape_string(truth.expression));
    }
    if (args.clusters < 1) {
        throw ValidationError("eval: --clusters must be at least 1");
    }

    auto sets = resolve_sets(split_list(args.sets), truth.expression, manifest.preprocessing.log1p, truth.gene_names, args.set_size, err);
    EvaluateOptions opt;
    opt.clusters = args.clusters;
    opt.seed = args.seed;
    auto report = evaluate(pred, truth.expression, sets, opt);

    fs::path dir(args.out);
    fs::create_directories(dir);
    const auto& genes = truth.gene_names;

    {
        std::ostringstream csv;
        csv << std::setprecision(9) << "gene,r,valid\n";
        for (std::size_t g = 0; g < genes.size(); ++g) {
            csv << genes[g] << ',' << report.per_gene_r.r[g] << ',' << (report.per_gene_r.valid[g] ? 1 : 0) << '\n';
        }
        write_file(dir / "per_gene_r.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << std::setprecision(9) << "gene,mean_ratio,mean_valid,var_ratio,var_valid\n";
        for (std::size_t g = 0; g < genes.size(); ++g) {
            csv << genes[g] << ',' << report.moments.mean_ratio[g] << ',' << (report.moments.mean_valid[g] ? 1 : 0)
                << ',' << report.moments.var_ratio[g] << ',' << (report.moments.var_valid[g] ? 1 : 0) << '\n';
        }
        write_file(dir / "moments.csv", csv.str());
    }

    std::vector<std::string> ggc_names;
    for (auto g : report.ggc_genes) {
        ggc_names.push_back(genes[static_cast<std::size_t>(g)]);
    }
    write_ggc(dir / "ggc_pred.csv", report.ggc_pred, ggc_names);
    write_ggc(dir / "ggc_truth.csv", report.ggc_truth, ggc_names);

    json set_json = json::object();
    for (const auto& [name, avg] : report.set_averages) {
        set_json[name] = {{"mean_r", avg.mean}, {"genes_used", avg.used}, {"genes_excluded", avg.excluded}};
        out << name << " " << std::setprecision(6) << avg.mean << "\n";
    }
    json summary{
        {"pred", args.pred}, {"truth", args.truth}, {"sets", args.sets}, {"set_size", args.set_size},
        {"clusters", args.clusters}, {"seed", args.seed},
        {"n_spots", pred.rows()}, {"n_genes", pred.cols()},
        {"invalid_genes", report.per_gene_r.num_invalid()},
        {"set_averages", set_json},
        {"ggc_set", sets.empty() ? "all" : sets.front().name},
        {"clustering", {{"ari", report.clustering.ari}, {"nmi", report.clustering.nmi},
                        {"k", report.clusters}, {"pred_clusters", report.pred_clusters_used}, {"truth_clusters", report.truth_clusters_used}}}
    };
    write_file(dir / "report.json", summary.dump(2) + "\n");
    out << "ARI " << report.clustering.ari << " NMI " << report.clustering.nmi << "\n";
}

/*****************
 *** ablate ***
 *****************/

struct AblateArgs {
    std::string data;
    std::string queries;
    std::string grid;
    int replicates = 3;
    std::uint64_t seed = 0;
    std::string out;
};

struct GridRow {
    Objective objective = Objective::smoothed;
    Index k = 50;
    Aggregation aggregation = Aggregation::average;
};

std::vector<GridRow> default_grid() {
    return {
        {Objective::smoothed, 10, Aggregation::average},
        {Objective::smoothed, 100, Aggregation::average},
        {Objective::smoothed, 1, Aggregation::simple},
        {Objective::smoothed, 50, Aggregation::weighted},
        {Objective::one_hot, 50, Aggregation::average},
        {Objective::smoothed, 50, Aggregation::average}
    };
}

void run_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err) {
    if (args.replicates < 1) {
        throw ValidationError("ablate: --replicates must be at least 1");
    }

    TrainConfig base;
    std::vector<GridRow> rows = default_grid();
    std::vector<std::string> set_tokens{"heg", "hvg"};
    if (!args.grid.empty()) {
        auto j = parse_json_file(args.grid);
        try {
            if (j.contains("train")) {
                const auto& t = j.at("train");
                base.batch_size = t.value("batch_size", base.batch_size);
                base.learning_rate = t.value("learning_rate", base.learning_rate);
                base.epochs = t.value("epochs", base.epochs);
                base.temperature = t.value("temperature", base.temperature);
                base.weight_decay = t.value("weight_decay", base.weight_decay);
                base.hidden_dims = t.value("hidden_dims", base.hidden_dims);
                base.embedding_dim = t.value("embedding_dim", base.embedding_dim);
            }
            if (j.contains("rows")) {
                rows.clear();
                for (const auto& r : j.at("rows")) {
                    GridRow row;
                    row.objective = parse_objective(r.value("objective", "smoothed"));
                    row.aggregation = parse_aggregation(r.value("aggregation", "average"));
                    row.k = r.value("k", Index(row.aggregation == Aggregation::simple ? 1 : 50));
                    rows.push_back(row);
                }
            }
            if (j.contains("sets")) {
                set_tokens = j.at("sets").get<std::vector<std::string>>();
            }
        } catch (const json::exception& e) {
            throw ValidationError(std::string("ablate: bad grid: ") + e.what());
        }
    }

    auto ref_manifest = load_manifest(args.data);
    auto query_manifest = load_manifest(args.queries);
    auto reference = load_dataset(ref_manifest);
    auto query = load_dataset(query_manifest);
    if (reference.gene_names != query.gene_names) {
        throw ValidationError("ablate: reference and query have different genes");
    }
    for (const auto& row : rows) {
        ImputationConfig{row.k, row.aggregation}.validate(reference.num_spots());
    }

    auto sets = resolve_sets(set_tokens, query.expression, query_manifest.preprocessing.log1p, query.gene_names, 50, err);

    // values[row][set][replicate]
    std::vector<std::vector<std::vector<double>>> values(rows.size(), std::vector<std::vector<double>>(sets.size()));
    for (int rep = 0; rep < args.replicates; ++rep) {
        struct Trained {
            ReferenceIndex index;
            DenseMatrix query_embeddings;
        };
        std::map<Objective, Trained> models;
        for (const auto& row : rows) {
            if (models.count(row.objective)) {
                continue;
            }
            TrainConfig cfg = base;
            cfg.objective = row.objective;
            cfg.seed = args.seed + static_cast<std::uint64_t>(rep);
            auto ckpt = train(reference, cfg);
            err << "replicate " << rep + 1 << " objective " << objective_name(row.objective) << " final loss " << ckpt.loss_trace.back() << "\n";
            auto index = build_index(ckpt, reference, checkpoint_hash(ckpt));
            models.emplace(row.objective, Trained{std::move(index), encode_image(ckpt, query.features)});
        }

        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& entry = models.at(rows[r].objective);
            auto pred = impute_embedded(entry.index, entry.query_embeddings, ImputationConfig{rows[r].k, rows[r].aggregation});
            auto corr = pearson_per_gene(pred, query.expression);
            for (std::size_t s = 0; s < sets.size(); ++s) {
                double v = 0;
                try {
                    v = set_average(corr, sets[s].set).mean;
                } catch (const ValidationError&) {
                    v = 0;
                }
                values[r][s].push_back(v);
            }
        }
    }

    std::ostringstream csv, reps;
    csv << std::setprecision(6) << "smoothed_objective,k,aggregation";
    reps << std::setprecision(9) << "smoothed_objective,k,aggregation,set,replicate,mean_r\n";
    for (const auto& s : sets) {
        csv << ',' << s.name << "_mean," << s.name << "_maxdev";
    }
    csv << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const char* smoothed = rows[r].objective == Objective::smoothed ? "yes" : "no";
        std::string k = rows[r].aggregation == Aggregation::simple ? "-" : std::to_string(rows[r].k);
        csv << smoothed << ',' << k << ',' << aggregation_name(rows[r].aggregation);
        for (std::size_t s = 0; s < sets.size(); ++s) {
            auto summary = summarize_replicates(values[r][s]);
            csv << ',' << summary.mean << ',' << summary.max_deviation;
            for (std::size_t rep = 0; rep < values[r][s].size(); ++rep) {
                reps << smoothed << ',' << k << ',' << aggregation_name(rows[r].aggregation) << ',' << sets[s].name << ',' << rep + 1 << ',' << values[r][s][rep] << '\n';
            }
        }
        csv << '\n';
    }

    fs::path path(args.out);
    write_file(path, csv.str());
    fs::path rep_path = path.parent_path() / (path.stem().string() + "_replicates.csv");
    write_file(rep_path, reps.str());

    json provenance{
        {"data", args.data}, {"queries", args.queries}, {"grid", args.grid}, {"replicates", args.replicates}, {"seed", args.seed},
        {"batch_size", base.batch_size}, {"learning_rate", base.learning_rate}, {"epochs", base.epochs},
        {"temperature", base.temperature}, {"weight_decay", base.weight_decay}, {"hidden_dims", base.hidden_dims},
        {"embedding_dim", base.embedding_dim}
    };
    write_file(path.parent_path() / (path.stem().string() + ".json"), provenance.dump(2) + "\n");
    out << csv.str();
}

/*****************
 *** check ***
 *****************/

void run_check(const std::vector<std::string>& files, std::ostream& out) {
    for (const auto& f : files) {
        auto problem = check_bmat(read_file(f));
        if (!problem.empty()) {
            throw IoError("'" + f + "' is not a valid BMAT file: " + problem);
        }
        out << f << " ok\n";
    }
}

std::string escape(const std::string& message) {
    std::string out;
    for (char c : message) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += (c == '\n') ? ' ' : c;
    }
    return out;
}

int fail(std::ostream& err, ErrorKind kind, const std::string& message) {
    err << "error kind=" << kind_name(kind) << " code=" << static_cast<int>(kind) << " message=\"" << escape(message) << "\"\n";
    return static_cast<int>(kind);
}

}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Contrastive image/expression embedding and query-reference expression imputation"};
    app.require_subcommand(1);
    app.fallthrough();
    int num_workers = 1;
    app.add_option("--workers", num_workers, "Worker threads for row-parallel kernels; 1 is bit-exact")->check(CLI::PositiveNumber);

    SynthArgs synth_args;
    auto synth = app.add_subcommand("synth", "Generate a synthetic paired dataset with known zonation");
    synth->add_option("--config", synth_args.config, "JSON synthetic configuration (must set seed)")->required();
    synth->add_option("--out", synth_args.out, "Output directory")->required();

    PreprocessArgs prep_args;
    auto prep = app.add_subcommand("preprocess", "Normalize expression and select gene sets");
    prep->add_option("--in", prep_args.inputs, "Input manifest; repeat for several slices")->required();
    prep->add_option("--hvg", prep_args.hvg, "Highly variable genes per slice")->capture_default_str();
    prep->add_option("--heg", prep_args.heg, "Highly expressed genes to record")->capture_default_str();
    prep->add_option("--target-sum", prep_args.target_sum, "Total count per spot after scaling")->capture_default_str();
    prep->add_option("--genes", prep_args.genes, "Restrict output to the genes listed in this file");
    prep->add_flag("--subset-hvg", prep_args.subset_hvg, "Restrict output to the union of highly variable genes");
    prep->add_option("--out", prep_args.out, "Output directory")->required();

    TrainArgs train_args;
    auto trainer = app.add_subcommand("train", "Train both encoders with the contrastive objective");
    trainer->add_option("--data", train_args.data, "Training manifest")->required();
    trainer->add_option("--batch-size", train_args.cfg.batch_size)->capture_default_str();
    trainer->add_option("--lr", train_args.cfg.learning_rate)->capture_default_str();
    trainer->add_option("--epochs", train_args.cfg.epochs)->capture_default_str();
    trainer->add_option("--tau", train_args.cfg.temperature, "Temperature applied inside the target softmax")->capture_default_str();
    trainer->add_option("--objective", train_args.objective, "smoothed or one_hot")->capture_default_str();
    trainer->add_option("--weight-decay", train_args.cfg.weight_decay)->capture_default_str();
    trainer->add_option("--hidden", train_args.cfg.hidden_dims, "Hidden layer widths")->capture_default_str();
    trainer->add_option("--embedding-dim", train_args.cfg.embedding_dim)->capture_default_str();
    trainer->add_option("--seed", train_args.seed)->required();
    trainer->add_flag("--quiet", train_args.quiet, "Do not print per-epoch losses");
    trainer->add_option("--out", train_args.out, "Checkpoint path")->required();

    IndexArgs index_args;
    auto indexer = app.add_subcommand("index", "Embed a reference dataset into a searchable index");
    indexer->add_option("--ckpt", index_args.ckpt)->required();
    indexer->add_option("--reference", index_args.reference, "Reference manifest")->required();
    indexer->add_option("--key", index_args.key, "Reference embedding to search: image or expression")->capture_default_str();
    indexer->add_option("--out", index_args.out)->required();

    ImputeArgs impute_args;
    auto imputer = app.add_subcommand("impute", "Predict query expression from the nearest reference profiles");
    imputer->add_option("--ckpt", impute_args.ckpt)->required();
    imputer->add_option("--index", impute_args.index)->required();
    imputer->add_option("--queries", impute_args.queries, "Query manifest")->required();
    imputer->add_option("--k", impute_args.k)->capture_default_str();
    imputer->add_option("--agg", impute_args.agg, "simple, average or weighted")->capture_default_str();
    imputer->add_option("--out", impute_args.out, "Prediction matrix (BMAT, or CSV by extension)")->required();

    EvalArgs eval_args;
    auto evaluator = app.add_subcommand("eval", "Score predictions against measured expression");
    evaluator->add_option("--pred", eval_args.pred)->required();
    evaluator->add_option("--truth", eval_args.truth, "Truth manifest")->required();
    evaluator->add_option("--sets", eval_args.sets, "Comma-separated: heg, hvg, mg or gene-list files")->capture_default_str();
    evaluator->add_option("--set-size", eval_args.set_size, "Size of the heg and hvg sets")->capture_default_str();
    evaluator->add_option("--clusters", eval_args.clusters)->capture_default_str();
    evaluator->add_option("--seed", eval_args.seed)->required();
    evaluator->add_option("--out", eval_args.out, "Report directory")->required();

    AblateArgs ablate_args;
    auto ablator = app.add_subcommand("ablate", "Rerun train/impute/eval over an ablation grid");
    ablator->add_option("--data", ablate_args.data, "Reference manifest")->required();
    ablator->add_option("--queries", ablate_args.queries, "Held-out query manifest")->required();
    ablator->add_option("--grid", ablate_args.grid, "JSON grid; defaults to the standard six-row grid");
    ablator->add_option("--replicates", ablate_args.replicates)->capture_default_str();
    ablator->add_option("--seed", ablate_args.seed)->required();
    ablator->add_option("--out", ablate_args.out, "Table CSV")->required();

    std::vector<std::string> check_files;
    auto checker = app.add_subcommand("check", "Validate BMAT files");
    checker->add_option("files", check_files)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(err, ErrorKind::usage, e.what());
    }

    set_workers(num_workers);
    try {
        if (*synth) {
            run_synth(synth_args, out);
        } else if (*prep) {
            run_preprocess(prep_args, out, err);
        } else if (*trainer) {
            run_train(train_args, out, err);
        } else if (*indexer) {
            run_index(index_args, out);
        } else if (*imputer) {
            run_impute(impute_args, out);
        } else if (*evaluator) {
            run_eval(eval_args, out, err);
        } else if (*ablator) {
            run_ablate(ablate_args, out, err);
        } else if (*checker) {
            run_check(check_files, out);
        }
    } catch (const Error& e) {
        return fail(err, e.kind(), e.what());
    } catch (const fs::filesystem_error& e) {
        return fail(err, ErrorKind::io, e.what());
    } catch (const std::exception& e) {
        return fail(err, ErrorKind::validation, e.what());
    }
    return 0;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, std::cout, std::cerr);
}

}
