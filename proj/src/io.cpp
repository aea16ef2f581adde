#include "bleep/io.hpp"

#include "json.hpp"

#include <openssl/evp.h>

#include <bit>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace bleep {

static_assert(std::endian::native == std::endian::little, "on-disk formats assume a little-endian host");

using json = nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256: digest computation failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < length; ++i) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return out.str();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

std::string sha256_file(const fs::path& path) {
    return sha256_hex(read_file(path));
}

namespace {

template<typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template<typename T>
T get(std::istream& in, const char* what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw IoError(std::string("truncated input while reading ") + what);
    }
    return value;
}

void expect_magic(std::istream& in, const char* magic) {
    char buffer[4];
    in.read(buffer, 4);
    if (!in || std::memcmp(buffer, magic, 4) != 0) {
        throw IoError(std::string("bad magic, expected ") + magic);
    }
}

}

void write_bmat(std::ostream& out, const DenseMatrix& m) {
    out.write("BMAT", 4);
    put<std::uint32_t>(out, bmat_version);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(m.size())));
}

DenseMatrix read_bmat(std::istream& in) {
    expect_magic(in, "BMAT");
    auto version = get<std::uint32_t>(in, "BMAT version");
    if (version != bmat_version) {
        throw IoError("BMAT: unsupported version " + std::to_string(version));
    }
    auto rows = get<std::uint64_t>(in, "BMAT rows");
    auto cols = get<std::uint64_t>(in, "BMAT cols");
    if (rows > (1ULL << 40) || cols > (1ULL << 40) || (rows && cols > (1ULL << 40) / rows)) {
        throw IoError("BMAT: implausible shape " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(float) * rows * cols));
    if (!in) {
        throw IoError("BMAT: payload shorter than declared shape " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    return m;
}

std::string bmat_bytes(const DenseMatrix& m) {
    std::ostringstream out(std::ios::binary);
    write_bmat(out, m);
    return out.str();
}

std::string check_bmat(const std::string& bytes) {
    if (bytes.size() < 24) {
        return "shorter than the 24-byte header";
    }
    if (bytes.compare(0, 4, "BMAT") != 0) {
        return "bad magic";
    }
    std::uint32_t version;
    std::uint64_t rows, cols;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&rows, bytes.data() + 8, 8);
    std::memcpy(&cols, bytes.data() + 16, 8);
    if (version != bmat_version) {
        return "unsupported version " + std::to_string(version);
    }
    if (rows && cols > (std::uint64_t(1) << 60) / rows) {
        return "shape overflows";
    }
    std::uint64_t expected = 24 + 4 * rows * cols;
    if (bytes.size() != expected) {
        return "payload is " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(expected);
    }
    return "";
}

void write_csv_matrix(const fs::path& path, const DenseMatrix& m, const std::vector<std::string>& header) {
    std::ostringstream out;
    out << std::setprecision(9);
    for (Index c = 0; c < m.cols(); ++c) {
        if (c) {
            out << ',';
        }
        if (static_cast<Index>(header.size()) == m.cols()) {
            out << header[static_cast<std::size_t>(c)];
        } else {
            out << 'c' << c;
        }
    }
    out << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) {
                out << ',';
            }
            out << m(r, c);
        }
        out << '\n';
    }
    write_file(path, out.str());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}

DenseMatrix read_csv_matrix(const fs::path& path, std::vector<std::string>* header) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("CSV '" + path.string() + "' has no header row");
    }
    auto names = split_csv(trim(line));
    for (auto& n : names) {
        n = trim(n);
    }

    std::vector<float> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto cells = split_csv(line);
        if (cells.size() != names.size()) {
            throw IoError("CSV '" + path.string() + "' row " + std::to_string(rows + 1) + " has " + std::to_string(cells.size()) + " cells, header has " + std::to_string(names.size()));
        }
        for (const auto& cell : cells) {
            auto t = trim(cell);
            char* end = nullptr;
            float v = std::strtof(t.c_str(), &end);
            if (t.empty() || end != t.c_str() + t.size()) {
                throw IoError("CSV '" + path.string() + "' row " + std::to_string(rows + 1) + ": '" + t + "' is not a number");
            }
            values.push_back(v);
        }
        ++rows;
    }

    DenseMatrix m(rows, static_cast<Index>(names.size()));
    if (!values.empty()) {
        std::memcpy(m.data(), values.data(), sizeof(float) * values.size());
    }
    if (header) {
        *header = std::move(names);
    }
    return m;
}

DenseMatrix load_matrix(const fs::path& path) {
    if (path.extension() == ".csv") {
        return read_csv_matrix(path);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    try {
        return read_bmat(in);
    } catch (const IoError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

void save_matrix(const fs::path& path, const DenseMatrix& m) {
    if (path.extension() == ".csv") {
        write_csv_matrix(path, m);
    } else {
        write_file(path, bmat_bytes(m));
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    write_file(path, out);
}

std::string creation_timestamp() {
    std::time_t now;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

/********************
 *** Checkpoints ***
 ********************/

namespace {

json spec_to_json(const EncoderSpec& spec) {
    return json{{"input_dim", spec.input_dim}, {"hidden_dims", spec.hidden_dims}, {"output_dim", spec.output_dim}, {"activation", "relu"}};
}

EncoderSpec spec_from_json(const json& j) {
    EncoderSpec spec;
    spec.input_dim = j.at("input_dim").get<Index>();
    spec.hidden_dims = j.at("hidden_dims").get<std::vector<Index>>();
    spec.output_dim = j.at("output_dim").get<Index>();
    if (j.value("activation", "relu") != "relu") {
        throw IoError("checkpoint: unsupported activation " + j.value("activation", ""));
    }
    return spec;
}

json config_to_json(const TrainConfig& cfg) {
    return json{
        {"batch_size", cfg.batch_size},
        {"learning_rate", cfg.learning_rate},
        {"epochs", cfg.epochs},
        {"temperature", cfg.temperature},
        {"objective", objective_name(cfg.objective)},
        {"seed", cfg.seed},
        {"weight_decay", cfg.weight_decay},
        {"hidden_dims", cfg.hidden_dims},
        {"embedding_dim", cfg.embedding_dim}
    };
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.batch_size = j.at("batch_size").get<Index>();
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.temperature = j.at("temperature").get<double>();
    cfg.objective = parse_objective(j.at("objective").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.weight_decay = j.at("weight_decay").get<double>();
    cfg.hidden_dims = j.at("hidden_dims").get<std::vector<Index>>();
    cfg.embedding_dim = j.at("embedding_dim").get<Index>();
    return cfg;
}

struct NamedTensor {
    std::string name;
    const DenseMatrix* value;
};

std::vector<NamedTensor> tensors_of(const ModelCheckpoint& ckpt) {
    std::vector<NamedTensor> out;
    auto add = [&](const std::string& prefix, const Mlp<float>& net) {
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            out.push_back({prefix + ".w" + std::to_string(l), &net.weights[l]});
            out.push_back({prefix + ".b" + std::to_string(l), &net.biases[l]});
        }
    };
    add("image", ckpt.image);
    add("expression", ckpt.expression);
    return out;
}

json checkpoint_payload(const ModelCheckpoint& ckpt) {
    json tensors = json::array();
    for (const auto& t : tensors_of(ckpt)) {
        tensors.push_back(t.name);
    }
    return json{
        {"format", "BLPC"},
        {"image_encoder", spec_to_json(ckpt.image.spec)},
        {"expression_encoder", spec_to_json(ckpt.expression.spec)},
        {"train_config", config_to_json(ckpt.config)},
        {"seed", ckpt.config.seed},
        {"loss_trace", ckpt.loss_trace},
        {"warnings", ckpt.warnings},
        {"tensors", tensors}
    };
}

std::string tensor_blobs(const ModelCheckpoint& ckpt) {
    std::string out;
    for (const auto& t : tensors_of(ckpt)) {
        out += bmat_bytes(*t.value);
    }
    return out;
}

std::string framed(const char* magic, std::uint32_t version, const std::string& header, const std::string& body) {
    std::ostringstream out(std::ios::binary);
    out.write(magic, 4);
    put<std::uint32_t>(out, version);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    return out.str();
}

json read_framed_header(std::istream& in, const char* magic, std::uint32_t version) {
    expect_magic(in, magic);
    auto v = get<std::uint32_t>(in, "version");
    if (v != version) {
        throw IoError(std::string(magic) + ": unsupported version " + std::to_string(v));
    }
    auto length = get<std::uint64_t>(in, "header length");
    if (length > (1ULL << 32)) {
        throw IoError(std::string(magic) + ": implausible header length");
    }
    std::string header(static_cast<std::size_t>(length), '\0');
    in.read(header.data(), static_cast<std::streamsize>(length));
    if (!in) {
        throw IoError(std::string(magic) + ": truncated header");
    }
    try {
        return json::parse(header);
    } catch (const json::exception& e) {
        throw IoError(std::string(magic) + ": malformed header: " + e.what());
    }
}

}

std::string checkpoint_hash(const ModelCheckpoint& ckpt) {
    return sha256_hex(checkpoint_payload(ckpt).dump() + tensor_blobs(ckpt));
}

std::string checkpoint_bytes(const ModelCheckpoint& ckpt, const std::string& created) {
    ckpt.validate();
    auto header = checkpoint_payload(ckpt);
    auto blobs = tensor_blobs(ckpt);
    header["content_hash"] = sha256_hex(header.dump() + blobs);
    header["created"] = created;
    return framed("BLPC", checkpoint_version, header.dump(), blobs);
}

void save_checkpoint(const fs::path& path, const ModelCheckpoint& ckpt, const std::string& created) {
    write_file(path, checkpoint_bytes(ckpt, created));
}

ModelCheckpoint parse_checkpoint(const std::string& bytes, std::string* stored_hash) {
    std::istringstream in(bytes, std::ios::binary);
    auto header = read_framed_header(in, "BLPC", checkpoint_version);

    ModelCheckpoint ckpt;
    std::string hash;
    try {
        ckpt.image.spec = spec_from_json(header.at("image_encoder"));
        ckpt.expression.spec = spec_from_json(header.at("expression_encoder"));
        ckpt.config = config_from_json(header.at("train_config"));
        ckpt.loss_trace = header.at("loss_trace").get<std::vector<double>>();
        ckpt.warnings = header.value("warnings", std::vector<std::string>{});
        hash = header.at("content_hash").get<std::string>();

        for (const auto& name : header.at("tensors")) {
            auto label = name.get<std::string>();
            auto dot = label.find('.');
            if (dot == std::string::npos || dot + 2 > label.size()) {
                throw IoError("checkpoint: bad tensor name '" + label + "'");
            }
            auto prefix = label.substr(0, dot);
            Mlp<float>* net = prefix == "image" ? &ckpt.image : prefix == "expression" ? &ckpt.expression : nullptr;
            if (!net) {
                throw IoError("checkpoint: bad tensor name '" + label + "'");
            }
            auto layer = static_cast<std::size_t>(std::stoul(label.substr(dot + 2)));
            auto& target = label[dot + 1] == 'w' ? net->weights : net->biases;
            if (layer != target.size()) {
                throw IoError("checkpoint: tensor '" + label + "' out of order");
            }
            target.push_back(read_bmat(in));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint: malformed header: ") + e.what());
    }

    try {
        ckpt.validate();
    } catch (const Error& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    }

    if (checkpoint_hash(ckpt) != hash) {
        throw IoError("checkpoint: content hash mismatch");
    }
    if (stored_hash) {
        *stored_hash = hash;
    }
    return ckpt;
}

ModelCheckpoint load_checkpoint(const fs::path& path, std::string* stored_hash) {
    try {
        return parse_checkpoint(read_file(path), stored_hash);
    } catch (const IoError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

/*****************
 *** Indexes ***
 *****************/

std::string index_bytes(const ReferenceIndex& index) {
    index.validate();
    json header{
        {"format", "BLIX"},
        {"checkpoint_hash", index.checkpoint_hash},
        {"n_ref", index.embeddings.rows()},
        {"h", index.embeddings.cols()},
        {"C", index.expression.cols()},
        {"key", index_key_name(index.key)},
        {"gene_names", index.gene_names},
        {"gene_names_source", "reference manifest"}
    };
    return framed("BLIX", index_version, header.dump(), bmat_bytes(index.embeddings) + bmat_bytes(index.expression));
}

void save_index(const fs::path& path, const ReferenceIndex& index) {
    write_file(path, index_bytes(index));
}

ReferenceIndex parse_index(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    auto header = read_framed_header(in, "BLIX", index_version);
    ReferenceIndex index;
    try {
        index.checkpoint_hash = header.at("checkpoint_hash").get<std::string>();
        index.gene_names = header.at("gene_names").get<std::vector<std::string>>();
        index.key = parse_index_key(header.value("key", "image"));
        index.embeddings = read_bmat(in);
        index.expression = read_bmat(in);
        if (index.embeddings.rows() != header.at("n_ref").get<Index>() || index.embeddings.cols() != header.at("h").get<Index>()
            || index.expression.cols() != header.at("C").get<Index>()) {
            throw IoError("index: header shape disagrees with stored matrices");
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("index: malformed header: ") + e.what());
    }
    try {
        index.validate();
    } catch (const Error& e) {
        throw IoError(std::string("index: ") + e.what());
    }
    return index;
}

ReferenceIndex load_index(const fs::path& path) {
    try {
        return parse_index(read_file(path));
    } catch (const IoError& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

/*****************
 *** Manifests ***
 *****************/

fs::path Manifest::resolve(const ManifestEntry& entry) const {
    fs::path p(entry.path);
    return p.is_absolute() ? p : location.parent_path() / p;
}

namespace {

ManifestEntry entry_from_json(const json& j) {
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    e.format = j.value("format", "");
    e.sha256 = j.value("sha256", "");
    return e;
}

json entry_to_json(const ManifestEntry& e) {
    return json{{"path", e.path}, {"format", e.format}, {"sha256", e.sha256}};
}

void verify(const Manifest& m, const ManifestEntry& e) {
    auto path = m.resolve(e);
    if (!fs::exists(path)) {
        throw IoError("manifest '" + m.location.string() + "' references missing file '" + path.string() + "'");
    }
    if (!e.sha256.empty()) {
        auto actual = sha256_file(path);
        if (actual != e.sha256) {
            throw IoError("sha256 mismatch for '" + path.string() + "': manifest has " + e.sha256 + ", file has " + actual);
        }
    }
}

}

Manifest load_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("manifest '" + path.string() + "' is malformed: " + e.what());
    }

    Manifest m;
    m.location = path;
    try {
        const auto& files = j.at("files");
        m.features = entry_from_json(files.at("features"));
        m.expression = entry_from_json(files.at("expression"));
        m.gene_names = entry_from_json(files.at("gene_names"));
        m.spot_ids = entry_from_json(files.at("spot_ids"));
        if (files.contains("coords")) {
            m.coords = entry_from_json(files.at("coords"));
        }
        if (j.contains("split") && !j.at("split").is_null()) {
            m.split = j.at("split").get<std::string>();
        }
        if (j.contains("preprocessing")) {
            const auto& p = j.at("preprocessing");
            m.preprocessing.normalized = p.value("normalized", false);
            m.preprocessing.log1p = p.value("log1p", false);
            m.preprocessing.batch_corrected = p.value("batch_corrected", false);
            if (p.contains("target_sum") && !p.at("target_sum").is_null()) {
                m.preprocessing.target_sum = p.at("target_sum").get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw IoError("manifest '" + path.string() + "' is malformed: " + e.what());
    }
    return m;
}

PairedDataset load_dataset(const Manifest& manifest) {
    verify(manifest, manifest.features);
    verify(manifest, manifest.expression);
    verify(manifest, manifest.gene_names);
    verify(manifest, manifest.spot_ids);
    if (manifest.coords) {
        verify(manifest, *manifest.coords);
    }

    PairedDataset data;
    data.features = load_matrix(manifest.resolve(manifest.features));
    data.expression = load_matrix(manifest.resolve(manifest.expression));
    data.gene_names = read_lines(manifest.resolve(manifest.gene_names));
    data.spot_ids = read_lines(manifest.resolve(manifest.spot_ids));
    if (manifest.coords) {
        data.coords = load_matrix(manifest.resolve(*manifest.coords));
    }
    data.validate();
    return data;
}

fs::path write_dataset(const fs::path& dir, const PairedDataset& data, const Preprocessing& prep, const std::optional<std::string>& split) {
    data.validate();
    fs::create_directories(dir);

    auto emit = [&](const std::string& name, const std::string& format, const std::string& bytes) {
        write_file(dir / name, bytes);
        return ManifestEntry{name, format, sha256_hex(bytes)};
    };
    auto lines = [](const std::vector<std::string>& values) {
        std::string out;
        for (const auto& v : values) {
            out += v;
            out += '\n';
        }
        return out;
    };

    json files;
    files["features"] = entry_to_json(emit("features.bmat", "bmat", bmat_bytes(data.features)));
    files["expression"] = entry_to_json(emit("expression.bmat", "bmat", bmat_bytes(data.expression)));
    files["gene_names"] = entry_to_json(emit("genes.txt", "lines", lines(data.gene_names)));
    files["spot_ids"] = entry_to_json(emit("spots.txt", "lines", lines(data.spot_ids)));
    if (data.coords) {
        files["coords"] = entry_to_json(emit("coords.bmat", "bmat", bmat_bytes(*data.coords)));
    }

    json j{
        {"format", "bleep-manifest"},
        {"version", 1},
        {"files", files},
        {"preprocessing", {
            {"normalized", prep.normalized},
            {"log1p", prep.log1p},
            {"target_sum", prep.target_sum ? json(*prep.target_sum) : json(nullptr)},
            {"batch_corrected", prep.batch_corrected}
        }},
        {"split", split ? json(*split) : json(nullptr)}
    };
    auto path = dir / "manifest.json";
    write_file(path, j.dump(2) + "\n");
    return path;
}

void write_ground_truth(const fs::path& dir, const GroundTruth& truth, const std::vector<std::string>& gene_names) {
    fs::create_directories(dir);
    DenseMatrix latent(static_cast<Index>(truth.latent.size()), 1);
    for (std::size_t i = 0; i < truth.latent.size(); ++i) {
        latent(static_cast<Index>(i), 0) = static_cast<float>(truth.latent[i]);
    }
    write_file(dir / "latent.bmat", bmat_bytes(latent));
    write_file(dir / "clean.bmat", bmat_bytes(truth.clean));

    std::ostringstream out;
    out << std::setprecision(17) << "gene,loading,baseline\n";
    for (std::size_t g = 0; g < truth.loadings.size(); ++g) {
        out << gene_names.at(g) << ',' << truth.loadings[g] << ',' << truth.baselines[g] << '\n';
    }
    write_file(dir / "genes.csv", out.str());
}

GroundTruth read_ground_truth(const fs::path& dir) {
    GroundTruth truth;
    auto latent = load_matrix(dir / "latent.bmat");
    for (Index i = 0; i < latent.rows(); ++i) {
        truth.latent.push_back(latent(i, 0));
    }
    truth.clean = load_matrix(dir / "clean.bmat");

    std::istringstream in(read_file(dir / "genes.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        auto cells = split_csv(trim(line));
        if (cells.size() != 3) {
            continue;
        }
        truth.loadings.push_back(std::stod(cells[1]));
        truth.baselines.push_back(std::stod(cells[2]));
    }
    return truth;
}

}
