#ifndef BLEEP_IO_HPP
#define BLEEP_IO_HPP

#include "dataset.hpp"
#include "model.hpp"
#include "refindex.hpp"
#include "synthgen.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

/**
 * @file io.hpp
 *
 * @brief On-disk formats.
 *
 * - BMAT: `"BMAT"`, u32 LE version 1, u64 LE rows, u64 LE cols, then `rows * cols` LE float32, row-major.
 * - BLPC (checkpoint): `"BLPC"`, u32 LE version 1, u64 LE header length, UTF-8 JSON header,
 *   then every weight and bias as a BMAT blob in the order listed by the header's `tensors` field.
 * - BLIX (reference index): `"BLIX"`, u32 LE version 1, u64 LE header length, UTF-8 JSON header,
 *   then the embeddings and expression BMAT blobs.
 * - Manifest: JSON naming the files of a dataset, their formats, SHA-256 hashes and preprocessing provenance.
 */

namespace bleep {

namespace fs = std::filesystem;

inline constexpr std::uint32_t bmat_version = 1;
inline constexpr std::uint32_t checkpoint_version = 1;
inline constexpr std::uint32_t index_version = 1;

/** Hex-encoded SHA-256 digest. */
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

void write_bmat(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_bmat(std::istream& in);

/** Canonical BMAT bytes of `m`. */
std::string bmat_bytes(const DenseMatrix& m);

/**
 * Checks magic, version and that the payload length matches the declared shape exactly.
 * Returns an empty string for a valid buffer, otherwise a description of the first problem.
 */
std::string check_bmat(const std::string& bytes);

/**
 * CSV with a header row; every other cell must parse as a number.
 */
void write_csv_matrix(const fs::path& path, const DenseMatrix& m, const std::vector<std::string>& header = {});
DenseMatrix read_csv_matrix(const fs::path& path, std::vector<std::string>* header = nullptr);

/** Reads BMAT, or CSV when the extension is `.csv`. */
DenseMatrix load_matrix(const fs::path& path);
void save_matrix(const fs::path& path, const DenseMatrix& m);

/** One entry per non-empty line, surrounding whitespace trimmed. */
std::vector<std::string> read_lines(const fs::path& path);
void write_lines(const fs::path& path, const std::vector<std::string>& lines);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& bytes);

/**
 * ISO-8601 UTC creation time, taken from `SOURCE_DATE_EPOCH` when set so that builds can be reproduced byte for byte.
 */
std::string creation_timestamp();

/**
 * SHA-256 over the checkpoint's encoder specs, training configuration, loss trace, warnings and weights.
 * Excludes the creation time.
 */
std::string checkpoint_hash(const ModelCheckpoint& ckpt);

std::string checkpoint_bytes(const ModelCheckpoint& ckpt, const std::string& created);
void save_checkpoint(const fs::path& path, const ModelCheckpoint& ckpt, const std::string& created = creation_timestamp());

/**
 * @throws IoError on a malformed file or when the stored content hash does not match the weights.
 */
ModelCheckpoint load_checkpoint(const fs::path& path, std::string* stored_hash = nullptr);
ModelCheckpoint parse_checkpoint(const std::string& bytes, std::string* stored_hash = nullptr);

std::string index_bytes(const ReferenceIndex& index);
void save_index(const fs::path& path, const ReferenceIndex& index);
ReferenceIndex load_index(const fs::path& path);
ReferenceIndex parse_index(const std::string& bytes);

struct Preprocessing {
    bool normalized = false;
    bool log1p = false;
    std::optional<double> target_sum;
    bool batch_corrected = false;
};

struct ManifestEntry {
    std::string path;
    std::string format;
    std::string sha256;
};

/**
 * Paths are stored relative to the manifest's directory.
 */
struct Manifest {
    fs::path location;
    std::optional<std::string> split;
    ManifestEntry features;
    ManifestEntry expression;
    std::optional<ManifestEntry> coords;
    ManifestEntry gene_names;
    ManifestEntry spot_ids;
    Preprocessing preprocessing;

    fs::path resolve(const ManifestEntry& entry) const;
};

/**
 * @throws IoError if the manifest is missing or malformed.
 */
Manifest load_manifest(const fs::path& path);

/**
 * Loads every file named by the manifest after checking its hash.
 * @throws IoError on a missing file or hash mismatch.
 * @throws ShapeError if the files are mutually inconsistent.
 */
PairedDataset load_dataset(const Manifest& manifest);

/**
 * Writes the dataset's matrices as BMAT and name lists as text into `dir`, then `dir/manifest.json`.
 * Returns the manifest path.
 */
fs::path write_dataset(const fs::path& dir, const PairedDataset& data, const Preprocessing& prep, const std::optional<std::string>& split = std::nullopt);

/**
 * Ground truth as `latent.bmat`, `clean.bmat` and `genes.csv` (gene, loading, baseline).
 */
void write_ground_truth(const fs::path& dir, const GroundTruth& truth, const std::vector<std::string>& gene_names);
GroundTruth read_ground_truth(const fs::path& dir);

}

#endif
