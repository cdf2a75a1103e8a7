#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "m4pipe/error.hpp"

namespace m4 {

/// Dataset sample identity. Ordering is lexicographic (subject, action,
/// frame), matching the big-endian on-disk key bytes.
struct SampleKey {
    std::uint16_t subject = 0;
    std::uint16_t action = 0;
    std::uint32_t frame = 0;

    auto operator<=>(const SampleKey&) const = default;

    std::string to_string() const;
};

/// Single-file write-once key-value store (M4DB, docs/formats.md): one
/// contiguous data region of blobs in key order, a sorted fixed-width index
/// (key, offset, length), and a CRC32 footer over header + index. Lookups
/// are a binary search plus one contiguous read; the file is memory-mapped
/// so random access never touches more than the requested bytes.
class Store {
public:
    Store(Store&&) noexcept;
    Store& operator=(Store&&) noexcept;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;
    ~Store();

    /// Build a store file. Entries may arrive unsorted; duplicate keys fail.
    /// Deterministic: same entries in, same bytes out.
    static void build(const std::filesystem::path& path, const std::string& modality,
                      std::vector<std::pair<SampleKey, std::vector<std::uint8_t>>> entries);

    /// Open (map) an existing store read-only, verifying the footer checksum.
    static Store open(const std::filesystem::path& path);

    std::size_t size() const { return index_.size(); }
    const std::string& modality() const { return modality_; }

    bool contains(const SampleKey& key) const;

    /// Value bytes for a key; the span points into the mapping and stays
    /// valid for the Store's lifetime. Throws NotFound for absent keys.
    std::span<const std::uint8_t> get(const SampleKey& key) const;

    std::vector<SampleKey> keys() const;

    /// Entries in key order, optionally filtered by subject and/or action.
    std::vector<std::pair<SampleKey, std::span<const std::uint8_t>>> scan(
        std::optional<std::uint16_t> subject = std::nullopt,
        std::optional<std::uint16_t> action = std::nullopt) const;

private:
    Store() = default;

    struct IndexEntry {
        SampleKey key;
        std::uint64_t offset = 0;
        std::uint64_t length = 0;
    };

    const std::uint8_t* mapping_ = nullptr;
    std::size_t map_size_ = 0;
    int fd_ = -1;
    std::uint64_t data_offset_ = 0;
    std::string modality_;
    std::vector<IndexEntry> index_;
};

/// Baseline layout for the access benchmark: one file per sample under
/// dir/sNNNNN/aNNNNN/fNNNNNNNN.bin.
void write_file_tree(const std::filesystem::path& dir,
                     const std::vector<std::pair<SampleKey, std::vector<std::uint8_t>>>& entries);
std::filesystem::path file_tree_path(const std::filesystem::path& dir, const SampleKey& key);
std::vector<std::uint8_t> file_tree_read(const std::filesystem::path& dir, const SampleKey& key);

struct AccessStats {
    double store_lookups_per_s = 0;
    double store_bytes_per_s = 0;
    double file_lookups_per_s = 0;
    double file_bytes_per_s = 0;
};

/// Random-access throughput of the mapped store vs. the per-file baseline
/// over the same key sample. First pass is reported as cold, second as warm
/// (both within one process; the page cache is not dropped).
struct BenchReport {
    AccessStats cold;
    AccessStats warm;
};

BenchReport bench_access(const Store& store, const std::filesystem::path& baseline_dir,
                         std::span<const SampleKey> sample);

}  // namespace m4
