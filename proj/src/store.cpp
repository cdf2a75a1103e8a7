#include "m4pipe/store.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "m4pipe/binio.hpp"

namespace m4 {

namespace {
constexpr char kMagic[4] = {'M', '4', 'D', 'B'};
constexpr char kFooterMagic[4] = {'M', '4', 'D', 'E'};
constexpr std::size_t kHeaderSize = 64;
constexpr std::size_t kIndexEntrySize = 24;  // 8 key (BE) + 8 offset + 8 length
constexpr std::size_t kFooterSize = 8;       // CRC32(header || index) + magic
constexpr std::size_t kModalityBytes = 16;

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}
}  // namespace

std::string SampleKey::to_string() const {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "(s%u a%u f%u)", subject, action, frame);
    return buf;
}

Store::Store(Store&& o) noexcept { *this = std::move(o); }

Store& Store::operator=(Store&& o) noexcept {
    if (this != &o) {
        this->~Store();
        mapping_ = o.mapping_;
        map_size_ = o.map_size_;
        fd_ = o.fd_;
        data_offset_ = o.data_offset_;
        modality_ = std::move(o.modality_);
        index_ = std::move(o.index_);
        o.mapping_ = nullptr;
        o.map_size_ = 0;
        o.fd_ = -1;
    }
    return *this;
}

Store::~Store() {
    if (mapping_ != nullptr) ::munmap(const_cast<std::uint8_t*>(mapping_), map_size_);
    if (fd_ >= 0) ::close(fd_);
    mapping_ = nullptr;
    fd_ = -1;
}

void Store::build(const std::filesystem::path& path, const std::string& modality,
                  std::vector<std::pair<SampleKey, std::vector<std::uint8_t>>> entries) {
    if (modality.size() > kModalityBytes)
        throw InvalidArgument("Store::build: modality tag longer than 16 bytes");

    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].first == entries[i - 1].first)
            throw InvalidArgument("Store::build: duplicate key " + entries[i].first.to_string());
    }

    ByteWriter header;
    header.bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(kMagic), 4));
    header.u16le(1);  // version
    {
        std::array<std::uint8_t, kModalityBytes> tag{};
        std::memcpy(tag.data(), modality.data(), modality.size());
        header.bytes(tag);
    }
    header.u64le(entries.size());
    std::uint64_t data_size = 0;
    for (const auto& [key, blob] : entries) data_size += blob.size();
    const std::uint64_t index_offset = kHeaderSize + data_size;
    header.u64le(index_offset);
    header.u64le(kHeaderSize);  // data-region offset
    header.zeros(kHeaderSize - header.size());

    ByteWriter index;
    std::uint64_t offset = 0;
    for (const auto& [key, blob] : entries) {
        index.u16be(key.subject);
        index.u16be(key.action);
        index.u32be(key.frame);
        index.u64le(offset);
        index.u64le(blob.size());
        offset += blob.size();
    }

    std::uint32_t crc = crc32_of(header.data().data(), header.size());
    crc = static_cast<std::uint32_t>(
        ::crc32(crc, index.data().data(), static_cast<uInt>(index.size())));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("Store::build: cannot open " + path.string());
    auto put = [&](const std::vector<std::uint8_t>& b) {
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
        if (!out) throw IoError("Store::build: write failed at byte " +
                                std::to_string(out.tellp()) + " in " + path.string());
    };
    put(header.data());
    for (const auto& [key, blob] : entries) put(blob);
    put(index.data());
    ByteWriter footer;
    footer.u32le(crc);
    footer.bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(kFooterMagic), 4));
    put(footer.data());
}

Store Store::open(const std::filesystem::path& path) {
    Store s;
    s.fd_ = ::open(path.c_str(), O_RDONLY);
    if (s.fd_ < 0) throw IoError("Store::open: cannot open " + path.string());

    struct stat st{};
    if (::fstat(s.fd_, &st) != 0) throw IoError("Store::open: fstat failed for " + path.string());
    s.map_size_ = static_cast<std::size_t>(st.st_size);
    if (s.map_size_ < kHeaderSize + kFooterSize)
        throw CorruptData("store file shorter than header + footer", s.map_size_);

    void* m = ::mmap(nullptr, s.map_size_, PROT_READ, MAP_PRIVATE, s.fd_, 0);
    if (m == MAP_FAILED) throw IoError("Store::open: mmap failed for " + path.string());
    s.mapping_ = static_cast<const std::uint8_t*>(m);

    ByteReader r(std::span<const std::uint8_t>(s.mapping_, s.map_size_));
    const auto magic = r.bytes(4, "magic");
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw CorruptData("bad store magic", 0);
    const std::uint16_t version = r.u16le("version");
    if (version != 1) throw CorruptData("unsupported store version", 4);
    {
        const auto tag = r.bytes(kModalityBytes, "modality");
        std::size_t len = 0;
        while (len < kModalityBytes && tag[len] != 0) ++len;
        s.modality_.assign(reinterpret_cast<const char*>(tag.data()), len);
    }
    const std::uint64_t count = r.u64le("entry count");
    const std::uint64_t index_offset = r.u64le("index offset");
    s.data_offset_ = r.u64le("data offset");

    const std::uint64_t index_size = count * kIndexEntrySize;
    if (s.data_offset_ != kHeaderSize || index_offset < s.data_offset_ ||
        index_offset + index_size + kFooterSize != s.map_size_)
        throw CorruptData("store header offsets inconsistent with file size", 22);

    // Footer: CRC32 over header and index regions, then the footer magic.
    {
        ByteReader f(std::span<const std::uint8_t>(
            s.mapping_ + s.map_size_ - kFooterSize, kFooterSize));
        const std::uint32_t stored = f.u32le("footer crc");
        const auto fm = f.bytes(4, "footer magic");
        if (std::memcmp(fm.data(), kFooterMagic, 4) != 0)
            throw CorruptData("bad store footer magic", s.map_size_ - 4);
        std::uint32_t crc = crc32_of(s.mapping_, kHeaderSize);
        crc = static_cast<std::uint32_t>(::crc32(
            crc, s.mapping_ + index_offset, static_cast<uInt>(index_size)));
        if (crc != stored)
            throw CorruptData("store header/index checksum mismatch", s.map_size_ - kFooterSize);
    }

    const std::uint64_t data_size = index_offset - s.data_offset_;
    s.index_.reserve(count);
    ByteReader ir(std::span<const std::uint8_t>(s.mapping_ + index_offset, index_size));
    for (std::uint64_t n = 0; n < count; ++n) {
        IndexEntry e;
        e.key.subject = ir.u16be("key");
        e.key.action = ir.u16be("key");
        e.key.frame = ir.u32be("key");
        e.offset = ir.u64le("offset");
        e.length = ir.u64le("length");
        if (!s.index_.empty() && !(s.index_.back().key < e.key))
            throw CorruptData("store index not strictly sorted",
                              index_offset + n * kIndexEntrySize);
        if (e.offset + e.length > data_size)
            throw CorruptData("store index entry exceeds data region",
                              index_offset + n * kIndexEntrySize);
        s.index_.push_back(e);
    }
    return s;
}

bool Store::contains(const SampleKey& key) const {
    const auto it = std::lower_bound(
        index_.begin(), index_.end(), key,
        [](const IndexEntry& e, const SampleKey& k) { return e.key < k; });
    return it != index_.end() && it->key == key;
}

std::span<const std::uint8_t> Store::get(const SampleKey& key) const {
    const auto it = std::lower_bound(
        index_.begin(), index_.end(), key,
        [](const IndexEntry& e, const SampleKey& k) { return e.key < k; });
    if (it == index_.end() || !(it->key == key))
        throw NotFound("store key not found: " + key.to_string());
    return {mapping_ + data_offset_ + it->offset, static_cast<std::size_t>(it->length)};
}

std::vector<SampleKey> Store::keys() const {
    std::vector<SampleKey> out;
    out.reserve(index_.size());
    for (const auto& e : index_) out.push_back(e.key);
    return out;
}

std::vector<std::pair<SampleKey, std::span<const std::uint8_t>>> Store::scan(
    std::optional<std::uint16_t> subject, std::optional<std::uint16_t> action) const {
    std::vector<std::pair<SampleKey, std::span<const std::uint8_t>>> out;
    for (const auto& e : index_) {
        if (subject && e.key.subject != *subject) continue;
        if (action && e.key.action != *action) continue;
        out.emplace_back(e.key, std::span<const std::uint8_t>(
                                    mapping_ + data_offset_ + e.offset,
                                    static_cast<std::size_t>(e.length)));
    }
    return out;
}

std::filesystem::path file_tree_path(const std::filesystem::path& dir, const SampleKey& key) {
    char sub[16], act[16], frm[20];
    std::snprintf(sub, sizeof(sub), "s%05u", key.subject);
    std::snprintf(act, sizeof(act), "a%05u", key.action);
    std::snprintf(frm, sizeof(frm), "f%08u.bin", key.frame);
    return dir / sub / act / frm;
}

void write_file_tree(const std::filesystem::path& dir,
                     const std::vector<std::pair<SampleKey, std::vector<std::uint8_t>>>& entries) {
    for (const auto& [key, blob] : entries) {
        const auto path = file_tree_path(dir, key);
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("write_file_tree: cannot open " + path.string());
        out.write(reinterpret_cast<const char*>(blob.data()),
                  static_cast<std::streamsize>(blob.size()));
        if (!out) throw IoError("write_file_tree: write failed: " + path.string());
    }
}

std::vector<std::uint8_t> file_tree_read(const std::filesystem::path& dir, const SampleKey& key) {
    const auto path = file_tree_path(dir, key);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("file_tree_read: no file for key " + key.to_string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {
// Touch every byte so the measured path actually reads the data.
std::uint64_t checksum_bytes(std::span<const std::uint8_t> b) {
    std::uint64_t acc = 0;
    for (std::uint8_t v : b) acc += v;
    return acc;
}

AccessStats run_pass(const Store& store, const std::filesystem::path& dir,
                     std::span<const SampleKey> sample) {
    using clock = std::chrono::steady_clock;
    AccessStats stats;
    volatile std::uint64_t sink = 0;

    std::uint64_t bytes = 0;
    auto t0 = clock::now();
    for (const auto& key : sample) {
        const auto blob = store.get(key);
        sink += checksum_bytes(blob);
        bytes += blob.size();
    }
    auto t1 = clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();
    secs = std::max(secs, 1e-9);
    stats.store_lookups_per_s = static_cast<double>(sample.size()) / secs;
    stats.store_bytes_per_s = static_cast<double>(bytes) / secs;

    bytes = 0;
    t0 = clock::now();
    for (const auto& key : sample) {
        const auto blob = file_tree_read(dir, key);
        sink += checksum_bytes(blob);
        bytes += blob.size();
    }
    t1 = clock::now();
    secs = std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
    stats.file_lookups_per_s = static_cast<double>(sample.size()) / secs;
    stats.file_bytes_per_s = static_cast<double>(bytes) / secs;
    (void)sink;
    return stats;
}
}  // namespace

BenchReport bench_access(const Store& store, const std::filesystem::path& baseline_dir,
                         std::span<const SampleKey> sample) {
    BenchReport report;
    report.cold = run_pass(store, baseline_dir, sample);
    report.warm = run_pass(store, baseline_dir, sample);
    return report;
}

}  // namespace m4
