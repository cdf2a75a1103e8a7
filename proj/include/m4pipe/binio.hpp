#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "m4pipe/error.hpp"

// Little-endian primitive (de)serialization helpers shared by all file
// formats. Store index keys are the one big-endian exception (documented in
// docs/formats.md) so that byte order equals key order.

namespace m4 {

class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u16le(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v & 0xff));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    }

    void u32le(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64le(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u16be(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v & 0xff));
    }

    void u32be(std::uint32_t v) {
        for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f32le(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32le(bits);
    }

    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    void zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }

    /// Overwrite 4 bytes at an absolute position (for checksums patched late).
    void patch_u32le(std::size_t pos, std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_[pos + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }

    std::size_t size() const { return buf_.size(); }
    const std::vector<std::uint8_t>& data() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked reader; every failure reports the offending byte offset.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    void require(std::size_t n, const char* what) const {
        if (remaining() < n) throw CorruptData(std::string("truncated stream reading ") + what, pos_);
    }

    std::uint8_t u8(const char* what = "u8") {
        require(1, what);
        return data_[pos_++];
    }

    std::uint16_t u16le(const char* what = "u16") {
        require(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32le(const char* what = "u32") {
        require(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64le(const char* what = "u64") {
        require(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    std::uint16_t u16be(const char* what = "u16be") {
        require(2, what);
        std::uint16_t v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32be(const char* what = "u32be") {
        require(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
        pos_ += 4;
        return v;
    }

    float f32le(const char* what = "f32") {
        std::uint32_t bits = u32le(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    std::span<const std::uint8_t> bytes(std::size_t n, const char* what = "bytes") {
        require(n, what);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    void skip(std::size_t n, const char* what = "padding") {
        require(n, what);
        pos_ += n;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace m4
