#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "vpnf/errors.hpp"

namespace vpnf::store {

// Little-endian byte writer/reader independent of host byte order.
class ByteWriter {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    void text(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    const std::vector<unsigned char>& buffer() const { return buf_; }

private:
    template <class T>
    void le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    ByteReader(std::vector<unsigned char> data, std::string what) : buf_(std::move(data)), what_(std::move(what)) {}

    void bytes(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::string text() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void magic(const char (&m)[5]) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, m, 4) != 0) throw FormatError(what_ + ": bad magic (expected " + std::string(m, 4) + ")");
    }
    void expect_end() const {
        if (pos_ != buf_.size()) throw FormatError(what_ + ": trailing bytes after end of data");
    }

private:
    void need(std::uint64_t n) const {
        if (n > buf_.size() - pos_) throw FormatError(what_ + ": truncated file");
    }
    template <class T>
    T le() {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return v;
    }
    std::vector<unsigned char> buf_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline void write_file(const std::string& path, const std::vector<unsigned char>& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!f) throw FormatError("write to '" + path + "' failed");
}

inline void write_file(const std::string& path, const std::string& text) {
    write_file(path, std::vector<unsigned char>(text.begin(), text.end()));
}

inline std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const std::string& path) {
    const auto b = read_file(path);
    return {b.begin(), b.end()};
}

}  // namespace vpnf::store
