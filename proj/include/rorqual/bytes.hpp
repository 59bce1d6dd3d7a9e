#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rorqual {

using Bytes = std::vector<std::uint8_t>;

// Canonical wire encoding: little-endian fixed-width integers,
// u32 length prefix for variable-size fields.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }

    void bytes(std::span<const std::uint8_t> b) {
        u32(static_cast<std::uint32_t>(b.size()));
        buf_.insert(buf_.end(), b.begin(), b.end());
    }
    void fixed(std::span<const std::uint8_t> b) {
        buf_.insert(buf_.end(), b.begin(), b.end());
    }
    void str(const std::string& s) {
        bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
    }

    const Bytes& data() const { return buf_; }
    Bytes take() { return std::move(buf_); }

  private:
    void raw(const void* p, std::size_t len) {
        // host is little-endian on every platform we target; memcpy keeps
        // this alignment-safe
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + len);
    }
    Bytes buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() { return scalar<std::uint16_t>(); }
    std::uint32_t u32() { return scalar<std::uint32_t>(); }
    std::uint64_t u64() { return scalar<std::uint64_t>(); }
    double f64() { return scalar<double>(); }

    Bytes bytes() {
        auto len = u32();
        auto s = take(len);
        return Bytes(s.begin(), s.end());
    }
    std::span<const std::uint8_t> fixed(std::size_t len) { return take(len); }
    std::string str() {
        auto b = bytes();
        return std::string(b.begin(), b.end());
    }

    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

  private:
    template <typename T>
    T scalar() {
        T v;
        auto s = take(sizeof(T));
        std::memcpy(&v, s.data(), sizeof(T));
        return v;
    }
    std::span<const std::uint8_t> take(std::size_t len) {
        if (pos_ + len > data_.size())
            throw std::out_of_range("ByteReader: truncated input");
        auto s = data_.subspan(pos_, len);
        pos_ += len;
        return s;
    }
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace rorqual
