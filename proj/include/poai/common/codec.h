#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "poai/common/types.h"

namespace poai {

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Canonical binary encoding: big-endian fixed-width integers, u32 length prefix
// for variable-size fields, fields written in declaration order.
class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v);
    void boolean(bool v) { u8(v ? 1 : 0); }
    void raw(std::span<const std::uint8_t> bytes);
    void bytes(std::span<const std::uint8_t> bytes);
    void str(std::string_view s);

    template <std::size_t N>
    void fixed(const std::array<std::uint8_t, N>& a) { raw(a); }

    const Bytes& data() const& { return out_; }
    Bytes take() && { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64();
    bool boolean();
    Bytes raw(std::size_t n);
    Bytes bytes();
    std::string str();

    template <std::size_t N>
    std::array<std::uint8_t, N> fixed() {
        need(N);
        std::array<std::uint8_t, N> a{};
        for (std::size_t i = 0; i < N; ++i) a[i] = in_[pos_ + i];
        pos_ += N;
        return a;
    }

    std::size_t remaining() const { return in_.size() - pos_; }
    std::size_t position() const { return pos_; }
    bool done() const { return pos_ == in_.size(); }
    void expectDone() const;

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace poai
