// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/errors.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace claimchain {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline ByteView as_bytes(std::string_view s)
{
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s)
{
    return Bytes(s.begin(), s.end());
}

std::string to_hex(ByteView data);
Bytes from_hex(std::string_view hex); // throws Err::ParseError on bad input

// Canonical binary field encoding: every field is length-prefixed with a
// 4-byte big-endian length; kind tags are single raw bytes. Fixed field
// order plus universal length prefixes make the encoding injective.
class Encoder {
  public:
    void tag(uint8_t kind) { out_.push_back(kind); }

    void field(ByteView data);
    void field_u64(uint64_t v); // 8-byte big-endian payload

    // Raw fixed-width primitives for composite payloads built via a
    // sub-encoder (the composite is then emitted as one field).
    void raw(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void raw_u8(uint8_t v) { out_.push_back(v); }
    void raw_u32(uint32_t v);
    void raw_u64(uint64_t v);

    const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

  private:
    Bytes out_;
};

class Decoder {
  public:
    explicit Decoder(ByteView data) : data_(data) {}

    uint8_t tag();
    Bytes field();
    uint64_t field_u64();

    uint8_t raw_u8();
    uint32_t raw_u32();
    uint64_t raw_u64();
    Bytes raw(size_t n);

    bool done() const { return pos_ == data_.size(); }
    void expect_done() const; // trailing bytes -> Err::DecodeError

  private:
    ByteView take(size_t n);

    ByteView data_;
    size_t pos_ = 0;
};

} // namespace claimchain
