// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/bytes.hpp"

#include <limits>

namespace claimchain {

const char* err_name(Err e)
{
    switch (e)
    {
    case Err::None: return "ok";
    case Err::TidMismatch: return "TidMismatch";
    case Err::BadSignature: return "BadSignature";
    case Err::MultisigIncomplete: return "MultisigIncomplete";
    case Err::ChainLinkError: return "ChainLinkError";
    case Err::InvariantViolation: return "InvariantViolation";
    case Err::ScopeError: return "ScopeError";
    case Err::AuthorizationError: return "AuthorizationError";
    case Err::NotFound: return "NotFound";
    case Err::ConsensusViolation: return "ConsensusViolation";
    case Err::DuplicateTx: return "DuplicateTx";
    case Err::EncodingError: return "EncodingError";
    case Err::DecodeError: return "DecodeError";
    case Err::ConfigError: return "ConfigError";
    case Err::AccessDenied: return "AccessDenied";
    case Err::VerificationFailed: return "VerificationFailed";
    case Err::InsufficientFunds: return "InsufficientFunds";
    case Err::EstablishmentAborted: return "EstablishmentAborted";
    case Err::EntropyFailure: return "EntropyFailure";
    case Err::IoError: return "IoError";
    case Err::ParseError: return "ParseError";
    }
    return "unknown";
}

std::string to_hex(ByteView data)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data)
    {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

static int hex_nibble(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0)
        throw Error(Err::ParseError, "hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2)
    {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw Error(Err::ParseError, "invalid hex digit");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

void Encoder::field(ByteView data)
{
    if (data.size() > std::numeric_limits<uint32_t>::max())
        throw Error(Err::EncodingError, "field exceeds 2^32-1 bytes");
    raw_u32(static_cast<uint32_t>(data.size()));
    raw(data);
}

void Encoder::field_u64(uint64_t v)
{
    raw_u32(8);
    raw_u64(v);
}

void Encoder::raw_u32(uint32_t v)
{
    out_.push_back(static_cast<uint8_t>(v >> 24));
    out_.push_back(static_cast<uint8_t>(v >> 16));
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
}

void Encoder::raw_u64(uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        out_.push_back(static_cast<uint8_t>(v >> shift));
}

ByteView Decoder::take(size_t n)
{
    if (pos_ + n > data_.size())
        throw Error(Err::DecodeError, "input truncated");
    ByteView v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
}

uint8_t Decoder::tag()
{
    return raw_u8();
}

Bytes Decoder::field()
{
    uint32_t len = raw_u32();
    ByteView v = take(len);
    return Bytes(v.begin(), v.end());
}

uint64_t Decoder::field_u64()
{
    uint32_t len = raw_u32();
    if (len != 8)
        throw Error(Err::DecodeError, "u64 field must be 8 bytes");
    return raw_u64();
}

uint8_t Decoder::raw_u8()
{
    return take(1)[0];
}

uint32_t Decoder::raw_u32()
{
    ByteView v = take(4);
    return (uint32_t(v[0]) << 24) | (uint32_t(v[1]) << 16) | (uint32_t(v[2]) << 8) | uint32_t(v[3]);
}

uint64_t Decoder::raw_u64()
{
    ByteView v = take(8);
    uint64_t r = 0;
    for (uint8_t b : v)
        r = (r << 8) | b;
    return r;
}

Bytes Decoder::raw(size_t n)
{
    ByteView v = take(n);
    return Bytes(v.begin(), v.end());
}

void Decoder::expect_done() const
{
    if (!done())
        throw Error(Err::DecodeError, "trailing bytes after decode");
}

} // namespace claimchain
