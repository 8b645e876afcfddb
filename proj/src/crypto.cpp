// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/crypto.hpp"

#include <sodium.h>

#include <algorithm>
#include <fstream>

namespace claimchain {

namespace {

void ensure_sodium()
{
    static const int rc = sodium_init();
    if (rc < 0)
        throw Error(Err::EntropyFailure, "libsodium initialization failed");
}

} // namespace

bool Hash256::is_zero() const
{
    return std::all_of(bytes.begin(), bytes.end(), [](uint8_t b) { return b == 0; });
}

Hash256 Hash256::from_hex(std::string_view h)
{
    Bytes raw = claimchain::from_hex(h);
    if (raw.size() != 32)
        throw Error(Err::ParseError, "Hash256 must be 32 bytes");
    Hash256 out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

PublicKey PublicKey::from_hex(std::string_view h)
{
    Bytes raw = claimchain::from_hex(h);
    if (raw.size() != 32)
        throw Error(Err::ParseError, "PublicKey must be 32 bytes");
    PublicKey out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin());
    return out;
}

SecretKey::~SecretKey()
{
    sodium_memzero(bytes.data(), bytes.size());
}

Hash256 digest(ByteView msg)
{
    ensure_sodium();
    Hash256 out;
    crypto_hash_sha256(out.bytes.data(), msg.data(), msg.size());
    return out;
}

Hash256 digest(std::string_view msg)
{
    return digest(as_bytes(msg));
}

Keypair generate_keypair()
{
    ensure_sodium();
    Keypair kp;
    if (crypto_sign_ed25519_keypair(kp.pk.bytes.data(), kp.sk.bytes.data()) != 0)
        throw Error(Err::EntropyFailure, "keypair generation failed");
    return kp;
}

Keypair keypair_from_seed(const std::array<uint8_t, 32>& seed)
{
    ensure_sodium();
    Keypair kp;
    if (crypto_sign_ed25519_seed_keypair(kp.pk.bytes.data(), kp.sk.bytes.data(), seed.data()) != 0)
        throw Error(Err::EntropyFailure, "seeded keypair generation failed");
    return kp;
}

Signature sign(const SecretKey& sk, ByteView msg)
{
    ensure_sodium();
    Signature sig;
    sig.bytes.resize(crypto_sign_ed25519_BYTES);
    unsigned long long len = 0;
    crypto_sign_ed25519_detached(sig.bytes.data(), &len, msg.data(), msg.size(), sk.bytes.data());
    sig.bytes.resize(len);
    return sig;
}

bool verify(const PublicKey& pk, ByteView msg, const Signature& sig)
{
    ensure_sodium();
    if (sig.bytes.size() != crypto_sign_ed25519_BYTES)
        return false;
    return crypto_sign_ed25519_verify_detached(sig.bytes.data(), msg.data(), msg.size(),
                                               pk.bytes.data()) == 0;
}

KeyRing::KeyRing(std::string owner_label) : owner_label_(std::move(owner_label)) {}

KeyRing::KeyRing(std::string owner_label, uint64_t seed) : owner_label_(std::move(owner_label))
{
    // master = H(seed_be || 0x00 || owner) so distinct owners sharing a
    // numeric seed still derive independent keys.
    Encoder enc;
    enc.raw_u64(seed);
    enc.raw_u8(0x00);
    enc.raw(as_bytes(owner_label_));
    master_seed_ = digest(enc.bytes()).bytes;
}

Keypair KeyRing::mint(const std::string& context) const
{
    if (!master_seed_)
        return generate_keypair();
    Encoder enc;
    enc.raw(*master_seed_);
    enc.raw_u8(0x1f);
    enc.raw(as_bytes(context));
    return keypair_from_seed(digest(enc.bytes()).bytes);
}

const PublicKey& KeyRing::fresh_pk(const std::string& context)
{
    return pair_for(context).pk;
}

const Keypair& KeyRing::pair_for(const std::string& context)
{
    auto it = keys_.find(context);
    if (it == keys_.end())
    {
        it = keys_.emplace(context, mint(context)).first;
        ++generation_;
    }
    return it->second;
}

PartyKeys KeyRing::keys_for(const std::string& context)
{
    const Keypair& kp = pair_for(context);
    return PartyKeys{kp.pk, kp.sk};
}

namespace {

Bytes read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(Err::IoError, "cannot open " + p.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& p, ByteView data)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Err::IoError, "cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw Error(Err::IoError, "short write to " + p.string());
}

} // namespace

void save_public_key(const std::filesystem::path& p, const PublicKey& pk)
{
    Bytes data;
    data.push_back(kKeyFileVersion);
    data.insert(data.end(), pk.bytes.begin(), pk.bytes.end());
    write_file(p, data);
}

PublicKey load_public_key(const std::filesystem::path& p)
{
    Bytes data = read_file(p);
    if (data.size() != 1 + 32 || data[0] != kKeyFileVersion)
        throw Error(Err::ParseError, "bad public key file " + p.string());
    PublicKey pk;
    std::copy(data.begin() + 1, data.end(), pk.bytes.begin());
    return pk;
}

void save_secret_key(const std::filesystem::path& p, const SecretKey& sk)
{
    Bytes data;
    data.push_back(kKeyFileVersion);
    data.insert(data.end(), sk.bytes.begin(), sk.bytes.end());
    write_file(p, data);
    std::error_code ec;
    std::filesystem::permissions(p,
                                 std::filesystem::perms::owner_read |
                                     std::filesystem::perms::owner_write,
                                 ec);
    sodium_memzero(data.data(), data.size());
}

SecretKey load_secret_key(const std::filesystem::path& p)
{
    Bytes data = read_file(p);
    if (data.size() != 1 + 64 || data[0] != kKeyFileVersion)
        throw Error(Err::ParseError, "bad secret key file " + p.string());
    SecretKey sk;
    std::copy(data.begin() + 1, data.end(), sk.bytes.begin());
    sodium_memzero(data.data(), data.size());
    return sk;
}

} // namespace claimchain
