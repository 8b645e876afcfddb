// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/bytes.hpp"

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace claimchain {

// Project-wide 256-bit digest (SHA-256).
struct Hash256 {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Hash256&) const = default;

    bool is_zero() const;
    std::string hex() const { return to_hex(bytes); }
    static Hash256 from_hex(std::string_view h);
};

// Ed25519 verification key, 32 bytes.
struct PublicKey {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const PublicKey&) const = default;

    std::string hex() const { return to_hex(bytes); }
    static PublicKey from_hex(std::string_view h);
};

// Ed25519 secret key (64 bytes: seed || public). Zeroized on destruction
// and never part of any serialized artifact.
struct SecretKey {
    std::array<uint8_t, 64> bytes{};

    SecretKey() = default;
    SecretKey(const SecretKey&) = default;
    SecretKey& operator=(const SecretKey&) = default;
    ~SecretKey();
};

// Detached Ed25519 signature. Empty bytes mean "not signed yet"; a
// mined multisig transaction never carries an empty slot.
struct Signature {
    Bytes bytes;

    bool present() const { return !bytes.empty(); }
    bool operator==(const Signature&) const = default;
    std::string hex() const { return to_hex(bytes); }
};

struct Keypair {
    PublicKey pk;
    SecretKey sk;
};

// One party's signing identity for a single transaction: the key it is
// known by to this counterparty.
struct PartyKeys {
    PublicKey pk;
    SecretKey sk;
};

Hash256 digest(ByteView msg);
Hash256 digest(std::string_view msg);

Keypair generate_keypair(); // OS entropy; throws Err::EntropyFailure
Keypair keypair_from_seed(const std::array<uint8_t, 32>& seed);

Signature sign(const SecretKey& sk, ByteView msg);

// True iff sig was produced over msg by the secret key matching pk.
// Malformed key or signature bytes yield false, never an exception.
bool verify(const PublicKey& pk, ByteView msg, const Signature& sig);

// Per-counterparty key material. A User-role owner gets a fresh keypair
// for every new context (counterparty) and the same pair forever after,
// so it stays recognizable to that recipient while unlinkable across
// recipients.
class KeyRing {
  public:
    explicit KeyRing(std::string owner_label); // random keys
    KeyRing(std::string owner_label, uint64_t seed); // deterministic derivation

    const std::string& owner() const { return owner_label_; }
    uint64_t generation() const { return generation_; }

    // Create-or-return: first call for a context mints a pair, repeats
    // return the same key.
    const PublicKey& fresh_pk(const std::string& context);
    const Keypair& pair_for(const std::string& context);
    PartyKeys keys_for(const std::string& context);

    bool has(const std::string& context) const { return keys_.count(context) != 0; }
    size_t size() const { return keys_.size(); }

  private:
    Keypair mint(const std::string& context) const;

    std::string owner_label_;
    std::map<std::string, Keypair> keys_;
    std::optional<std::array<uint8_t, 32>> master_seed_;
    uint64_t generation_ = 0;
};

// Key files: 1-byte format version, then raw key bytes. Secret key files
// get owner-only permissions where the platform supports it.
inline constexpr uint8_t kKeyFileVersion = 1;

void save_public_key(const std::filesystem::path& p, const PublicKey& pk);
PublicKey load_public_key(const std::filesystem::path& p);
void save_secret_key(const std::filesystem::path& p, const SecretKey& sk);
SecretKey load_secret_key(const std::filesystem::path& p);

} // namespace claimchain
