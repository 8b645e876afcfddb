// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/chain.hpp"
#include "claimchain/tx.hpp"

#include <filesystem>
#include <functional>

namespace claimchain {

struct StoreReceipt {
    std::string locator;
    Hash256 payload_hash;
    uint64_t captured_at_ms = 0;
};

struct DataRecord {
    std::string locator;
    PublicKey sensor_pk;
    uint64_t captured_at_ms = 0;
    Hash256 payload_hash; // digest recorded at put time
};

struct FetchResult {
    bool ok = false;
    Bytes payload;      // only on success
    Hash256 anchored;   // hash the chain promised
    Hash256 actual;     // hash of what the store returned

    explicit operator bool() const { return ok; }
};

enum class DenyReason { None, NotAnchored, IncompleteSignatures, Identity, Scope };

const char* deny_reason_name(DenyReason r);

// Grant handed to an insurer after a mined, multisig-valid DataAccessTx
// checks out; reads go through it, never around it.
struct ReadGrant {
    bool granted = false;
    DenyReason denied = DenyReason::None;
    std::string detail;
    PublicKey reader;
    std::vector<std::string> locators; // records the grant covers

    explicit operator bool() const { return granted; }
};

// File-backed content store standing in for cloud or local device
// storage. Payloads live under <root>/records/<locator>; the index is one
// JSON record per line at <root>/index.jsonl. Writes are atomic
// (temp-then-rename); readers never observe a partial payload.
class OffchainStore {
  public:
    explicit OffchainStore(std::filesystem::path root);

    // Stores one reading. Empty payloads are rejected; locator collisions
    // are retried internally and never surface.
    StoreReceipt put_record(const PublicKey& sensor_pk, ByteView payload, uint64_t captured_at_ms);

    // Owner-side read. Insurer-side reads go through read_granted.
    Bytes read_owner(const std::string& locator) const;
    Bytes read_granted(const ReadGrant& grant, const std::string& locator) const;

    // Integrity gate: returns the payload iff its digest equals the hash
    // anchored on chain; a mismatch reports both hashes.
    FetchResult fetch_and_verify(const std::string& locator, const Hash256& anchored_hash) const;
    FetchResult fetch_and_verify(const ReadGrant& grant, const std::string& locator,
                                 const Hash256& anchored_hash) const;

    // Issues a grant iff the DAT is on the ledger, multisig-valid, the
    // requester is the DAT's insurer, and every requested locator falls
    // within the DAT scope. An empty request covers everything in scope.
    ReadGrant authorize_read(const DataAccessTx& dat, const Ledger& ledger,
                             const PublicKey& requester_pk,
                             std::span<const std::string> requested_locators = {}) const;

    bool has(const std::string& locator) const;
    const DataRecord* record(const std::string& locator) const;
    // Records of one sensor inside a time window, in captured order.
    std::vector<DataRecord> records_for(const PublicKey& sensor_pk, uint64_t from_ms,
                                        uint64_t to_ms) const;
    size_t size() const { return index_.size(); }
    const std::filesystem::path& root() const { return root_; }

  private:
    void append_index(const DataRecord& rec);
    void load_index();

    std::filesystem::path root_;
    std::vector<DataRecord> index_; // captured order == put order
    uint64_t counter_ = 0;
};

// Builds and submits the anchor for a stored reading. The author must be
// a registered sensor: prev_tip has to be its own genesis or its latest
// anchor, otherwise Err::AuthorizationError.
DataAnchorTx anchor_record(const PartyKeys& sensor, const LedgerView& view,
                           const StoreReceipt& receipt, const TxId& prev_tip,
                           const std::function<void(Transaction)>& submit);

} // namespace claimchain
