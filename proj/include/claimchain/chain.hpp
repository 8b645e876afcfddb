// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/tx.hpp"

#include <filesystem>
#include <map>
#include <unordered_map>

namespace claimchain {

struct Block {
    uint64_t height = 0;
    Hash256 prev_hash; // all zero for the genesis block
    PublicKey miner_pk;
    uint64_t timestamp_ms = 0;
    std::vector<Transaction> txs;
    Hash256 block_hash; // digest of header + tx id list

    std::vector<TxId> tx_ids() const;
};

// Header + tx id list, the exact bytes block_hash commits to.
Bytes block_header_bytes(const Block& b);
Hash256 compute_block_hash(const Block& b);

// Full binary form (header, embedded transactions, stored hash).
Bytes block_binary(const Block& b);
Block block_from_binary(ByteView data);

// Per-miner waiting gate: a miner may store a new block once its wait
// period has elapsed since its previous block (boundary inclusive).
struct MinerClock {
    uint64_t wait_period_ms = 1000;
    std::map<PublicKey, uint64_t> last_block_time;
};

bool may_mine(const MinerClock& clock, const PublicKey& miner_pk, uint64_t now);

struct VerifyFailure {
    uint64_t height = 0;
    std::string what;
};

struct VerificationReport {
    std::optional<VerifyFailure> first_failure;

    bool ok() const { return !first_failure.has_value(); }
};

// Whole-batch rejection: one invalid transaction rejects the append,
// naming the offender.
class BatchRejected : public Error {
  public:
    BatchRejected(TxId offender, ValidationResult why)
        : Error(why.reason, "batch rejected at " + offender.hex() + ": " + why.detail),
          offender_(offender), why_(std::move(why))
    {
    }

    const TxId& offender() const { return offender_; }
    const ValidationResult& why() const { return why_; }

  private:
    TxId offender_;
    ValidationResult why_;
};

// Append-only block ledger with a transaction index and a contract-chain
// index. Single writer, any number of readers over appended content.
class Ledger : public LedgerView {
  public:
    Ledger() = default;
    explicit Ledger(std::vector<PublicKey> court_registry)
        : court_registry_(std::move(court_registry))
    {
    }

    // Validates the whole batch against the current view (batch members
    // may reference earlier batch members), then appends one block.
    const Block& append_block(std::vector<Transaction> pending, const PublicKey& miner_pk,
                              uint64_t now, MinerClock& clock);

    // Recomputes every block hash, every t_id, every previous-block link
    // and every transaction signature; reports the first mismatch.
    VerificationReport verify() const;

    // The contract followed by every transaction chained to it, in ledger
    // order. Throws Err::NotFound for an unknown or non-contract id.
    std::vector<const Transaction*> walk_contract_chain(const TxId& sct_tid) const;

    // Case-insensitive exact keyword match over policy advertisements.
    std::vector<const PolicyAdvertTx*> find_policies(std::string_view keyword) const;

    // LedgerView
    const Transaction* find(const TxId& tid) const override;
    std::vector<const Transaction*> contract_members(const TxId& sct_tid) const override;
    std::optional<uint64_t> tx_time_ms(const TxId& tid) const override;

    const std::vector<Block>& blocks() const { return blocks_; }
    size_t tx_count() const { return tx_index_.size(); }
    bool contains(const TxId& tid) const { return tx_index_.count(tid) != 0; }
    Hash256 head_hash() const { return blocks_.empty() ? Hash256{} : blocks_.back().block_hash; }

    const std::vector<PublicKey>& court_registry() const { return court_registry_; }
    void set_court_registry(std::vector<PublicKey> courts) { court_registry_ = std::move(courts); }
    void register_court(const PublicKey& pk);

    // One block per line; transaction canonical bytes embedded as
    // lowercase hex. Reload reproduces identical block hashes.
    void save_jsonl(const std::filesystem::path& p) const;
    static Ledger load_jsonl(const std::filesystem::path& p,
                             std::vector<PublicKey> court_registry = {});

    // Rehydrates stored blocks without judging them; verify() does that.
    static Ledger from_blocks(std::vector<Block> blocks,
                              std::vector<PublicKey> court_registry = {});

  private:
    struct TxLocation {
        uint64_t height;
        size_t pos;
    };

    void index_block(const Block& b);
    std::optional<TxId> chain_head_of(const TxId& tid);

    std::vector<Block> blocks_;
    std::unordered_map<TxId, TxLocation> tx_index_;
    std::map<TxId, std::vector<TxId>> chain_index_;       // contract id -> ordered chain
    std::unordered_map<TxId, std::optional<TxId>> heads_; // memoized chain-head lookups
    std::vector<PublicKey> court_registry_;
};

} // namespace claimchain
