// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/chain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"

namespace claimchain {

std::vector<TxId> Block::tx_ids() const
{
    std::vector<TxId> ids;
    ids.reserve(txs.size());
    for (const auto& tx : txs)
        ids.push_back(tid_of(tx));
    return ids;
}

Bytes block_header_bytes(const Block& b)
{
    Encoder enc;
    enc.raw_u64(b.height);
    enc.raw(b.prev_hash.bytes);
    enc.raw(b.miner_pk.bytes);
    enc.raw_u64(b.timestamp_ms);
    enc.raw_u32(static_cast<uint32_t>(b.txs.size()));
    for (const auto& tx : b.txs)
        enc.raw(tid_of(tx).value.bytes);
    return enc.take();
}

Hash256 compute_block_hash(const Block& b)
{
    return digest(ByteView(block_header_bytes(b)));
}

Bytes block_binary(const Block& b)
{
    Encoder enc;
    enc.raw_u64(b.height);
    enc.raw(b.prev_hash.bytes);
    enc.raw(b.miner_pk.bytes);
    enc.raw_u64(b.timestamp_ms);
    enc.raw_u32(static_cast<uint32_t>(b.txs.size()));
    for (const auto& tx : b.txs)
        enc.field(encode_tx(tx));
    enc.raw(b.block_hash.bytes);
    return enc.take();
}

Block block_from_binary(ByteView data)
{
    Decoder dec(data);
    Block b;
    b.height = dec.raw_u64();
    Bytes prev = dec.raw(32);
    std::copy(prev.begin(), prev.end(), b.prev_hash.bytes.begin());
    Bytes miner = dec.raw(32);
    std::copy(miner.begin(), miner.end(), b.miner_pk.bytes.begin());
    b.timestamp_ms = dec.raw_u64();
    uint32_t n = dec.raw_u32();
    b.txs.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        b.txs.push_back(decode_tx(dec.field()));
    Bytes hash = dec.raw(32);
    std::copy(hash.begin(), hash.end(), b.block_hash.bytes.begin());
    dec.expect_done();
    return b;
}

bool may_mine(const MinerClock& clock, const PublicKey& miner_pk, uint64_t now)
{
    auto it = clock.last_block_time.find(miner_pk);
    if (it == clock.last_block_time.end())
        return true;
    return now >= it->second && now - it->second >= clock.wait_period_ms;
}

void Ledger::register_court(const PublicKey& pk)
{
    if (std::find(court_registry_.begin(), court_registry_.end(), pk) == court_registry_.end())
        court_registry_.push_back(pk);
}

namespace {

// Admission view over the ledger plus batch members accepted so far.
class AppendView : public LedgerView {
  public:
    AppendView(const Ledger& ledger, const std::vector<Transaction>& accepted)
        : ledger_(ledger), accepted_(accepted)
    {
    }

    const Transaction* find(const TxId& tid) const override
    {
        if (const Transaction* tx = ledger_.find(tid))
            return tx;
        for (const auto& tx : accepted_)
            if (tid_of(tx) == tid)
                return &tx;
        return nullptr;
    }

    std::vector<const Transaction*> contract_members(const TxId& sct_tid) const override
    {
        auto members = ledger_.contract_members(sct_tid);
        if (members.empty())
        {
            const Transaction* head = find(sct_tid);
            if (!head || kind_of(*head) != TxKind::Contract)
                return {};
            members.push_back(head);
        }
        for (const auto& tx : accepted_)
        {
            if (tid_of(tx) == sct_tid)
                continue;
            if (resolve_contract_head(*this, tid_of(tx)) == std::optional<TxId>(sct_tid))
                members.push_back(&tx);
        }
        return members;
    }

  private:
    const Ledger& ledger_;
    const std::vector<Transaction>& accepted_;
};

} // namespace

const Block& Ledger::append_block(std::vector<Transaction> pending, const PublicKey& miner_pk,
                                  uint64_t now, MinerClock& clock)
{
    if (pending.empty())
        throw Error(Err::InvariantViolation, "cannot append an empty block");
    if (!may_mine(clock, miner_pk, now))
        throw Error(Err::ConsensusViolation,
                    "miner " + miner_pk.hex() + " has not waited the full period");

    std::vector<Transaction> accepted;
    accepted.reserve(pending.size());
    for (auto& tx : pending)
    {
        TxId tid = tid_of(tx);
        AppendView view(*this, accepted);
        if (contains(tid))
            throw BatchRejected(tid, ValidationResult::reject(Err::DuplicateTx,
                                                              "transaction already in ledger"));
        for (const auto& prior : accepted)
            if (tid_of(prior) == tid)
                throw BatchRejected(
                    tid, ValidationResult::reject(Err::DuplicateTx, "duplicate within batch"));
        ValidationResult vr = validate_tx(tx, view, court_registry_);
        if (!vr)
            throw BatchRejected(tid, vr);
        accepted.push_back(std::move(tx));
    }

    Block b;
    b.height = blocks_.size();
    b.prev_hash = blocks_.empty() ? Hash256{} : blocks_.back().block_hash;
    b.miner_pk = miner_pk;
    b.timestamp_ms = now;
    b.txs = std::move(accepted);
    b.block_hash = compute_block_hash(b);

    clock.last_block_time[miner_pk] = now;
    blocks_.push_back(std::move(b));
    index_block(blocks_.back());
    return blocks_.back();
}

std::optional<TxId> Ledger::chain_head_of(const TxId& tid)
{
    auto it = heads_.find(tid);
    if (it != heads_.end())
        return it->second;

    const Transaction* tx = find(tid);
    std::optional<TxId> head;
    if (tx)
    {
        if (kind_of(*tx) == TxKind::Contract)
            head = tid;
        else if (auto parent = parent_of(*tx))
            head = chain_head_of(*parent);
    }
    heads_.emplace(tid, head);
    return head;
}

void Ledger::index_block(const Block& b)
{
    for (size_t pos = 0; pos < b.txs.size(); ++pos)
    {
        const Transaction& tx = b.txs[pos];
        TxId tid = tid_of(tx);
        tx_index_.emplace(tid, TxLocation{b.height, pos});
        if (auto head = chain_head_of(tid))
            chain_index_[*head].push_back(tid);
    }
}

const Transaction* Ledger::find(const TxId& tid) const
{
    auto it = tx_index_.find(tid);
    if (it == tx_index_.end())
        return nullptr;
    return &blocks_[it->second.height].txs[it->second.pos];
}

std::vector<const Transaction*> Ledger::contract_members(const TxId& sct_tid) const
{
    auto it = chain_index_.find(sct_tid);
    if (it == chain_index_.end())
        return {};
    std::vector<const Transaction*> out;
    out.reserve(it->second.size());
    for (const TxId& tid : it->second)
        out.push_back(find(tid));
    return out;
}

std::optional<uint64_t> Ledger::tx_time_ms(const TxId& tid) const
{
    auto it = tx_index_.find(tid);
    if (it == tx_index_.end())
        return std::nullopt;
    return blocks_[it->second.height].timestamp_ms;
}

std::vector<const Transaction*> Ledger::walk_contract_chain(const TxId& sct_tid) const
{
    const Transaction* head = find(sct_tid);
    if (!head || kind_of(*head) != TxKind::Contract)
        throw Error(Err::NotFound, "no contract with id " + sct_tid.hex());
    return contract_members(sct_tid);
}

namespace {

std::string fold_ascii(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

std::vector<const PolicyAdvertTx*> Ledger::find_policies(std::string_view keyword) const
{
    std::string needle = fold_ascii(keyword);
    std::vector<const PolicyAdvertTx*> out;
    for (const Block& b : blocks_)
        for (const Transaction& tx : b.txs)
            if (const auto* advert = std::get_if<PolicyAdvertTx>(&tx))
                for (const std::string& kw : advert->keywords)
                    if (fold_ascii(kw) == needle)
                    {
                        out.push_back(advert);
                        break;
                    }
    return out;
}

VerificationReport Ledger::verify() const
{
    for (size_t i = 0; i < blocks_.size(); ++i)
    {
        const Block& b = blocks_[i];
        auto fail = [&](std::string what) {
            return VerificationReport{VerifyFailure{b.height, std::move(what)}};
        };

        if (b.height != i)
            return fail("height out of sequence");
        Hash256 expected_prev = i == 0 ? Hash256{} : blocks_[i - 1].block_hash;
        if (b.prev_hash != expected_prev)
            return fail("previous-block hash mismatch");
        if (compute_block_hash(b) != b.block_hash)
            return fail("block hash mismatch");

        for (const Transaction& tx : b.txs)
        {
            if (compute_tid(tx) != tid_of(tx))
                return fail("t_id mismatch in tx " + tid_of(tx).hex());
            Bytes body = canonical_bytes(tx);
            for (const SignerSlot& slot : signer_slots(tx))
                if (!claimchain::verify(*slot.pk, body, *slot.sig))
                    return fail(std::string(slot.label) + " signature invalid in tx " +
                                tid_of(tx).hex());
        }
    }
    return VerificationReport{};
}

void Ledger::save_jsonl(const std::filesystem::path& p) const
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Err::IoError, "cannot write " + p.string());
    for (const Block& b : blocks_)
    {
        nlohmann::json j;
        j["height"] = b.height;
        j["prev_hash"] = b.prev_hash.hex();
        j["miner_pk"] = b.miner_pk.hex();
        j["timestamp_ms"] = b.timestamp_ms;
        nlohmann::json txs = nlohmann::json::array();
        for (const Transaction& tx : b.txs)
            txs.push_back(to_hex(encode_tx(tx)));
        j["tx"] = txs;
        j["block_hash"] = b.block_hash.hex();
        out << j.dump() << "\n";
    }
    if (!out)
        throw Error(Err::IoError, "short write to " + p.string());
}

Ledger Ledger::load_jsonl(const std::filesystem::path& p, std::vector<PublicKey> court_registry)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(Err::IoError, "cannot open " + p.string());

    Ledger ledger(std::move(court_registry));
    std::string line;
    uint64_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(line);
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(Err::ParseError,
                        "ledger line " + std::to_string(lineno) + ": " + e.what());
        }
        Block b;
        try
        {
            b.height = j.at("height").get<uint64_t>();
            b.prev_hash = Hash256::from_hex(j.at("prev_hash").get<std::string>());
            b.miner_pk = PublicKey::from_hex(j.at("miner_pk").get<std::string>());
            b.timestamp_ms = j.at("timestamp_ms").get<uint64_t>();
            for (const auto& hex : j.at("tx"))
                b.txs.push_back(decode_tx(from_hex(hex.get<std::string>())));
            b.block_hash = Hash256::from_hex(j.at("block_hash").get<std::string>());
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(Err::ParseError,
                        "ledger line " + std::to_string(lineno) + ": " + e.what());
        }
        ledger.blocks_.push_back(std::move(b));
        ledger.index_block(ledger.blocks_.back());
    }
    return ledger;
}

Ledger Ledger::from_blocks(std::vector<Block> blocks, std::vector<PublicKey> court_registry)
{
    Ledger ledger(std::move(court_registry));
    for (Block& b : blocks)
    {
        ledger.blocks_.push_back(std::move(b));
        ledger.index_block(ledger.blocks_.back());
    }
    return ledger;
}

} // namespace claimchain
