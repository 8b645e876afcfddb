// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/store.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace claimchain {

namespace fs = std::filesystem;

const char* deny_reason_name(DenyReason r)
{
    switch (r)
    {
    case DenyReason::None: return "none";
    case DenyReason::NotAnchored: return "not_anchored";
    case DenyReason::IncompleteSignatures: return "incomplete_signatures";
    case DenyReason::Identity: return "identity";
    case DenyReason::Scope: return "scope";
    }
    return "unknown";
}

OffchainStore::OffchainStore(fs::path root) : root_(std::move(root))
{
    fs::create_directories(root_ / "records");
    load_index();
}

void OffchainStore::load_index()
{
    std::ifstream in(root_ / "index.jsonl", std::ios::binary);
    if (!in)
        return;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        nlohmann::json j = nlohmann::json::parse(line);
        DataRecord rec;
        rec.locator = j.at("locator").get<std::string>();
        rec.sensor_pk = PublicKey::from_hex(j.at("sensor_pk").get<std::string>());
        rec.captured_at_ms = j.at("captured_at_ms").get<uint64_t>();
        rec.payload_hash = Hash256::from_hex(j.at("payload_hash").get<std::string>());
        index_.push_back(std::move(rec));
    }
    counter_ = index_.size();
}

void OffchainStore::append_index(const DataRecord& rec)
{
    std::ofstream out(root_ / "index.jsonl", std::ios::binary | std::ios::app);
    if (!out)
        throw Error(Err::IoError, "cannot append to store index");
    nlohmann::json j{{"locator", rec.locator},
                     {"sensor_pk", rec.sensor_pk.hex()},
                     {"captured_at_ms", rec.captured_at_ms},
                     {"payload_hash", rec.payload_hash.hex()}};
    out << j.dump() << "\n";
}

StoreReceipt OffchainStore::put_record(const PublicKey& sensor_pk, ByteView payload,
                                       uint64_t captured_at_ms)
{
    if (payload.empty())
        throw Error(Err::InvariantViolation, "empty payload");

    Hash256 payload_hash = digest(payload);

    std::string locator;
    fs::path final_path;
    do
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "r%08llu-", static_cast<unsigned long long>(counter_++));
        locator = buf + payload_hash.hex().substr(0, 8);
        final_path = root_ / "records" / locator;
    } while (fs::exists(final_path)); // collision: retry with the next counter

    fs::path tmp = root_ / "records" / (".tmp-" + locator);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error(Err::IoError, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size()));
        if (!out)
            throw Error(Err::IoError, "short write to " + tmp.string());
    }
    fs::rename(tmp, final_path);

    DataRecord rec{locator, sensor_pk, captured_at_ms, payload_hash};
    append_index(rec);
    index_.push_back(rec);
    return StoreReceipt{locator, payload_hash, captured_at_ms};
}

bool OffchainStore::has(const std::string& locator) const
{
    return record(locator) != nullptr;
}

const DataRecord* OffchainStore::record(const std::string& locator) const
{
    for (const auto& rec : index_)
        if (rec.locator == locator)
            return &rec;
    return nullptr;
}

std::vector<DataRecord> OffchainStore::records_for(const PublicKey& sensor_pk, uint64_t from_ms,
                                                   uint64_t to_ms) const
{
    std::vector<DataRecord> out;
    for (const auto& rec : index_)
        if (rec.sensor_pk == sensor_pk && rec.captured_at_ms >= from_ms &&
            rec.captured_at_ms <= to_ms)
            out.push_back(rec);
    std::stable_sort(out.begin(), out.end(), [](const DataRecord& a, const DataRecord& b) {
        return a.captured_at_ms < b.captured_at_ms;
    });
    return out;
}

Bytes OffchainStore::read_owner(const std::string& locator) const
{
    if (!has(locator))
        throw Error(Err::NotFound, "no record " + locator);
    std::ifstream in(root_ / "records" / locator, std::ios::binary);
    if (!in)
        throw Error(Err::NotFound, "record file missing for " + locator);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Bytes OffchainStore::read_granted(const ReadGrant& grant, const std::string& locator) const
{
    if (!grant.granted)
        throw Error(Err::AccessDenied, grant.detail);
    if (std::find(grant.locators.begin(), grant.locators.end(), locator) == grant.locators.end())
        throw Error(Err::AccessDenied, "locator " + locator + " outside the grant");
    return read_owner(locator);
}

FetchResult OffchainStore::fetch_and_verify(const std::string& locator,
                                            const Hash256& anchored_hash) const
{
    Bytes payload = read_owner(locator);
    FetchResult r;
    r.anchored = anchored_hash;
    r.actual = digest(ByteView(payload));
    r.ok = r.actual == anchored_hash;
    if (r.ok)
        r.payload = std::move(payload);
    return r;
}

FetchResult OffchainStore::fetch_and_verify(const ReadGrant& grant, const std::string& locator,
                                            const Hash256& anchored_hash) const
{
    read_granted(grant, locator); // enforce the grant before verifying
    return fetch_and_verify(locator, anchored_hash);
}

ReadGrant OffchainStore::authorize_read(const DataAccessTx& dat, const Ledger& ledger,
                                        const PublicKey& requester_pk,
                                        std::span<const std::string> requested_locators) const
{
    auto deny = [&](DenyReason why, std::string detail) {
        ReadGrant g;
        g.denied = why;
        g.detail = std::move(detail);
        return g;
    };

    // The permission is what the chain holds, not the caller's copy.
    const Transaction* on_chain = ledger.find(dat.t_id);
    const auto* anchored = on_chain ? std::get_if<DataAccessTx>(on_chain) : nullptr;
    if (!anchored)
        return deny(DenyReason::NotAnchored, "data access transaction is not on the ledger");

    Bytes body = canonical_bytes(*on_chain);
    if (!anchored->user_sign.present() || !anchored->insurance_sign.present() ||
        !verify(anchored->user_pk, body, anchored->user_sign) ||
        !verify(anchored->insurance_pk, body, anchored->insurance_sign))
        return deny(DenyReason::IncompleteSignatures, "permission lacks two valid signatures");

    if (requester_pk != anchored->insurance_pk)
        return deny(DenyReason::Identity, "requester is not the authorized insurer");

    ReadGrant g;
    g.granted = true;
    g.reader = requester_pk;
    if (requested_locators.empty())
    {
        for (const auto& rec : index_)
            if (anchored->scope.covers(rec.sensor_pk, rec.captured_at_ms))
                g.locators.push_back(rec.locator);
    }
    else
    {
        for (const auto& locator : requested_locators)
        {
            const DataRecord* rec = record(locator);
            if (!rec || !anchored->scope.covers(rec->sensor_pk, rec->captured_at_ms))
                return deny(DenyReason::Scope, "locator " + locator + " outside the DAT scope");
            g.locators.push_back(locator);
        }
    }
    return g;
}

DataAnchorTx anchor_record(const PartyKeys& sensor, const LedgerView& view,
                           const StoreReceipt& receipt, const TxId& prev_tip,
                           const std::function<void(Transaction)>& submit)
{
    const Transaction* prev = view.find(prev_tip);
    bool registered = false;
    if (prev)
    {
        if (const auto* gen = std::get_if<SensorGenesisTx>(prev))
            registered = gen->sensor_pk == sensor.pk;
        else if (const auto* anchor = std::get_if<DataAnchorTx>(prev))
            registered = anchor->sensor_pk == sensor.pk;
    }
    if (!registered)
        throw Error(Err::AuthorizationError,
                    "sensor " + sensor.pk.hex() + " has no genesis chain at " + prev_tip.hex());

    DataAnchorTx tx = build_data_anchor(sensor, prev_tip, receipt.payload_hash);
    submit(tx);
    return tx;
}

} // namespace claimchain
