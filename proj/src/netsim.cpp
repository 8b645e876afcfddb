// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/netsim.hpp"

#include <algorithm>
#include <fstream>

namespace claimchain {

const char* role_name(Role r)
{
    switch (r)
    {
    case Role::User: return "user";
    case Role::Insurer: return "insurer";
    case Role::Court: return "court";
    case Role::Sensor: return "sensor";
    }
    return "unknown";
}

void SimulationTrace::save_jsonl(const std::filesystem::path& p) const
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Err::IoError, "cannot write " + p.string());
    for (const TraceEvent& ev : events)
    {
        nlohmann::json j;
        j["at"] = ev.at;
        j["event"] = ev.kind;
        j["data"] = ev.data;
        out << j.dump() << "\n";
    }
}

Network::Network(const NetworkConfig& config)
    : seed_(config.seed), rng_(config.seed ^ 0x9e3779b97f4a7c15ull)
{
    miner_clock_.wait_period_ms = config.wait_period_ms;
}

Network Network::spawn(const NetworkConfig& config)
{
    if (config.miners.empty())
        throw Error(Err::ConfigError, "a network needs at least one miner");
    if (config.wait_period_ms == 0)
        throw Error(Err::ConfigError, "wait period must be positive");

    Network net(config);
    for (const PartySpec& spec : config.parties)
        net.add_party(spec.role, spec.name);

    for (const std::string& name : config.miners)
    {
        Encoder enc;
        enc.raw_u64(config.seed);
        enc.raw(as_bytes("miner:"));
        enc.raw(as_bytes(name));
        net.miner_pks_.push_back(keypair_from_seed(digest(enc.bytes()).bytes).pk);
    }
    std::sort(net.miner_pks_.begin(), net.miner_pks_.end());

    // Recurring mine-attempt stream, one attempt per wait period.
    net.push_event(Event{net.miner_clock_.wait_period_ms, net.next_seq_++,
                         Event::Kind::MineAttempt, {}, nullptr});
    return net;
}

Party& Network::add_party(Role role, const std::string& name)
{
    if (party(name))
        throw Error(Err::ConfigError, "party " + name + " already exists");
    parties_.emplace_back(role, name, KeyRing(name, seed_));
    Party& p = parties_.back();
    if (role == Role::Court)
        ledger_.register_court(p.identity());
    return p;
}

Party* Network::party(const std::string& name)
{
    for (Party& p : parties_)
        if (p.account_id == name)
            return &p;
    return nullptr;
}

Party& Network::require_party(const std::string& name)
{
    Party* p = party(name);
    if (!p)
        throw Error(Err::NotFound, "unknown party " + name);
    return *p;
}

const Transaction* Network::PoolView::find(const TxId& tid) const
{
    if (const Transaction* tx = net_.ledger_.find(tid))
        return tx;
    auto it = net_.mempool_index_.find(tid);
    if (it != net_.mempool_index_.end())
        return &net_.mempool_[it->second];
    return nullptr;
}

std::vector<const Transaction*> Network::PoolView::contract_members(const TxId& sct_tid) const
{
    auto members = net_.ledger_.contract_members(sct_tid);
    if (members.empty())
    {
        const Transaction* head = find(sct_tid);
        if (!head || kind_of(*head) != TxKind::Contract)
            return {};
        members.push_back(head);
    }
    for (const Transaction& tx : net_.mempool_)
    {
        if (tid_of(tx) == sct_tid)
            continue;
        if (resolve_contract_head(*this, tid_of(tx)) == std::optional<TxId>(sct_tid))
            members.push_back(&tx);
    }
    return members;
}

std::optional<uint64_t> Network::PoolView::tx_time_ms(const TxId& tid) const
{
    return net_.ledger_.tx_time_ms(tid);
}

TxId Network::submit(Transaction tx)
{
    TxId tid = tid_of(tx);
    if (ledger_.contains(tid) || mempool_index_.count(tid))
    {
        trace_.add(clock_, "reject",
                   {{"t_id", tid.hex()}, {"reason", err_name(Err::DuplicateTx)}});
        throw Error(Err::DuplicateTx, "transaction " + tid.hex() + " already known");
    }
    ValidationResult vr = validate_tx(tx, view_, ledger_.court_registry());
    if (!vr)
    {
        trace_.add(clock_, "reject",
                   {{"t_id", tid.hex()},
                    {"kind", tx_kind_name(kind_of(tx))},
                    {"reason", err_name(vr.reason)},
                    {"detail", vr.detail}});
        throw Error(vr.reason, vr.detail);
    }

    if (const auto* gen = std::get_if<SensorGenesisTx>(&tx))
        sensor_tips_[gen->sensor_pk] = tid;
    else if (const auto* anchor = std::get_if<DataAnchorTx>(&tx))
        sensor_tips_[anchor->sensor_pk] = tid;

    trace_.add(clock_, "submit", {{"t_id", tid.hex()}, {"kind", tx_kind_name(kind_of(tx))}});
    mempool_index_.emplace(tid, mempool_.size());
    mempool_.push_back(std::move(tx));
    return tid;
}

std::optional<TxId> Network::sensor_tip(const PublicKey& sensor_pk) const
{
    auto it = sensor_tips_.find(sensor_pk);
    if (it == sensor_tips_.end())
        return std::nullopt;
    return it->second;
}

void Network::push_event(Event ev)
{
    queue_.insert(std::move(ev));
}

void Network::mine_attempt(uint64_t now)
{
    if (mempool_.empty() || miner_pks_.empty())
        return;
    size_t n = miner_pks_.size();
    for (size_t i = 0; i < n; ++i)
    {
        size_t idx = (next_miner_ + i) % n;
        const PublicKey& miner = miner_pks_[idx];
        if (!may_mine(miner_clock_, miner, now))
            continue;
        next_miner_ = (idx + 1) % n;
        const Block& b = ledger_.append_block(std::move(mempool_), miner, now, miner_clock_);
        mempool_.clear();
        mempool_index_.clear();
        nlohmann::json tids = nlohmann::json::array();
        for (const TxId& tid : b.tx_ids())
            tids.push_back(tid.hex());
        trace_.add(now, "block",
                   {{"height", b.height},
                    {"hash", b.block_hash.hex()},
                    {"miner", miner.hex()},
                    {"txs", tids}});
        return;
    }
}

void Network::run_until(uint64_t t_end)
{
    if (t_end < clock_)
        throw Error(Err::ConfigError, "cannot run the clock backwards");
    while (!queue_.empty() && queue_.begin()->at <= t_end)
    {
        Event ev = std::move(queue_.extract(queue_.begin()).value());
        clock_ = ev.at;
        switch (ev.kind)
        {
        case Event::Kind::MineAttempt:
            mine_attempt(ev.at);
            push_event(Event{ev.at + miner_clock_.wait_period_ms, next_seq_++,
                             Event::Kind::MineAttempt, {}, nullptr});
            break;
        case Event::Kind::SubmitTx:
            try
            {
                submit(std::move(ev.tx));
            }
            catch (const Error&)
            {
                // rejection is already on the trace
            }
            break;
        case Event::Kind::SensorReading:
        case Event::Kind::PartyAction:
            if (ev.action)
                ev.action(*this);
            break;
        }
    }
    clock_ = std::max(clock_, t_end);
}

void Network::settle(size_t max_periods)
{
    for (size_t i = 0; i < max_periods; ++i)
    {
        if (mempool_.empty())
            return;
        run_for(miner_clock_.wait_period_ms);
    }
    if (!mempool_.empty())
        throw Error(Err::InvariantViolation, "mempool failed to drain");
}

void Network::schedule_action(uint64_t at, std::function<void(Network&)> action)
{
    push_event(Event{at, next_seq_++, Event::Kind::PartyAction, {}, std::move(action)});
}

void Network::schedule_sensor_readings(const std::string& sensor_name, OffchainStore& store,
                                       uint64_t period_ms, size_t count, size_t payload_size)
{
    for (size_t i = 1; i <= count; ++i)
    {
        auto action = [sensor_name, &store, payload_size](Network& net) {
            Party& sensor = net.require_party(sensor_name);
            PartyKeys keys = sensor.identity_keys();
            auto tip = net.sensor_tip(keys.pk);
            if (!tip)
            {
                net.trace_.add(net.clock_, "note",
                               {{"sensor", sensor_name}, {"skipped", "no genesis"}});
                return;
            }
            Bytes payload = net.random_bytes(payload_size);
            StoreReceipt receipt = store.put_record(keys.pk, payload, net.clock());
            anchor_record(keys, net.view(), receipt, *tip,
                          [&](Transaction tx) { net.submit(std::move(tx)); });
        };
        push_event(Event{clock_ + i * period_ms, next_seq_++, Event::Kind::SensorReading, {},
                         std::move(action)});
    }
}

Bytes Network::random_bytes(size_t n)
{
    Bytes out(n);
    for (size_t i = 0; i < n; ++i)
        out[i] = static_cast<uint8_t>(rng_());
    return out;
}

} // namespace claimchain
