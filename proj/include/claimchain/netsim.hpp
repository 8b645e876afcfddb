// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/chain.hpp"
#include "claimchain/party.hpp"
#include "claimchain/store.hpp"

#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <unordered_set>

#include "json.hpp"

namespace claimchain {

struct TraceEvent {
    uint64_t at = 0;
    std::string kind; // submit | reject | block | state | note
    nlohmann::json data;
};

struct SimulationTrace {
    std::vector<TraceEvent> events;

    void add(uint64_t at, std::string kind, nlohmann::json data)
    {
        events.push_back({at, std::move(kind), std::move(data)});
    }
    void save_jsonl(const std::filesystem::path& p) const;
};

struct PartySpec {
    Role role;
    std::string name;
};

struct NetworkConfig {
    std::vector<PartySpec> parties;
    std::vector<std::string> miners; // at least one
    uint64_t wait_period_ms = 1000;
    uint64_t seed = 0;
};

// In-process single-threaded simulation: parties submit transactions into
// a shared mempool; recurring mine attempts every wait period pick an
// eligible miner round-robin (by key order) and drain the mempool into
// one block. Virtual milliseconds only; a fixed seed makes whole runs,
// ledgers included, byte-identical.
class Network {
  public:
    static Network spawn(const NetworkConfig& config);

    // Joining needs no authorization, before or during a run.
    Party& add_party(Role role, const std::string& name);
    Party* party(const std::string& name);
    Party& require_party(const std::string& name);

    // Admission runs against ledger + mempool; failures throw with the
    // validator's reason, duplicates with Err::DuplicateTx.
    TxId submit(Transaction tx);

    void run_until(uint64_t t_end);
    void run_for(uint64_t dt) { run_until(clock_ + dt); }

    // Runs until every pending transaction is mined (a few wait periods);
    // throws if the mempool fails to drain.
    void settle(size_t max_periods = 8);

    void schedule_action(uint64_t at, std::function<void(Network&)> action);
    // Periodic readings: stores a payload and anchors its hash, `count`
    // times, every `period_ms`, starting one period from now.
    void schedule_sensor_readings(const std::string& sensor_name, OffchainStore& store,
                                  uint64_t period_ms, size_t count, size_t payload_size);

    uint64_t clock() const { return clock_; }
    uint64_t wait_period() const { return miner_clock_.wait_period_ms; }
    uint64_t seed() const { return seed_; }
    size_t mempool_size() const { return mempool_.size(); }
    const Ledger& ledger() const { return ledger_; }
    Ledger& ledger() { return ledger_; }
    const std::vector<PublicKey>& miners() const { return miner_pks_; }
    SimulationTrace& trace() { return trace_; }
    const SimulationTrace& trace() const { return trace_; }

    // Ledger-plus-mempool view used for admission and for building
    // transactions that chain onto not-yet-mined parents.
    const LedgerView& view() const { return view_; }

    // Deterministic per-network byte stream for scripted payloads.
    Bytes random_bytes(size_t n);

    // Tip of a sensor's (or evidence provider's) own anchor chain,
    // tracked across mempool and ledger.
    std::optional<TxId> sensor_tip(const PublicKey& sensor_pk) const;

  private:
    explicit Network(const NetworkConfig& config);

    struct Event {
        uint64_t at;
        uint64_t seq;
        enum class Kind { MineAttempt, SubmitTx, SensorReading, PartyAction } kind;
        Transaction tx;                        // SubmitTx
        std::function<void(Network&)> action;  // PartyAction / SensorReading
    };

    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.at != b.at ? a.at < b.at : a.seq < b.seq;
        }
    };

    class PoolView : public LedgerView {
      public:
        explicit PoolView(const Network& net) : net_(net) {}
        const Transaction* find(const TxId& tid) const override;
        std::vector<const Transaction*> contract_members(const TxId& sct_tid) const override;
        std::optional<uint64_t> tx_time_ms(const TxId& tid) const override;

      private:
        const Network& net_;
    };

    void push_event(Event ev);
    void mine_attempt(uint64_t now);
    std::array<uint8_t, 32> derive_party_seed(const std::string& name) const;

    uint64_t seed_;
    uint64_t clock_ = 0;
    uint64_t next_seq_ = 0;
    std::deque<Party> parties_; // deque: stable references across add_party
    std::vector<PublicKey> miner_pks_; // sorted by key order
    size_t next_miner_ = 0;
    std::vector<Transaction> mempool_;
    std::unordered_map<TxId, size_t> mempool_index_; // tid -> mempool_ position
    std::map<PublicKey, TxId> sensor_tips_;
    Ledger ledger_;
    MinerClock miner_clock_;
    std::multiset<Event, EventOrder> queue_;
    SimulationTrace trace_;
    PoolView view_{*this};
    std::mt19937_64 rng_;
};

} // namespace claimchain
