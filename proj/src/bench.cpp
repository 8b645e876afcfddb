// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/bench.hpp"

#include "claimchain/store.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

namespace claimchain {

namespace {

using Clock = std::chrono::steady_clock;

struct Sampler {
    std::map<TxKind, std::vector<double>> times_us;
    std::map<TxKind, std::vector<size_t>> sizes;

    void add(TxKind kind, double us, size_t bytes)
    {
        times_us[kind].push_back(us);
        sizes[kind].push_back(bytes);
    }
};

double percentile(std::vector<double> v, double p)
{
    if (v.empty())
        return 0;
    std::sort(v.begin(), v.end());
    size_t idx = static_cast<size_t>(std::max<double>(0.0, p * double(v.size()) - 1.0 + 0.5));
    return v[std::min(idx, v.size() - 1)];
}

} // namespace

BenchReport run_bench(const BenchOptions& opts)
{
    if (opts.n < 1)
        throw Error(Err::ConfigError, "bench needs n >= 1");

    auto wall_start = Clock::now();

    NetworkConfig cfg;
    cfg.miners = {"bench-miner"};
    cfg.seed = opts.seed;
    cfg.wait_period_ms = opts.wait_period_ms;
    Network net = Network::spawn(cfg);

    std::filesystem::path store_dir =
        opts.work_dir.empty() ? std::filesystem::temp_directory_path() /
                                    ("claimchain-bench-" + std::to_string(opts.seed))
                              : opts.work_dir;
    std::filesystem::remove_all(store_dir);
    OffchainStore store(store_dir);

    // one user and one insurer generate the whole load
    Party& user = net.add_party(Role::User, "bench-user");
    Party& insurer = net.add_party(Role::Insurer, "bench-insurer");
    PartyKeys ik = insurer.identity_keys();
    PartyKeys uk = user.keys_for(ik.pk);

    Sampler sampler;
    size_t produced = 0;
    size_t contract_no = 0;
    size_t groups_since_flush = 0;

    // measure build + validate, then hand the transaction to the mempool
    auto emit = [&](Transaction tx, Clock::time_point t0) {
        ValidationResult vr = validate_tx(tx, net.view(), net.ledger().court_registry());
        auto t1 = Clock::now();
        if (!vr)
            throw Error(vr.reason, "bench generated an invalid transaction: " + vr.detail);
        double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
        sampler.add(kind_of(tx), us, encode_tx(tx).size());
        net.submit(std::move(tx));
        ++produced;
    };

    while (produced < opts.n)
    {
        ++contract_no;
        Keypair sensor = keypair_from_seed(digest(ByteView(net.random_bytes(32))).bytes);
        PartyKeys sk{sensor.pk, sensor.sk};

        // contract
        auto t0 = Clock::now();
        ContractTx sct = build_contract(
            uk, ik, as_bytes("policy terms for contract " + std::to_string(contract_no)));
        emit(sct, t0);
        if (produced >= opts.n)
            break;

        // sensor genesis
        t0 = Clock::now();
        SensorGenesisTx gen = build_sensor_genesis(uk, ik, sk.pk, sct.t_id);
        emit(gen, t0);
        if (produced >= opts.n)
            break;

        // anchors: payload to the store, hash to the chain
        TxId sensor_tip = gen.t_id;
        size_t remaining = opts.n - produced;
        size_t anchors = std::min(opts.anchors_per_contract, remaining > 3 ? remaining - 3
                                                                           : remaining);
        for (size_t a = 0; a < anchors; ++a)
        {
            Bytes payload = net.random_bytes(opts.payload_size);
            StoreReceipt receipt = store.put_record(sk.pk, payload, net.clock() + a);
            t0 = Clock::now();
            DataAnchorTx anchor = build_data_anchor(sk, sensor_tip, receipt.payload_hash);
            sensor_tip = anchor.t_id;
            emit(anchor, t0);
        }
        if (produced >= opts.n)
            break;

        // claim
        t0 = Clock::now();
        ClaimRequestTx cr = build_claim(uk, ik.pk, net.view(), sensor_tip,
                                        as_bytes("claim on contract " +
                                                 std::to_string(contract_no)),
                                        std::nullopt);
        emit(cr, t0);
        if (produced >= opts.n)
            break;

        // access grant
        t0 = Clock::now();
        DataAccessTx dat = build_access(ik, uk, net.view(), cr.t_id,
                                        AccessScope{{sk.pk}, 0, UINT64_MAX});
        emit(dat, t0);
        if (produced >= opts.n)
            break;

        // decision
        t0 = Clock::now();
        DecisionTx dt = build_decision(ik, uk, net.view(), dat.t_id, Verdict::Approved,
                                       100 + contract_no % 900,
                                       digest(std::string_view("bench rationale")));
        emit(dt, t0);

        if (++groups_since_flush >= 50)
        {
            net.run_for(net.wait_period());
            groups_since_flush = 0;
        }
    }

    net.settle();

    BenchReport report;
    report.n_requested = opts.n;
    report.n_mined = net.ledger().tx_count();
    report.blocks = net.ledger().blocks().size();
    report.payload_size = opts.payload_size;
    report.seed = opts.seed;

    std::vector<double> all_times;
    for (const auto& [kind, times] : sampler.times_us)
    {
        KindStats stats;
        stats.count = times.size();
        stats.mean_us = std::accumulate(times.begin(), times.end(), 0.0) / double(times.size());
        stats.p95_us = percentile(times, 0.95);
        const auto& sizes = sampler.sizes[kind];
        stats.mean_bytes = std::accumulate(sizes.begin(), sizes.end(), size_t{0}) /
                           double(sizes.size());
        stats.min_bytes = *std::min_element(sizes.begin(), sizes.end());
        stats.max_bytes = *std::max_element(sizes.begin(), sizes.end());
        report.per_kind[tx_kind_name(kind)] = stats;
        all_times.insert(all_times.end(), times.begin(), times.end());
        report.total_bytes += std::accumulate(sizes.begin(), sizes.end(), size_t{0});
    }
    report.mean_us_all =
        all_times.empty() ? 0
                          : std::accumulate(all_times.begin(), all_times.end(), 0.0) /
                                double(all_times.size());
    report.p95_us_all = percentile(all_times, 0.95);
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();

    if (opts.work_dir.empty())
        std::filesystem::remove_all(store_dir);
    return report;
}

std::string report_text(const BenchReport& report)
{
    std::ostringstream out;
    char line[160];
    out << "transactions: " << report.n_mined << " mined / " << report.n_requested
        << " requested in " << report.blocks << " block(s)\n";
    std::snprintf(line, sizeof(line),
                  "payload: %llu B off-chain per anchor, seed %llu, wall %.2f s\n",
                  static_cast<unsigned long long>(report.payload_size),
                  static_cast<unsigned long long>(report.seed), report.wall_seconds);
    out << line;
    std::snprintf(line, sizeof(line), "%-16s %8s %12s %12s %12s %8s %8s\n", "kind", "count",
                  "mean us", "p95 us", "mean bytes", "min B", "max B");
    out << line;
    for (const auto& [kind, s] : report.per_kind)
    {
        std::snprintf(line, sizeof(line), "%-16s %8zu %12.1f %12.1f %12.1f %8zu %8zu\n",
                      kind.c_str(), s.count, s.mean_us, s.p95_us, s.mean_bytes, s.min_bytes,
                      s.max_bytes);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-16s %8zu %12.1f %12.1f   total bytes %zu\n", "all",
                  report.n_mined, report.mean_us_all, report.p95_us_all, report.total_bytes);
    out << line;
    return out.str();
}

nlohmann::json report_json(const BenchReport& report)
{
    nlohmann::json per_kind = nlohmann::json::object();
    for (const auto& [kind, s] : report.per_kind)
        per_kind[kind] = {{"count", s.count},       {"mean_us", s.mean_us},
                          {"p95_us", s.p95_us},     {"mean_bytes", s.mean_bytes},
                          {"min_bytes", s.min_bytes}, {"max_bytes", s.max_bytes}};
    return {{"n_requested", report.n_requested},
            {"n_mined", report.n_mined},
            {"blocks", report.blocks},
            {"payload_size", report.payload_size},
            {"seed", report.seed},
            {"wall_seconds", report.wall_seconds},
            {"mean_us_all", report.mean_us_all},
            {"p95_us_all", report.p95_us_all},
            {"total_bytes", report.total_bytes},
            {"per_kind", per_kind}};
}

} // namespace claimchain
