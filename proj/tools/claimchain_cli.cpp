// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/bench.hpp"
#include "claimchain/scenario.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace claimchain;

namespace {

fs::path data_root(const std::string& flag_value)
{
    if (!flag_value.empty())
        return flag_value;
    if (const char* env = std::getenv("CLAIMCHAIN_DATA"))
        return env;
    return fs::current_path() / "claimchain-data";
}

int cmd_init(const fs::path& root)
{
    fs::create_directories(root / "keys");
    fs::create_directories(root / "out");
    fs::create_directories(root / "store");
    std::cout << "initialized data root at " << root.string() << "\n";
    return 0;
}

int cmd_keygen(const fs::path& root, const std::string& name)
{
    fs::create_directories(root / "keys");
    Keypair kp = generate_keypair();
    fs::path pk_path = root / "keys" / (name + ".pk");
    fs::path sk_path = root / "keys" / (name + ".sk");
    save_public_key(pk_path, kp.pk);
    save_secret_key(sk_path, kp.sk);
    std::cout << name << " pk " << kp.pk.hex() << "\n"
              << "wrote " << pk_path.string() << " and " << sk_path.string() << "\n";
    return 0;
}

int cmd_run(const fs::path& root, const std::string& script_path, uint64_t seed,
            uint64_t wait_period, std::string out_flag)
{
    fs::path out_dir = out_flag.empty()
                           ? root / "out" / fs::path(script_path).stem()
                           : fs::path(out_flag);
    ScenarioScript script = ScenarioScript::load(script_path);
    ScenarioResult result = run_scenario(script, out_dir, seed, wait_period);
    std::cout << result.summary;
    std::cout << "ledger:  " << result.ledger_path.string() << "\n"
              << "trace:   " << result.trace_path.string() << "\n"
              << "summary: " << (out_dir / "summary.txt").string() << "\n";
    return 0;
}

int cmd_bench(const fs::path& root, const BenchOptions& opts, const std::string& json_path)
{
    BenchOptions with_dir = opts;
    if (with_dir.work_dir.empty())
        with_dir.work_dir = root / "store" / ("bench-" + std::to_string(opts.seed));
    BenchReport report = run_bench(with_dir);
    std::cout << report_text(report);
    if (!json_path.empty())
    {
        std::ofstream out(json_path, std::ios::binary | std::ios::trunc);
        out << report_json(report).dump(2) << "\n";
        std::cout << "json report: " << json_path << "\n";
    }
    return 0;
}

int cmd_inspect(const std::string& ledger_path, const std::string& query)
{
    Ledger ledger = Ledger::load_jsonl(ledger_path);
    VerificationReport report = ledger.verify();
    if (!report.ok())
    {
        std::cerr << "ledger verification FAILED at block " << report.first_failure->height
                  << ": " << report.first_failure->what << "\n";
        return 2;
    }
    std::cout << "ledger verified: " << ledger.blocks().size() << " block(s), "
              << ledger.tx_count() << " transaction(s)\n";

    if (query.rfind("chain:", 0) == 0)
    {
        TxId sct = TxId::from_hex(query.substr(6));
        auto members = ledger.walk_contract_chain(sct);
        std::cout << "contract chain of " << sct.hex() << " (" << members.size() << " txs):\n";
        for (const Transaction* tx : members)
            std::cout << "  " << tx_to_json(*tx).dump() << "\n";
    }
    else if (query.rfind("policies:", 0) == 0)
    {
        auto adverts = ledger.find_policies(query.substr(9));
        std::cout << adverts.size() << " matching advert(s):\n";
        for (const PolicyAdvertTx* advert : adverts)
            std::cout << "  " << tx_to_json(Transaction{*advert}).dump() << "\n";
    }
    else
    {
        TxId tid = TxId::from_hex(query.rfind("tid:", 0) == 0 ? query.substr(4) : query);
        const Transaction* tx = ledger.find(tid);
        if (!tx)
        {
            std::cerr << "transaction " << tid.hex() << " not found\n";
            return 1;
        }
        std::cout << tx_to_json(*tx).dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"insurance ledger simulator: scenarios, inspection and benchmarks"};
    app.footer("Data root resolution: --data-root flag, then $CLAIMCHAIN_DATA, then "
               "./claimchain-data");
    app.require_subcommand(1);

    std::string root_flag;
    app.add_option("--data-root", root_flag, "data root directory (overrides $CLAIMCHAIN_DATA)");

    auto* init = app.add_subcommand("init", "create the data root directory layout");

    auto* keygen = app.add_subcommand("keygen", "generate a keypair into <root>/keys");
    std::string key_name;
    keygen->add_option("name", key_name, "key name")->required();

    auto* run = app.add_subcommand("run", "execute a scenario script");
    std::string script_path, run_out;
    uint64_t run_seed = 7, run_wait = 1000;
    run->add_option("script", script_path, "scenario script path")->required();
    run->add_option("--seed", run_seed, "network seed (default 7)");
    run->add_option("--wait-period", run_wait, "miner wait period in virtual ms (default 1000)");
    run->add_option("--out", run_out, "output directory (default <root>/out/<script-stem>)");

    auto* bench = app.add_subcommand("bench", "generate and mine a synthetic workload");
    BenchOptions opts;
    std::string bench_json;
    bench->add_option("--n", opts.n, "transactions to generate (default 12000)");
    bench->add_option("--payload", opts.payload_size,
                      "off-chain payload bytes per anchor (default 1024)");
    bench->add_option("--seed", opts.seed, "workload seed (default 1)");
    bench->add_option("--anchors", opts.anchors_per_contract,
                      "anchor transactions per contract (default 7)");
    bench->add_option("--wait-period", opts.wait_period_ms,
                      "miner wait period in virtual ms (default 1000)");
    bench->add_option("--json", bench_json, "also write the report as JSON to this path");

    auto* inspect = app.add_subcommand("inspect", "verify a ledger file and query it");
    std::string ledger_path, query;
    inspect->add_option("ledger", ledger_path, "ledger JSON-lines file")->required();
    inspect
        ->add_option("query", query,
                     "<tid-hex> | tid:<tid-hex> | chain:<sct-tid-hex> | policies:<keyword>")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        fs::path root = data_root(root_flag);
        if (init->parsed())
            return cmd_init(root);
        if (keygen->parsed())
            return cmd_keygen(root, key_name);
        if (run->parsed())
            return cmd_run(root, script_path, run_seed, run_wait, run_out);
        if (bench->parsed())
            return cmd_bench(root, opts, bench_json);
        if (inspect->parsed())
            return cmd_inspect(ledger_path, query);
    }
    catch (const ScenarioError& e)
    {
        std::cerr << "error at " << e.what() << "\n";
        return 1;
    }
    catch (const Error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
