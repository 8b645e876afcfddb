// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "claimchain/bench.hpp"
#include "claimchain/scenario.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>

using namespace claimchain;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& tag)
{
    fs::path dir = fs::temp_directory_path() / ("claimchain-scn-" + tag);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("the script parser handles quotes, comments, kwargs and flags")
{
    ScenarioScript s = ScenarioScript::parse("# full-line comment\n"
                                             "\n"
                                             "keygen user alice # trailing comment\n"
                                             "claim alice acme \"two words # not a comment\" "
                                             "data=64 withhold\n");
    REQUIRE(s.steps.size() == 2);
    CHECK(s.steps[0].action == "keygen");
    CHECK(s.steps[0].args == std::vector<std::string>{"user", "alice"});
    CHECK(s.steps[0].line_no == 3);
    CHECK(s.steps[1].args ==
          std::vector<std::string>{"alice", "acme", "two words # not a comment"});
    CHECK(s.steps[1].kwargs.at("data") == "64");
    CHECK(s.steps[1].kwargs.at("withhold") == "true");

    CHECK_THROWS_AS(ScenarioScript::parse("claim alice \"unterminated\n"), ScenarioError);
}

TEST_CASE("an empty script runs to an empty ledger")
{
    fs::path dir = fresh_dir("empty");
    ScenarioResult r = run_scenario(ScenarioScript::parse(""), dir);
    CHECK(r.blocks == 0);
    CHECK(r.kind_census.empty());
    Ledger ledger = Ledger::load_jsonl(r.ledger_path);
    CHECK(ledger.blocks().empty());
    fs::remove_all(dir);
}

TEST_CASE("the bundled demo exercises every transaction kind")
{
    fs::path dir = fresh_dir("demo");
    ScenarioScript script = ScenarioScript::load(fs::path(SCENARIO_DIR) / "demo.bis");
    ScenarioResult r = run_scenario(script, dir);

    for (const char* kind : {"negotiation", "contract", "sensor_genesis", "data_anchor",
                             "claim_request", "data_access", "decision"})
    {
        CAPTURE(kind);
        CHECK(r.kind_census[kind] >= 1); // the seven core kinds
    }
    CHECK(r.kind_census["policy_advert"] >= 1);
    CHECK(r.kind_census["court_decision"] >= 1);

    Ledger ledger = Ledger::load_jsonl(r.ledger_path);
    CHECK(ledger.verify().ok());

    // the chain query the inspect command answers equals the scan oracle
    std::vector<TxId> contracts;
    for (const Block& b : ledger.blocks())
        for (const Transaction& tx : b.txs)
            if (std::holds_alternative<ContractTx>(tx))
                contracts.push_back(tid_of(tx));
    REQUIRE(!contracts.empty());
    for (const TxId& sct : contracts)
        CHECK(testsupport::tids_of(ledger.walk_contract_chain(sct)) ==
              testsupport::oracle_contract_chain(ledger, sct));
    fs::remove_all(dir);
}

TEST_CASE("claiming before contracting fails at the claim step")
{
    fs::path dir = fresh_dir("early-claim");
    ScenarioScript script = ScenarioScript::parse("keygen user alice\n"
                                                  "keygen insurer acme\n"
                                                  "claim alice acme \"too early\"\n");
    try
    {
        run_scenario(script, dir);
        REQUIRE(false);
    }
    catch (const ScenarioError& e)
    {
        CHECK(e.step_no() == 3);
        CHECK(e.line_no() == 3);
    }
    fs::remove_all(dir);
}

TEST_CASE("undeclared actors and unknown actions fail with their step number")
{
    fs::path dir = fresh_dir("bad-steps");
    try
    {
        run_scenario(ScenarioScript::parse("keygen user alice\nadvertise ghost vehicle\n"), dir);
        REQUIRE(false);
    }
    catch (const ScenarioError& e)
    {
        CHECK(e.step_no() == 2);
    }
    try
    {
        run_scenario(ScenarioScript::parse("frobnicate alice\n"), dir);
        REQUIRE(false);
    }
    catch (const ScenarioError& e)
    {
        CHECK(e.step_no() == 1);
    }
    fs::remove_all(dir);
}

TEST_CASE("negotiation abandonment is reported, not fatal")
{
    fs::path dir = fresh_dir("abandon");
    ScenarioScript script =
        ScenarioScript::parse("keygen user alice\n"
                              "keygen insurer acme\n"
                              "advertise acme vehicle\n"
                              "negotiate alice acme \"lowball\" accept_round=99 cap=4\n");
    ScenarioResult r = run_scenario(script, dir);
    CHECK(r.kind_census["negotiation"] == 4);
    CHECK(r.summary.find("abandoned after 4") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("same seed reproduces the ledger byte for byte")
{
    fs::path d1 = fresh_dir("det-1");
    fs::path d2 = fresh_dir("det-2");
    ScenarioScript script = ScenarioScript::load(fs::path(SCENARIO_DIR) / "demo.bis");
    ScenarioResult r1 = run_scenario(script, d1, 42);
    ScenarioResult r2 = run_scenario(script, d2, 42);
    CHECK(slurp(r1.ledger_path) == slurp(r2.ledger_path));

    fs::path d3 = fresh_dir("det-3");
    ScenarioResult r3 = run_scenario(script, d3, 43);
    CHECK(slurp(r1.ledger_path) != slurp(r3.ledger_path));
    fs::remove_all(d1);
    fs::remove_all(d2);
    fs::remove_all(d3);
}

TEST_CASE("bench mines exactly the requested transaction count")
{
    BenchOptions opts;
    opts.n = 30;
    opts.seed = 3;
    opts.work_dir = fresh_dir("bench-count");
    BenchReport r = run_bench(opts);
    CHECK(r.n_mined == 30);
    size_t counted = 0;
    for (const auto& [kind, stats] : r.per_kind)
        counted += stats.count;
    CHECK(counted == 30);
    fs::remove_all(opts.work_dir);
}

TEST_CASE("a single-sample bench collapses percentile onto the mean")
{
    BenchOptions opts;
    opts.n = 1;
    opts.seed = 4;
    opts.work_dir = fresh_dir("bench-one");
    BenchReport r = run_bench(opts);
    CHECK(r.n_mined == 1);
    REQUIRE(r.per_kind.count("contract"));
    const KindStats& s = r.per_kind.at("contract");
    CHECK(s.count == 1);
    CHECK(s.mean_us == doctest::Approx(s.p95_us));
    CHECK(r.mean_us_all == doctest::Approx(r.p95_us_all));
    fs::remove_all(opts.work_dir);
}

TEST_CASE("anchor transactions have the same size for 1 KiB and 1 MiB payloads")
{
    BenchOptions small;
    small.n = 24;
    small.seed = 5;
    small.payload_size = 1024;
    small.work_dir = fresh_dir("bench-small");

    BenchOptions big = small;
    big.payload_size = 1 << 20;
    big.work_dir = fresh_dir("bench-big");

    BenchReport rs = run_bench(small);
    BenchReport rb = run_bench(big);
    const KindStats& a = rs.per_kind.at("data_anchor");
    const KindStats& b = rb.per_kind.at("data_anchor");
    CHECK(a.min_bytes == a.max_bytes); // constant within a run
    CHECK(b.min_bytes == b.max_bytes);
    CHECK(a.min_bytes == b.min_bytes); // and across payload sizes
    CHECK(rs.per_kind.at("claim_request").mean_bytes ==
          rb.per_kind.at("claim_request").mean_bytes);
    fs::remove_all(small.work_dir);
    fs::remove_all(big.work_dir);
}

TEST_CASE("bench repeats with one seed give identical counts and sizes")
{
    BenchOptions opts;
    opts.n = 36;
    opts.seed = 6;
    opts.work_dir = fresh_dir("bench-rep-1");
    BenchReport r1 = run_bench(opts);
    opts.work_dir = fresh_dir("bench-rep-2");
    BenchReport r2 = run_bench(opts);

    CHECK(r1.n_mined == r2.n_mined);
    CHECK(r1.total_bytes == r2.total_bytes);
    REQUIRE(r1.per_kind.size() == r2.per_kind.size());
    for (const auto& [kind, s1] : r1.per_kind)
    {
        const KindStats& s2 = r2.per_kind.at(kind);
        CHECK(s1.count == s2.count);
        CHECK(s1.mean_bytes == s2.mean_bytes);
    }
    fs::remove_all(opts.work_dir);

    nlohmann::json j = report_json(r1);
    CHECK(j.at("n_mined").get<size_t>() == r1.n_mined);
    CHECK(report_text(r1).find("data_anchor") != std::string::npos);
}
