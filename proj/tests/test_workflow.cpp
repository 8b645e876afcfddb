// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "claimchain/workflow.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <set>

using namespace claimchain;
namespace fs = std::filesystem;

namespace {

struct World {
    fs::path dir;
    Network net;
    OffchainStore store;
    InsurerDb db;
    AccountBook accounts;

    explicit World(uint64_t seed = 7, std::vector<PartySpec> extra = {})
        : dir(fs::temp_directory_path() / ("claimchain-wf-" + std::to_string(seed))),
          net(spawn(seed, std::move(extra))), store((fs::remove_all(dir), dir))
    {
        accounts.deposit("acme", 10000);
        accounts.deposit("alice", 100);
    }
    ~World() { fs::remove_all(dir); }

    static Network spawn(uint64_t seed, std::vector<PartySpec> extra)
    {
        NetworkConfig cfg;
        cfg.parties = {{Role::User, "alice"},
                       {Role::Insurer, "acme"},
                       {Role::Court, "themis"},
                       {Role::Sensor, "cam"}};
        for (auto& spec : extra)
            cfg.parties.push_back(spec);
        cfg.miners = {"m1"};
        cfg.seed = seed;
        return Network::spawn(cfg);
    }

    Party& alice() { return net.require_party("alice"); }
    Party& acme() { return net.require_party("acme"); }
    Party& themis() { return net.require_party("themis"); }
    Party& cam() { return net.require_party("cam"); }

    void advertise()
    {
        PolicyAdvertTx ad = build_policy_advert(acme().identity_keys(), {"vehicle", "home"},
                                                digest(std::string_view("full details")));
        net.submit(ad);
        net.settle();
    }

    Establishment contract_with_sensor()
    {
        advertise();
        auto outcome = negotiate(net, alice(), acme(), to_bytes("cover my car"),
                                 [](size_t, const Bytes&) { return std::nullopt; }, 10);
        REQUIRE(outcome.agreed);
        return establish_contract(net, alice(), acme(), db, outcome.condition, {&cam()},
                                  "vehicle");
    }

    // puts + anchors n sensor readings, returns the payload bytes
    std::vector<Bytes> feed_sensor(size_t n)
    {
        std::vector<Bytes> payloads;
        PartyKeys sk = cam().identity_keys();
        for (size_t i = 0; i < n; ++i)
        {
            Bytes payload = net.random_bytes(64 + i);
            payloads.push_back(payload);
            StoreReceipt r = store.put_record(sk.pk, payload, net.clock() + i);
            auto tip = net.sensor_tip(sk.pk);
            REQUIRE(tip);
            anchor_record(sk, net.view(), r, *tip, [&](Transaction tx) { net.submit(tx); });
        }
        net.settle();
        return payloads;
    }

    ClaimCase verified_claim()
    {
        auto outcome = lodge_and_verify_claim(net, alice(), acme(), db, as_bytes("rear damage"));
        REQUIRE(outcome.claim);
        REQUIRE(outcome.claim->state == CaseState::Verified);
        return *outcome.claim;
    }

    AccessScope full_scope() { return AccessScope{{cam().identity()}, 0, UINT64_MAX}; }
};

} // namespace

TEST_CASE("negotiation terminates by acceptance or by the round cap")
{
    SUBCASE("first offer accepted: one transaction, agreement")
    {
        World w(21);
        w.advertise();
        auto outcome = negotiate(w.net, w.alice(), w.acme(), to_bytes("opening"),
                                 [](size_t, const Bytes&) { return std::nullopt; }, 10);
        CHECK(outcome.agreed);
        CHECK(outcome.rounds() == 1);
        CHECK(outcome.condition == to_bytes("opening"));
        CHECK(w.net.ledger().contains(outcome.nt_tids[0]));
    }
    SUBCASE("three counter-offers then acceptance: four transactions in ledger order")
    {
        World w(22);
        w.advertise();
        auto policy = [](size_t round, const Bytes& last) -> std::optional<Bytes> {
            if (round >= 4)
                return std::nullopt;
            Bytes counter = last;
            counter.push_back(static_cast<uint8_t>('0' + round));
            return counter;
        };
        auto outcome = negotiate(w.net, w.alice(), w.acme(), to_bytes("p"), policy, 10);
        CHECK(outcome.agreed);
        CHECK(outcome.rounds() == 4);
        CHECK(outcome.condition == to_bytes("p123"));

        // mined in posting order
        std::vector<TxId> mined;
        for (const Block& b : w.net.ledger().blocks())
            for (const Transaction& tx : b.txs)
                if (std::holds_alternative<NegotiationTx>(tx))
                    mined.push_back(tid_of(tx));
        CHECK(mined == outcome.nt_tids);

        // offers alternate between the user key and the insurer key
        const auto* nt1 = std::get_if<NegotiationTx>(w.net.ledger().find(outcome.nt_tids[0]));
        const auto* nt2 = std::get_if<NegotiationTx>(w.net.ledger().find(outcome.nt_tids[1]));
        REQUIRE(nt1);
        REQUIRE(nt2);
        CHECK(nt1->pk != nt2->pk);
        CHECK(nt2->pk == w.acme().identity());
    }
    SUBCASE("a responder that never accepts abandons at the cap")
    {
        World w(23);
        w.advertise();
        size_t calls = 0;
        auto never = [&calls](size_t, const Bytes& last) -> std::optional<Bytes> {
            ++calls;
            Bytes counter = last;
            counter.push_back('x');
            return counter;
        };
        auto outcome = negotiate(w.net, w.alice(), w.acme(), to_bytes("opening"), never, 10);
        CHECK_FALSE(outcome.agreed);
        CHECK(outcome.rounds() == 10);
    }
    SUBCASE("an insurer without adverts cannot be negotiated with")
    {
        World w(24);
        CHECK_THROWS_AS(negotiate(w.net, w.alice(), w.acme(), to_bytes("opening"),
                                  [](size_t, const Bytes&) { return std::nullopt; }, 10),
                        Error);
    }
}

TEST_CASE("contract establishment mines the contract, geneses and customer record")
{
    SUBCASE("no sensors")
    {
        World w(31);
        w.advertise();
        auto outcome = negotiate(w.net, w.alice(), w.acme(), to_bytes("basic"),
                                 [](size_t, const Bytes&) { return std::nullopt; }, 5);
        Establishment est =
            establish_contract(w.net, w.alice(), w.acme(), w.db, outcome.condition, {}, "home");
        CHECK(w.net.ledger().contains(est.sct.t_id));
        CHECK(est.sensor_geneses.empty());
        CHECK(est.record.sensor_pks.empty());
        CHECK(w.db.size() == 1);
    }
    SUBCASE("three sensors, each genesis referencing the contract")
    {
        World w(32, {{Role::Sensor, "cam2"}, {Role::Sensor, "cam3"}});
        w.advertise();
        auto outcome = negotiate(w.net, w.alice(), w.acme(), to_bytes("rich"),
                                 [](size_t, const Bytes&) { return std::nullopt; }, 5);
        std::vector<Party*> sensors{&w.cam(), &w.net.require_party("cam2"),
                                    &w.net.require_party("cam3")};
        Establishment est = establish_contract(w.net, w.alice(), w.acme(), w.db,
                                               outcome.condition, sensors, "vehicle");
        CHECK(est.sensor_geneses.size() == 3);
        for (const SensorGenesisTx& gen : est.sensor_geneses)
        {
            CHECK(gen.sct_ref == est.sct.t_id);
            CHECK(w.net.ledger().contains(gen.t_id));
        }
        CHECK(est.record.sensor_pks.size() == 3);
        CHECK(w.net.ledger().walk_contract_chain(est.sct.t_id).size() == 4);
    }
    SUBCASE("a refused countersignature aborts with nothing mined")
    {
        World w(33);
        w.advertise();
        auto outcome = negotiate(w.net, w.alice(), w.acme(), to_bytes("wary"),
                                 [](size_t, const Bytes&) { return std::nullopt; }, 5);
        size_t before = w.net.ledger().tx_count();
        w.alice().approve = [](const Transaction& tx) {
            return !std::holds_alternative<SensorGenesisTx>(tx);
        };
        CHECK_THROWS_AS(establish_contract(w.net, w.alice(), w.acme(), w.db, outcome.condition,
                                           {&w.cam()}, "vehicle"),
                        Error);
        w.net.run_for(5000);
        CHECK(w.net.ledger().tx_count() == before);
        CHECK(w.db.size() == 0);
        w.alice().approve = nullptr;
    }
}

TEST_CASE("claim lodging verifies the account and the signature")
{
    World w(41);
    Establishment est = w.contract_with_sensor();

    SUBCASE("a customer's claim reaches Verified")
    {
        auto outcome = lodge_and_verify_claim(w.net, w.alice(), w.acme(), w.db,
                                              as_bytes("rear bumper"), std::nullopt);
        REQUIRE(outcome.claim);
        CHECK(outcome.claim->state == CaseState::Verified);
        CHECK(outcome.claim->sct_tid == est.sct.t_id);
        CHECK(w.net.ledger().contains(outcome.claim->claim_tid));
        const auto* cr = std::get_if<ClaimRequestTx>(w.net.ledger().find(outcome.claim->claim_tid));
        REQUIRE(cr);
        CHECK_FALSE(cr->data_hash.has_value());
        // lodged then verified, in that order
        REQUIRE(outcome.claim->history.size() == 2);
        CHECK(outcome.claim->history[0].state == CaseState::Lodged);
        CHECK(outcome.claim->history[1].state == CaseState::Verified);
    }
    SUBCASE("shared data hash rides in the claim")
    {
        Bytes shared = w.net.random_bytes(4096);
        auto outcome = lodge_and_verify_claim(w.net, w.alice(), w.acme(), w.db,
                                              as_bytes("with data"), ByteView(shared));
        REQUIRE(outcome.claim);
        const auto* cr = std::get_if<ClaimRequestTx>(w.net.ledger().find(outcome.claim->claim_tid));
        REQUIRE(cr);
        REQUIRE(cr->data_hash.has_value());
        CHECK(*cr->data_hash == digest(ByteView(shared)));
    }
    SUBCASE("a key unknown to the insurer is NoAccount")
    {
        const auto* on_chain = std::get_if<ContractTx>(w.net.ledger().find(est.sct.t_id));
        REQUIRE(on_chain);
        ClaimRequestTx cr = build_claim(w.alice().keys_for(w.acme().identity()),
                                        w.acme().identity(), w.net.view(), est.sct.t_id,
                                        as_bytes("claim"), std::nullopt);
        InsurerDb empty;
        CHECK(insurer_verify_claim(empty, cr) == ClaimReject::NoAccount);
        CHECK(insurer_verify_claim(w.db, cr) == ClaimReject::None);
    }
    SUBCASE("a corrupted signature is BadSignature")
    {
        ClaimRequestTx cr = build_claim(w.alice().keys_for(w.acme().identity()),
                                        w.acme().identity(), w.net.view(), est.sct.t_id,
                                        as_bytes("claim"), std::nullopt);
        cr.sign.bytes[0] ^= 1;
        CHECK(insurer_verify_claim(w.db, cr) == ClaimReject::BadSignature);
        cr.sign = Signature{};
        CHECK(insurer_verify_claim(w.db, cr) == ClaimReject::BadSignature);
    }
}

TEST_CASE("data access round-trip checks every in-scope record")
{
    SUBCASE("ten clean records reach DataChecked")
    {
        World w(51);
        w.contract_with_sensor();
        w.feed_sensor(10);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        CHECK(c.state == CaseState::DataChecked);
        CHECK_FALSE(c.flagged);
        CHECK(c.integrity_failures.empty());
    }
    SUBCASE("one tampered record flags the case with its locator")
    {
        World w(52);
        w.contract_with_sensor();
        w.feed_sensor(10);
        ClaimCase c = w.verified_claim();

        // corrupt the 4th record on disk
        auto records = w.store.records_for(w.cam().identity(), 0, UINT64_MAX);
        REQUIRE(records.size() == 10);
        fs::path victim = w.dir / "records" / records[3].locator;
        {
            std::fstream io(victim, std::ios::binary | std::ios::in | std::ios::out);
            io.seekp(5);
            io.put('!');
        }

        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        CHECK(c.state == CaseState::AccessGranted); // stuck before DataChecked
        CHECK(c.flagged);
        REQUIRE(c.integrity_failures.size() == 1);
        CHECK(c.integrity_failures[0].locator == records[3].locator);
        CHECK(c.integrity_failures[0].expected != c.integrity_failures[0].actual);
    }
    SUBCASE("a declined request leaves the case Verified")
    {
        World w(53);
        w.contract_with_sensor();
        w.feed_sensor(2);
        ClaimCase c = w.verified_claim();
        w.alice().approve = [](const Transaction& tx) {
            return !std::holds_alternative<DataAccessTx>(tx);
        };
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        CHECK(c.state == CaseState::Verified);
        CHECK(c.note == "user declined the data access request");
        w.alice().approve = nullptr;
    }
}

TEST_CASE("third-party evidence chains into the contract chain")
{
    World w(61, {{Role::User, "police"}});
    w.contract_with_sensor();
    ClaimCase c = w.verified_claim();
    Party& police = w.net.require_party("police");

    DataAnchorTx anchor = record_third_party_evidence(w.net, w.acme(), c, police,
                                                      as_bytes("incident report #77"), w.store);
    CHECK(w.net.ledger().contains(anchor.t_id));
    auto chain = testsupport::tids_of(w.net.ledger().walk_contract_chain(c.sct_tid));
    CHECK(std::find(chain.begin(), chain.end(), anchor.t_id) != chain.end());
    CHECK(chain == testsupport::oracle_contract_chain(w.net.ledger(), c.sct_tid));
    CHECK(c.tip == anchor.t_id);

    CHECK_THROWS_AS(record_third_party_evidence(w.net, w.acme(), c, police, {}, w.store), Error);

    // an unsigned evidence anchor never passes admission
    PartyKeys pk = police.identity_keys();
    StoreReceipt r = w.store.put_record(pk.pk, as_bytes("unsigned blob"), w.net.clock());
    DataAnchorTx unsigned_anchor;
    unsigned_anchor.p_t_id = c.tip;
    unsigned_anchor.data_hash = r.payload_hash;
    unsigned_anchor.sensor_pk = pk.pk;
    unsigned_anchor.t_id = compute_tid(unsigned_anchor);
    CHECK_THROWS_AS(w.net.submit(unsigned_anchor), Error);
}

TEST_CASE("decisions settle, block or dispute")
{
    SUBCASE("approved claims move credits and conserve the total")
    {
        World w(71);
        w.contract_with_sensor();
        w.feed_sensor(3);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);

        int64_t before_total = w.accounts.total();
        decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Approved, 500, w.accounts);
        CHECK(c.state == CaseState::Settled);
        CHECK(w.accounts.balance("acme") == 9500);
        CHECK(w.accounts.balance("alice") == 600);
        CHECK(w.accounts.total() == before_total);

        const auto* dt = std::get_if<DecisionTx>(w.net.ledger().find(c.tip));
        REQUIRE(dt);
        CHECK(dt->decision.verdict == Verdict::Approved);
        CHECK(dt->decision.amount == 500);
    }
    SUBCASE("rejected claims settle without any transfer")
    {
        World w(72);
        w.contract_with_sensor();
        w.feed_sensor(1);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Rejected, 0, w.accounts);
        CHECK(c.state == CaseState::Settled);
        CHECK(w.accounts.balance("acme") == 10000);
        CHECK(w.accounts.balance("alice") == 100);
    }
    SUBCASE("a withheld countersignature disputes the case")
    {
        World w(73);
        w.contract_with_sensor();
        w.feed_sensor(1);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        w.alice().approve = [](const Transaction& tx) {
            return !std::holds_alternative<DecisionTx>(tx);
        };
        decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Rejected, 0, w.accounts);
        CHECK(c.state == CaseState::Disputed);
        CHECK(w.accounts.balance("alice") == 100);
        w.alice().approve = nullptr;
    }
    SUBCASE("an insurer short on funds stays Decided with the reason recorded")
    {
        World w(74);
        w.contract_with_sensor();
        w.feed_sensor(1);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Approved, 99999, w.accounts);
        CHECK(c.state == CaseState::Decided);
        CHECK(c.note == "settlement blocked: insurer balance below award");
        CHECK(w.accounts.balance("acme") == 10000);
    }
    SUBCASE("rejected with an amount is rejected up front")
    {
        World w(75);
        w.contract_with_sensor();
        w.feed_sensor(1);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        CHECK_THROWS_AS(
            decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Rejected, 10, w.accounts),
            Error);
    }
}

TEST_CASE("courts adjudicate disputed cases")
{
    auto disputed_case = [](World& w) {
        w.contract_with_sensor();
        w.feed_sensor(2);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        w.alice().approve = [](const Transaction& tx) {
            return !std::holds_alternative<DecisionTx>(tx);
        };
        decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Rejected, 0, w.accounts);
        w.alice().approve = nullptr;
        REQUIRE(c.state == CaseState::Disputed);
        return c;
    };

    SUBCASE("the court upholds the user and the award transfers")
    {
        World w(81);
        ClaimCase c = disputed_case(w);
        adjudicate_dispute(w.net, w.themis(), w.alice(), w.acme(), c, Verdict::Approved, 500,
                           w.accounts);
        CHECK(c.state == CaseState::Closed);
        CHECK(w.accounts.balance("alice") == 600);
        CHECK(w.accounts.balance("acme") == 9500);
        const auto* ruling = std::get_if<CourtDecisionTx>(w.net.ledger().find(c.tip));
        REQUIRE(ruling);
        CHECK(ruling->court_pk == w.themis().identity());
        // the ruling is chained into the contract chain
        auto chain = testsupport::tids_of(w.net.ledger().walk_contract_chain(c.sct_tid));
        CHECK(std::find(chain.begin(), chain.end(), c.tip) != chain.end());
    }
    SUBCASE("the court upholds the insurer and nothing moves")
    {
        World w(82);
        ClaimCase c = disputed_case(w);
        adjudicate_dispute(w.net, w.themis(), w.alice(), w.acme(), c, Verdict::Rejected, 0,
                           w.accounts);
        CHECK(c.state == CaseState::Closed);
        CHECK(w.accounts.balance("alice") == 100);
        CHECK(w.accounts.balance("acme") == 10000);
    }
    SUBCASE("an unregistered court signer is refused")
    {
        World w(83);
        ClaimCase c = disputed_case(w);
        Party& fake = w.net.add_party(Role::User, "fake-court");
        CHECK_THROWS_AS(adjudicate_dispute(w.net, fake, w.alice(), w.acme(), c,
                                           Verdict::Approved, 500, w.accounts),
                        Error);
        CHECK(c.state == CaseState::Disputed);
    }
}

TEST_CASE("history tokens round-trip into reports")
{
    SUBCASE("a settled claim appears in the report")
    {
        World w(91, {{Role::Insurer, "zenith"}});
        w.contract_with_sensor();
        w.feed_sensor(2);
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Approved, 500, w.accounts);

        HistoryToken token =
            issue_history_token(w.net, w.acme(), w.db, c.sct_tid, as_bytes("clean history"));
        HistoryReport report = verify_history_token(token, w.net.ledger());
        CHECK(report.policy_type == "vehicle");
        CHECK(report.claim_count == 1);
        REQUIRE(report.outcomes.size() == 1);
        CHECK(report.outcomes[0].verdict == Verdict::Approved);
        CHECK(report.outcomes[0].amount == 500);
        CHECK(report.tx_count ==
              w.net.ledger().walk_contract_chain(c.sct_tid).size()); // oracle count
        CHECK(report.tx_count == testsupport::oracle_contract_chain(w.net.ledger(),
                                                                    c.sct_tid).size());
    }
    SUBCASE("a claim-free contract reports zero claims")
    {
        World w(92);
        Establishment est = w.contract_with_sensor();
        HistoryToken token = issue_history_token(w.net, w.acme(), w.db, est.sct.t_id);
        HistoryReport report = verify_history_token(token, w.net.ledger());
        CHECK(report.claim_count == 0);
        CHECK(report.outcomes.empty());
        CHECK(report.tx_count == 2); // contract + sensor genesis
    }
    SUBCASE("any tampered token byte fails verification")
    {
        World w(93);
        Establishment est = w.contract_with_sensor();
        HistoryToken token = issue_history_token(w.net, w.acme(), w.db, est.sct.t_id,
                                                 as_bytes("meta"));
        Bytes wire = encode_token(token);
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 50; ++trial)
        {
            Bytes bad = wire;
            bad[rng() % bad.size()] ^= static_cast<uint8_t>(1 + rng() % 255);
            try
            {
                HistoryToken t = decode_token(bad);
                CHECK_THROWS_AS(verify_history_token(t, w.net.ledger()), Error);
            }
            catch (const Error&)
            {
                // an undecodable token is equally rejected
            }
        }
    }
    SUBCASE("a token from a stranger insurer is refused on issue")
    {
        World w(94, {{Role::Insurer, "zenith"}});
        Establishment est = w.contract_with_sensor();
        CHECK_THROWS_AS(build_history_token(w.net.require_party("zenith").identity_keys(),
                                            w.net.ledger(), est.sct.t_id, "vehicle", {}),
                        Error);
    }
}

TEST_CASE("the account book conserves credits and rejects overdrafts")
{
    AccountBook book;
    book.deposit("a", 1000);
    book.deposit("b", 50);
    CHECK(book.total() == 1050);

    book.transfer("a", "b", 300);
    CHECK(book.balance("a") == 700);
    CHECK(book.balance("b") == 350);
    CHECK(book.total() == 1050);

    CHECK_THROWS_AS(book.transfer("b", "a", 1000), Error);
    CHECK_THROWS_AS(book.deposit("a", -5), Error);
    CHECK(book.total() == 1050);

    fs::path p = fs::temp_directory_path() / "claimchain-accounts.json";
    book.save_json(p);
    AccountBook loaded = AccountBook::load_json(p);
    CHECK(loaded.balances() == book.balances());
    fs::remove(p);
}

TEST_CASE("the insurer database persists and reloads customer records")
{
    World w(95);
    Establishment est = w.contract_with_sensor();
    w.db.record_payment(est.sct.t_id, w.net.clock(), 120);

    fs::path p = fs::temp_directory_path() / "claimchain-insurer-db.json";
    w.db.save_json(p);
    InsurerDb loaded = InsurerDb::load_json(p);
    REQUIRE(loaded.size() == 1);
    const CustomerRecord* rec = loaded.find_by_sct(est.sct.t_id);
    REQUIRE(rec);
    CHECK(rec->policy == "vehicle");
    CHECK(rec->user_pk == est.record.user_pk);
    CHECK(rec->sensor_pks == est.record.sensor_pks);
    REQUIRE(rec->payments.size() == 1);
    CHECK(rec->payments[0].second == 120);
    CHECK_THROWS_AS(loaded.record_payment(TxId{digest(std::string_view("none"))}, 0, 1), Error);
    fs::remove(p);
}

TEST_CASE("case transitions outside the declared edges are refused")
{
    ClaimCase c;
    c.state = CaseState::Lodged;
    CHECK_THROWS_AS(advance_case(c, CaseState::Settled, 0, std::nullopt), Error);
    CHECK_THROWS_AS(advance_case(c, CaseState::Disputed, 0, std::nullopt), Error);
    advance_case(c, CaseState::Verified, 1, std::nullopt);
    CHECK_THROWS_AS(advance_case(c, CaseState::Decided, 2, std::nullopt), Error);
    advance_case(c, CaseState::AccessGranted, 2, std::nullopt);
    advance_case(c, CaseState::DataChecked, 3, std::nullopt);
    advance_case(c, CaseState::Decided, 4, std::nullopt);
    advance_case(c, CaseState::Disputed, 5, std::nullopt);
    advance_case(c, CaseState::Closed, 6, std::nullopt);
    CHECK_THROWS_AS(advance_case(c, CaseState::Verified, 7, std::nullopt), Error);
    CHECK(c.history.size() == 6);
}

TEST_CASE("random walks over scripted parties never leave the edge set")
{
    World w(97);
    w.contract_with_sensor();
    w.feed_sensor(2);

    std::mt19937_64 rng(1234);
    size_t steps = 0;
    std::vector<ClaimCase> finished;
    while (steps < 10000)
    {
        ClaimCase c = w.verified_claim();
        ++steps;
        bool open = true;
        while (open && steps < 10000)
        {
            ++steps;
            switch (rng() % 6)
            {
            case 0: // data access, sometimes refused
                if (c.state == CaseState::Verified)
                {
                    if (rng() % 4 == 0)
                        w.alice().approve = [](const Transaction& tx) {
                            return !std::holds_alternative<DataAccessTx>(tx);
                        };
                    request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(),
                                           w.store);
                    w.alice().approve = nullptr;
                }
                break;
            case 1: // evidence at any live stage
                if (c.state != CaseState::Lodged && c.state != CaseState::Closed &&
                    rng() % 3 == 0)
                    record_third_party_evidence(w.net, w.acme(), c, w.themis(),
                                                ByteView(w.net.random_bytes(16)), w.store);
                break;
            case 2:
            case 3: // decision, sometimes withheld
                if (c.state == CaseState::DataChecked)
                {
                    bool withhold = rng() % 3 == 0;
                    if (withhold)
                        w.alice().approve = [](const Transaction& tx) {
                            return !std::holds_alternative<DecisionTx>(tx);
                        };
                    Verdict v = rng() % 2 ? Verdict::Approved : Verdict::Rejected;
                    uint64_t amount = v == Verdict::Approved ? rng() % 50 : 0;
                    decide_and_settle(w.net, w.acme(), w.alice(), c, v, amount, w.accounts);
                    w.alice().approve = nullptr;
                }
                break;
            case 4: // court
                if (c.state == CaseState::Disputed)
                {
                    Verdict v = rng() % 2 ? Verdict::Approved : Verdict::Rejected;
                    uint64_t amount = v == Verdict::Approved ? rng() % 50 : 0;
                    adjudicate_dispute(w.net, w.themis(), w.alice(), w.acme(), c, v, amount,
                                       w.accounts);
                }
                break;
            default:
                break;
            }
            open = c.state != CaseState::Settled && c.state != CaseState::Closed;
            if (!open || rng() % 20 == 0)
                break;
        }
        finished.push_back(c);
        if (finished.size() >= 40)
            break;
    }

    // every recorded trajectory stays inside the declared edges
    for (const ClaimCase& c : finished)
    {
        REQUIRE(!c.history.empty());
        CHECK(c.history.front().state == CaseState::Lodged);
        for (size_t i = 1; i < c.history.size(); ++i)
        {
            CaseState a = c.history[i - 1].state;
            CaseState b = c.history[i].state;
            if (a == b)
                continue; // annotation events (refusals, notes) keep the state
            CHECK(case_transition_allowed(a, b));
        }
    }
}

TEST_CASE("credit totals are invariant over randomized settlements")
{
    World w(98);
    w.contract_with_sensor();
    w.feed_sensor(1);
    int64_t total = w.accounts.total();

    std::mt19937_64 rng(777);
    for (int i = 0; i < 30; ++i)
    {
        ClaimCase c = w.verified_claim();
        request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
        bool withhold = rng() % 4 == 0;
        if (withhold)
            w.alice().approve = [](const Transaction& tx) {
                return !std::holds_alternative<DecisionTx>(tx);
            };
        Verdict v = rng() % 2 ? Verdict::Approved : Verdict::Rejected;
        decide_and_settle(w.net, w.acme(), w.alice(), c, v,
                          v == Verdict::Approved ? rng() % 100 : 0, w.accounts);
        w.alice().approve = nullptr;
        if (c.state == CaseState::Disputed)
        {
            Verdict ruling = rng() % 2 ? Verdict::Approved : Verdict::Rejected;
            adjudicate_dispute(w.net, w.themis(), w.alice(), w.acme(), c, ruling,
                               ruling == Verdict::Approved ? rng() % 100 : 0, w.accounts);
        }

        CHECK(w.accounts.total() == total);
        for (const auto& [id, bal] : w.accounts.balances())
            CHECK(bal >= 0);
    }
}

TEST_CASE("a user's keys toward two insurers never overlap")
{
    World w(99, {{Role::Insurer, "zenith"}});
    Party& zenith = w.net.require_party("zenith");

    // advertise for both insurers
    w.advertise();
    PolicyAdvertTx ad = build_policy_advert(zenith.identity_keys(), {"home"},
                                            digest(std::string_view("zenith details")));
    w.net.submit(ad);
    w.net.settle();

    auto accept = [](size_t, const Bytes&) -> std::optional<Bytes> { return std::nullopt; };
    auto o1 = negotiate(w.net, w.alice(), w.acme(), to_bytes("vehicle cover"), accept, 5);
    Establishment e1 =
        establish_contract(w.net, w.alice(), w.acme(), w.db, o1.condition, {}, "vehicle");
    auto c1 = lodge_and_verify_claim(w.net, w.alice(), w.acme(), w.db, as_bytes("claim a"));
    REQUIRE(c1.claim);

    InsurerDb zenith_db;
    auto o2 = negotiate(w.net, w.alice(), zenith, to_bytes("home cover"), accept, 5);
    Establishment e2 =
        establish_contract(w.net, w.alice(), zenith, zenith_db, o2.condition, {}, "home");
    auto c2 = lodge_and_verify_claim(w.net, w.alice(), zenith, zenith_db, as_bytes("claim b"));
    REQUIRE(c2.claim);

    auto collect = [&](const TxId& sct) {
        std::set<std::string> pks;
        for (const Transaction* tx : w.net.ledger().walk_contract_chain(sct))
            for (const SignerSlot& slot : signer_slots(*tx))
                pks.insert(slot.pk->hex());
        return pks;
    };
    std::set<std::string> set1 = collect(e1.sct.t_id);
    std::set<std::string> set2 = collect(e2.sct.t_id);
    for (const std::string& pk : set1)
        CHECK(set2.count(pk) == 0);

    // and the negotiation transactions expose different user keys too
    std::set<std::string> nt_authors_1, nt_authors_2;
    for (const Block& b : w.net.ledger().blocks())
        for (const Transaction& tx : b.txs)
            if (const auto* nt = std::get_if<NegotiationTx>(&tx))
            {
                if (nt->insurance_pk == w.acme().identity())
                    nt_authors_1.insert(nt->pk.hex());
                if (nt->insurance_pk == zenith.identity())
                    nt_authors_2.insert(nt->pk.hex());
            }
    for (const std::string& pk : nt_authors_1)
        CHECK(nt_authors_2.count(pk) == 0);
}

TEST_CASE("a completed case is fully auditable from the chain walk")
{
    World w(96, {{Role::User, "police"}});
    w.contract_with_sensor();
    w.feed_sensor(3);
    ClaimCase c = w.verified_claim();
    request_and_check_data(w.net, w.acme(), w.alice(), c, w.full_scope(), w.store);
    record_third_party_evidence(w.net, w.acme(), c, w.net.require_party("police"),
                                as_bytes("report"), w.store);
    decide_and_settle(w.net, w.acme(), w.alice(), c, Verdict::Approved, 250, w.accounts);
    REQUIRE(c.state == CaseState::Settled);

    auto chain = testsupport::tids_of(w.net.ledger().walk_contract_chain(c.sct_tid));
    CHECK(chain == testsupport::oracle_contract_chain(w.net.ledger(), c.sct_tid));

    // every transaction the workflow produced for this case is in the walk
    std::vector<TxId> produced;
    for (const CaseEvent& ev : c.history)
        if (ev.tx)
            produced.push_back(*ev.tx);
    REQUIRE(!produced.empty());
    for (const TxId& tid : produced)
        CHECK(std::find(chain.begin(), chain.end(), tid) != chain.end());
    // and in the order they were produced
    std::vector<size_t> positions;
    for (const TxId& tid : produced)
        positions.push_back(static_cast<size_t>(
            std::find(chain.begin(), chain.end(), tid) - chain.begin()));
    CHECK(std::is_sorted(positions.begin(), positions.end()));
}
