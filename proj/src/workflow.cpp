// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/workflow.hpp"

#include <algorithm>
#include <fstream>

namespace claimchain {

// --- InsurerDb ---------------------------------------------------------------

void InsurerDb::add(CustomerRecord record)
{
    records_.push_back(std::move(record));
}

const CustomerRecord* InsurerDb::find_by_user_pk(const PublicKey& pk) const
{
    for (const auto& rec : records_)
        if (rec.user_pk == pk)
            return &rec;
    return nullptr;
}

const CustomerRecord* InsurerDb::find_by_sct(const TxId& sct_tid) const
{
    for (const auto& rec : records_)
        if (rec.sct_tid == sct_tid)
            return &rec;
    return nullptr;
}

void InsurerDb::record_payment(const TxId& sct_tid, uint64_t at_ms, int64_t amount)
{
    for (auto& rec : records_)
        if (rec.sct_tid == sct_tid)
        {
            rec.payments.emplace_back(at_ms, amount);
            return;
        }
    throw Error(Err::NotFound, "no customer record for contract " + sct_tid.hex());
}

void InsurerDb::save_json(const std::filesystem::path& p) const
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : records_)
    {
        nlohmann::json payments = nlohmann::json::array();
        for (const auto& [at, amount] : rec.payments)
            payments.push_back({at, amount});
        nlohmann::json sensors = nlohmann::json::array();
        for (const auto& pk : rec.sensor_pks)
            sensors.push_back(pk.hex());
        arr.push_back({{"policy", rec.policy},
                       {"condition", to_hex(rec.condition)},
                       {"payments", payments},
                       {"sct_tid", rec.sct_tid.hex()},
                       {"sensor_pks", sensors},
                       {"user_pk", rec.user_pk.hex()}});
    }
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Err::IoError, "cannot write " + p.string());
    out << arr.dump(2) << "\n";
}

InsurerDb InsurerDb::load_json(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(Err::IoError, "cannot open " + p.string());
    nlohmann::json arr = nlohmann::json::parse(in);
    InsurerDb db;
    for (const auto& j : arr)
    {
        CustomerRecord rec;
        rec.policy = j.at("policy").get<std::string>();
        rec.condition = from_hex(j.at("condition").get<std::string>());
        for (const auto& pay : j.at("payments"))
            rec.payments.emplace_back(pay.at(0).get<uint64_t>(), pay.at(1).get<int64_t>());
        rec.sct_tid = TxId::from_hex(j.at("sct_tid").get<std::string>());
        for (const auto& pk : j.at("sensor_pks"))
            rec.sensor_pks.push_back(PublicKey::from_hex(pk.get<std::string>()));
        rec.user_pk = PublicKey::from_hex(j.at("user_pk").get<std::string>());
        db.add(std::move(rec));
    }
    return db;
}

// --- AccountBook ---------------------------------------------------------

int64_t AccountBook::balance(const std::string& account_id) const
{
    auto it = balances_.find(account_id);
    return it == balances_.end() ? 0 : it->second;
}

void AccountBook::deposit(const std::string& account_id, int64_t amount)
{
    if (amount < 0)
        throw Error(Err::InvariantViolation, "negative deposit");
    balances_[account_id] += amount;
}

void AccountBook::transfer(const std::string& from, const std::string& to, int64_t amount)
{
    if (amount < 0)
        throw Error(Err::InvariantViolation, "negative transfer");
    auto it = balances_.find(from);
    if (it == balances_.end() || it->second < amount)
        throw Error(Err::InsufficientFunds, from + " cannot cover " + std::to_string(amount));
    it->second -= amount;
    balances_[to] += amount;
}

int64_t AccountBook::total() const
{
    int64_t sum = 0;
    for (const auto& [id, bal] : balances_)
        sum += bal;
    return sum;
}

void AccountBook::save_json(const std::filesystem::path& p) const
{
    nlohmann::json j{{"balances", nlohmann::json::object()}};
    for (const auto& [id, bal] : balances_)
        j["balances"][id] = bal;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(Err::IoError, "cannot write " + p.string());
    out << j.dump(2) << "\n";
}

AccountBook AccountBook::load_json(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(Err::IoError, "cannot open " + p.string());
    nlohmann::json j = nlohmann::json::parse(in);
    AccountBook book;
    for (const auto& [id, bal] : j.at("balances").items())
        book.balances_[id] = bal.get<int64_t>();
    return book;
}

// --- Claim case state machine ---------------------------------------------

const char* case_state_name(CaseState s)
{
    switch (s)
    {
    case CaseState::Lodged: return "lodged";
    case CaseState::Verified: return "verified";
    case CaseState::AccessGranted: return "access_granted";
    case CaseState::DataChecked: return "data_checked";
    case CaseState::Decided: return "decided";
    case CaseState::Settled: return "settled";
    case CaseState::Disputed: return "disputed";
    case CaseState::Closed: return "closed";
    }
    return "unknown";
}

bool case_transition_allowed(CaseState from, CaseState to)
{
    switch (from)
    {
    case CaseState::Lodged: return to == CaseState::Verified;
    case CaseState::Verified: return to == CaseState::AccessGranted;
    case CaseState::AccessGranted: return to == CaseState::DataChecked;
    case CaseState::DataChecked: return to == CaseState::Decided;
    case CaseState::Decided: return to == CaseState::Settled || to == CaseState::Disputed;
    case CaseState::Disputed: return to == CaseState::Closed;
    case CaseState::Settled:
    case CaseState::Closed: return false;
    }
    return false;
}

void advance_case(ClaimCase& c, CaseState to, uint64_t at_ms, std::optional<TxId> tx,
                  std::string note)
{
    if (!case_transition_allowed(c.state, to))
        throw Error(Err::InvariantViolation, std::string("illegal case transition ") +
                                                 case_state_name(c.state) + " -> " +
                                                 case_state_name(to));
    c.state = to;
    c.history.push_back({to, at_ms, tx, std::move(note)});
}

// --- Negotiation -------------------------------------------------------------

NegotiationOutcome negotiate(Network& net, Party& user, Party& insurer, Bytes opening_condition,
                             const ResponderPolicy& policy, size_t round_cap)
{
    const PublicKey insurer_pk = insurer.identity();
    bool advertised = false;
    for (const Block& b : net.ledger().blocks())
        for (const Transaction& tx : b.txs)
            if (const auto* advert = std::get_if<PolicyAdvertTx>(&tx))
                if (advert->insurance_pk == insurer_pk)
                    advertised = true;
    if (!advertised)
        throw Error(Err::NotFound, insurer.account_id + " has not advertised any policy");

    NegotiationOutcome out;
    Bytes current = std::move(opening_condition);
    bool user_turn = true;
    while (true)
    {
        if (out.nt_tids.size() >= round_cap)
            return out; // abandoned: cap reached without acceptance

        PartyKeys author = user_turn ? user.keys_for(insurer_pk) : insurer.identity_keys();
        NegotiationTx nt = build_negotiation(author, insurer_pk, current);
        out.nt_tids.push_back(net.submit(nt));
        net.settle();

        // the counterparty now responds to this offer
        std::optional<Bytes> counter = policy(out.nt_tids.size(), current);
        if (!counter)
        {
            out.agreed = true;
            out.condition = current;
            net.trace().add(net.clock(), "note",
                            {{"negotiation", "agreed"}, {"rounds", out.nt_tids.size()}});
            return out;
        }
        current = std::move(*counter);
        user_turn = !user_turn;
    }
}

// --- Contract establishment ---------------------------------------------

Establishment establish_contract(Network& net, Party& user, Party& insurer, InsurerDb& db,
                                 const Bytes& agreed_terms, const std::vector<Party*>& sensors,
                                 const std::string& policy_name)
{
    PartyKeys user_keys = user.keys_for(insurer.identity());
    PartyKeys insurer_keys = insurer.identity_keys();

    Establishment est;
    est.sct = build_contract(user_keys, insurer_keys, agreed_terms);
    if (!user.approves(est.sct) || !insurer.approves(est.sct))
        throw Error(Err::EstablishmentAborted, "a party refused to sign the contract");

    for (Party* sensor : sensors)
    {
        SensorGenesisTx gen =
            build_sensor_genesis(user_keys, insurer_keys, sensor->identity(), est.sct.t_id);
        if (!user.approves(gen) || !insurer.approves(gen))
            throw Error(Err::EstablishmentAborted,
                        "a party refused to sign the genesis for " + sensor->account_id);
        est.sensor_geneses.push_back(std::move(gen));
    }

    // everything signed; only now does anything reach the network
    net.submit(est.sct);
    for (const SensorGenesisTx& gen : est.sensor_geneses)
        net.submit(gen);
    net.settle();

    est.record.policy = policy_name;
    est.record.condition = agreed_terms;
    est.record.sct_tid = est.sct.t_id;
    for (const SensorGenesisTx& gen : est.sensor_geneses)
        est.record.sensor_pks.push_back(gen.sensor_pk);
    est.record.user_pk = user_keys.pk;
    db.add(est.record);

    net.trace().add(net.clock(), "note",
                    {{"contract", est.sct.t_id.hex()},
                     {"user", user.account_id},
                     {"insurer", insurer.account_id},
                     {"sensors", est.sensor_geneses.size()}});
    return est;
}

// --- Claim lifecycle ------------------------------------------------------

const char* claim_reject_name(ClaimReject r)
{
    switch (r)
    {
    case ClaimReject::None: return "none";
    case ClaimReject::NoAccount: return "no_account";
    case ClaimReject::BadSignature: return "bad_signature";
    }
    return "unknown";
}

ClaimReject insurer_verify_claim(const InsurerDb& db, const ClaimRequestTx& cr)
{
    if (!db.find_by_user_pk(cr.user_pk))
        return ClaimReject::NoAccount;
    Bytes body = canonical_bytes(Transaction{cr});
    if (!cr.sign.present() || !verify(cr.user_pk, body, cr.sign))
        return ClaimReject::BadSignature;
    return ClaimReject::None;
}

namespace {

TxId contract_tip(const LedgerView& view, const TxId& sct_tid)
{
    auto members = view.contract_members(sct_tid);
    return members.empty() ? sct_tid : tid_of(*members.back());
}

void trace_state(Network& net, const ClaimCase& c)
{
    net.trace().add(net.clock(), "state",
                    {{"case", c.claim_tid.hex()}, {"state", case_state_name(c.state)}});
}

} // namespace

ClaimOutcome lodge_and_verify_claim(Network& net, Party& user, Party& insurer, InsurerDb& db,
                                    ByteView claim_details, std::optional<ByteView> shared_data)
{
    PartyKeys user_keys = user.keys_for(insurer.identity());
    const CustomerRecord* rec = db.find_by_user_pk(user_keys.pk);
    if (!rec)
        return {std::nullopt, ClaimReject::NoAccount};

    TxId tip = contract_tip(net.view(), rec->sct_tid);
    ClaimRequestTx cr = build_claim(user_keys, insurer.identity(), net.view(), tip, claim_details,
                                    shared_data);

    // receipt-side verification before the network sees the claim
    ClaimReject why = insurer_verify_claim(db, cr);
    if (why != ClaimReject::None)
        return {std::nullopt, why};

    ClaimCase c;
    c.user_id = user.account_id;
    c.insurer_id = insurer.account_id;
    c.user_pk = user_keys.pk;
    c.insurer_pk = insurer.identity();
    c.sct_tid = rec->sct_tid;
    c.claim_tid = cr.t_id;
    c.state = CaseState::Lodged;
    c.history.push_back({CaseState::Lodged, net.clock(), cr.t_id, ""});

    net.submit(cr);
    net.settle();
    c.tip = cr.t_id;
    advance_case(c, CaseState::Verified, net.clock(), cr.t_id);
    trace_state(net, c);
    return {std::move(c), ClaimReject::None};
}

void request_and_check_data(Network& net, Party& insurer, Party& user, ClaimCase& c,
                            AccessScope scope, OffchainStore& store)
{
    if (c.state != CaseState::Verified)
        throw Error(Err::InvariantViolation, "data can only be requested from a verified claim");

    PartyKeys insurer_keys = insurer.identity_keys();
    PartyKeys user_keys = user.keys_for(insurer.identity());

    // present the unsigned draft for the user's consent
    DataAccessTx draft;
    draft.p_t_id = c.claim_tid;
    draft.scope = scope;
    draft.user_pk = user_keys.pk;
    draft.insurance_pk = insurer_keys.pk;
    draft.t_id = compute_tid(draft);
    if (!user.approves(draft))
    {
        c.note = "user declined the data access request";
        c.history.push_back({c.state, net.clock(), std::nullopt, c.note});
        net.trace().add(net.clock(), "note", {{"case", c.claim_tid.hex()}, {"refused", "dat"}});
        return;
    }

    DataAccessTx dat = build_access(insurer_keys, user_keys, net.view(), c.claim_tid, scope);
    net.submit(dat);
    net.settle();
    c.tip = dat.t_id;
    advance_case(c, CaseState::AccessGranted, net.clock(), dat.t_id);
    trace_state(net, c);

    ReadGrant grant = store.authorize_read(dat, net.ledger(), insurer_keys.pk);
    if (!grant)
        throw Error(Err::AccessDenied, grant.detail);

    // Pair each of a sensor's stored records with its anchor chain in
    // order; a mined anchor is the integrity reference for that record.
    auto members = net.ledger().walk_contract_chain(c.sct_tid);
    for (const PublicKey& sensor : scope.sensors)
    {
        std::vector<const DataAnchorTx*> anchors;
        for (const Transaction* member : members)
            if (const auto* anchor = std::get_if<DataAnchorTx>(member))
                if (anchor->sensor_pk == sensor)
                    anchors.push_back(anchor);

        auto records = store.records_for(sensor, 0, UINT64_MAX);
        for (size_t i = 0; i < records.size(); ++i)
        {
            if (records[i].captured_at_ms < scope.from_ms ||
                records[i].captured_at_ms > scope.to_ms)
                continue;
            if (i >= anchors.size())
            {
                c.flagged = true;
                c.integrity_failures.push_back({records[i].locator, Hash256{}, Hash256{}});
                continue;
            }
            FetchResult fr =
                store.fetch_and_verify(grant, records[i].locator, anchors[i]->data_hash);
            if (!fr)
            {
                c.flagged = true;
                c.integrity_failures.push_back({records[i].locator, fr.anchored, fr.actual});
                net.trace().add(net.clock(), "note",
                                {{"case", c.claim_tid.hex()},
                                 {"integrity_failure", records[i].locator},
                                 {"expected", fr.anchored.hex()},
                                 {"actual", fr.actual.hex()}});
            }
        }
    }

    if (c.flagged)
    {
        c.note = "integrity check failed for " + std::to_string(c.integrity_failures.size()) +
                 " record(s)";
        c.history.push_back({c.state, net.clock(), std::nullopt, c.note});
        return;
    }
    advance_case(c, CaseState::DataChecked, net.clock(), std::nullopt);
    trace_state(net, c);
}

DataAnchorTx record_third_party_evidence(Network& net, Party& insurer, ClaimCase& c,
                                         Party& provider, ByteView evidence, OffchainStore& store)
{
    (void)insurer;
    if (c.state == CaseState::Lodged || c.state == CaseState::Closed)
        throw Error(Err::InvariantViolation, "case cannot take evidence in state " +
                                                 std::string(case_state_name(c.state)));
    if (evidence.empty())
        throw Error(Err::InvariantViolation, "evidence payload is empty");

    PartyKeys keys = provider.identity_keys();
    StoreReceipt receipt = store.put_record(keys.pk, evidence, net.clock());
    DataAnchorTx anchor = build_data_anchor(keys, c.tip, receipt.payload_hash);
    net.submit(anchor);
    net.settle();
    c.tip = anchor.t_id;
    c.history.push_back({c.state, net.clock(), anchor.t_id,
                         "evidence from " + provider.account_id + " at " + receipt.locator});
    return anchor;
}

void decide_and_settle(Network& net, Party& insurer, Party& user, ClaimCase& c, Verdict verdict,
                       uint64_t amount, AccountBook& accounts, ByteView rationale)
{
    if (c.state != CaseState::DataChecked)
        throw Error(Err::InvariantViolation, "decision requires a data-checked case");
    if (verdict == Verdict::Rejected && amount != 0)
        throw Error(Err::InvariantViolation, "rejected decision cannot carry an amount");

    PartyKeys insurer_keys = insurer.identity_keys();
    PartyKeys user_keys = user.keys_for(insurer.identity());
    Hash256 rationale_hash =
        rationale.empty() ? digest(std::string_view("no rationale recorded")) : digest(rationale);

    DecisionBody body{verdict, amount, rationale_hash};
    c.proposed_decision = body;
    advance_case(c, CaseState::Decided, net.clock(), std::nullopt,
                 verdict == Verdict::Approved ? "proposed approval of " + std::to_string(amount)
                                              : "proposed rejection");
    trace_state(net, c);

    // unsigned draft carries the exact body the user is asked to co-sign
    DecisionTx draft;
    draft.p_t_id = c.tip;
    draft.decision = body;
    draft.user_pk = user_keys.pk;
    draft.insurance_pk = insurer_keys.pk;
    draft.t_id = compute_tid(draft);
    if (!user.approves(draft))
    {
        advance_case(c, CaseState::Disputed, net.clock(), std::nullopt,
                     "user withheld the decision countersignature");
        trace_state(net, c);
        return;
    }

    DecisionTx dt = build_decision(insurer_keys, user_keys, net.view(), c.tip, verdict, amount,
                                   rationale_hash);
    net.submit(dt);
    net.settle();
    c.tip = dt.t_id;

    if (verdict == Verdict::Approved)
    {
        if (accounts.balance(insurer.account_id) < static_cast<int64_t>(amount))
        {
            c.note = "settlement blocked: insurer balance below award";
            c.history.push_back({c.state, net.clock(), dt.t_id, c.note});
            return; // stays Decided
        }
        accounts.transfer(insurer.account_id, user.account_id, static_cast<int64_t>(amount));
    }
    advance_case(c, CaseState::Settled, net.clock(), dt.t_id);
    trace_state(net, c);
}

void adjudicate_dispute(Network& net, Party& court, Party& user, Party& insurer, ClaimCase& c,
                        Verdict verdict, uint64_t amount, AccountBook& accounts,
                        ByteView rationale)
{
    if (c.state != CaseState::Disputed)
        throw Error(Err::InvariantViolation, "only disputed cases reach the court");
    const auto& registry = net.ledger().court_registry();
    if (std::find(registry.begin(), registry.end(), court.identity()) == registry.end())
        throw Error(Err::AuthorizationError,
                    court.account_id + " is not in the court registry");

    // the court trusts nothing: full chain verification, then the audit walk
    VerificationReport report = net.ledger().verify();
    if (!report.ok())
        throw Error(Err::VerificationFailed,
                    "ledger failed verification at block " +
                        std::to_string(report.first_failure->height) + ": " +
                        report.first_failure->what);
    auto members = net.ledger().walk_contract_chain(c.sct_tid);
    bool claim_on_chain = std::any_of(members.begin(), members.end(), [&](const Transaction* tx) {
        return tid_of(*tx) == c.claim_tid;
    });
    if (!claim_on_chain)
        throw Error(Err::VerificationFailed, "disputed claim is not in the contract chain");

    Hash256 rationale_hash =
        rationale.empty() ? digest(std::string_view("court ruling")) : digest(rationale);
    CourtDecisionTx ruling =
        build_court_decision(court.identity_keys(), c.tip, verdict, amount, rationale_hash);
    net.submit(ruling);
    net.settle();
    c.tip = ruling.t_id;

    if (verdict == Verdict::Approved)
        accounts.transfer(insurer.account_id, user.account_id, static_cast<int64_t>(amount));
    advance_case(c, CaseState::Closed, net.clock(), ruling.t_id,
                 verdict == Verdict::Approved ? "court awarded " + std::to_string(amount)
                                              : "court upheld the insurer");
    trace_state(net, c);
}

// --- Insurance history -----------------------------------------------------

HistoryToken issue_history_token(Network& net, Party& old_insurer, const InsurerDb& db,
                                 const TxId& sct_tid, ByteView metadata)
{
    const CustomerRecord* rec = db.find_by_sct(sct_tid);
    if (!rec)
        throw Error(Err::NotFound, "no customer record for contract " + sct_tid.hex());
    return build_history_token(old_insurer.identity_keys(), net.ledger(), sct_tid, rec->policy,
                               metadata);
}

HistoryReport verify_history_token(const HistoryToken& token, const Ledger& ledger)
{
    if (compute_token_id(token) != token.token_id)
        throw Error(Err::VerificationFailed, "token id does not match token content");
    if (!verify(token.insurance_pk, ByteView(token_canonical_bytes(token)), token.insurance_sign))
        throw Error(Err::VerificationFailed, "issuer signature invalid");

    const Transaction* last = ledger.find(token.last_tx_id);
    if (!last)
        throw Error(Err::VerificationFailed, "last transaction is not on the ledger");
    auto head = resolve_contract_head(ledger, token.last_tx_id);
    if (!head)
        throw Error(Err::VerificationFailed, "last transaction is not chained to a contract");
    const auto* sct = std::get_if<ContractTx>(ledger.find(*head));
    if (!sct || sct->insurance_pk != token.insurance_pk || sct->user_pk != token.user_pk)
        throw Error(Err::VerificationFailed, "token parties differ from the contract's");

    auto members = ledger.walk_contract_chain(*head);
    bool member = std::any_of(members.begin(), members.end(), [&](const Transaction* tx) {
        return tid_of(*tx) == token.last_tx_id;
    });
    if (!member)
        throw Error(Err::VerificationFailed, "last transaction is outside the contract chain");

    HistoryReport report;
    report.policy_type = token.policy_type;
    report.from_ms = token.valid_from_ms;
    report.to_ms = token.valid_to_ms;
    report.tx_count = members.size();
    for (const Transaction* tx : members)
    {
        if (std::holds_alternative<ClaimRequestTx>(*tx))
            ++report.claim_count;
        else if (const auto* dt = std::get_if<DecisionTx>(tx))
            report.outcomes.push_back(dt->decision);
        else if (const auto* court = std::get_if<CourtDecisionTx>(tx))
            report.outcomes.push_back(court->decision);
    }
    return report;
}

} // namespace claimchain
