// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/netsim.hpp"

namespace claimchain {

// What the insurer stores server-side for a new customer: policy,
// condition, payments, contract id, device keys and the user key.
struct CustomerRecord {
    std::string policy;
    Bytes condition;
    std::vector<std::pair<uint64_t, int64_t>> payments; // (at_ms, amount)
    TxId sct_tid;
    std::vector<PublicKey> sensor_pks;
    PublicKey user_pk;
};

class InsurerDb {
  public:
    void add(CustomerRecord record);
    const CustomerRecord* find_by_user_pk(const PublicKey& pk) const;
    const CustomerRecord* find_by_sct(const TxId& sct_tid) const;
    void record_payment(const TxId& sct_tid, uint64_t at_ms, int64_t amount);
    size_t size() const { return records_.size(); }
    const std::vector<CustomerRecord>& records() const { return records_; }

    void save_json(const std::filesystem::path& p) const;
    static InsurerDb load_json(const std::filesystem::path& p);

  private:
    std::vector<CustomerRecord> records_;
};

// Internal credit accounts; every transfer conserves the total and no
// balance goes negative.
class AccountBook {
  public:
    int64_t balance(const std::string& account_id) const;
    void deposit(const std::string& account_id, int64_t amount);
    void transfer(const std::string& from, const std::string& to, int64_t amount);
    int64_t total() const;
    const std::map<std::string, int64_t>& balances() const { return balances_; }

    void save_json(const std::filesystem::path& p) const;
    static AccountBook load_json(const std::filesystem::path& p);

  private:
    std::map<std::string, int64_t> balances_;
};

enum class CaseState {
    Lodged,
    Verified,
    AccessGranted,
    DataChecked,
    Decided,
    Settled,
    Disputed,
    Closed,
};

const char* case_state_name(CaseState s);
bool case_transition_allowed(CaseState from, CaseState to);

struct CaseEvent {
    CaseState state;
    uint64_t at_ms = 0;
    std::optional<TxId> tx;
    std::string note;
};

struct IntegrityEvidence {
    std::string locator;
    Hash256 expected;
    Hash256 actual;
};

struct ClaimCase {
    std::string user_id;
    std::string insurer_id;
    PublicKey user_pk;
    PublicKey insurer_pk;
    TxId sct_tid;
    TxId claim_tid;
    TxId tip; // latest mined transaction of this case's thread
    CaseState state = CaseState::Lodged;
    std::vector<CaseEvent> history;
    bool flagged = false;
    std::vector<IntegrityEvidence> integrity_failures;
    std::optional<DecisionBody> proposed_decision;
    std::string note; // refusal or blocked-settlement reason
};

// Appends to history and moves along the declared edge set only;
// anything else is Err::InvariantViolation.
void advance_case(ClaimCase& c, CaseState to, uint64_t at_ms, std::optional<TxId> tx,
                  std::string note = "");

// --- Negotiation ------------------------------------------------------------

// Responder strategy: called after each posted offer with the running
// round count and last condition; returns a counter-offer or accepts
// with nullopt.
using ResponderPolicy = std::function<std::optional<Bytes>(size_t round, const Bytes& last)>;

struct NegotiationOutcome {
    bool agreed = false;
    Bytes condition; // the accepted terms when agreed
    std::vector<TxId> nt_tids;

    size_t rounds() const { return nt_tids.size(); }
};

// Alternating offer exchange, opening offer by the user; every offer is
// mined as a negotiation transaction. Acceptance is silent (it posts no
// transaction); exceeding the round cap abandons the negotiation.
NegotiationOutcome negotiate(Network& net, Party& user, Party& insurer, Bytes opening_condition,
                             const ResponderPolicy& policy, size_t round_cap);

// --- Contract establishment ---------------------------------------------

struct Establishment {
    ContractTx sct;
    std::vector<SensorGenesisTx> sensor_geneses;
    CustomerRecord record;
};

// Mines the contract plus one genesis per sensor and stores the customer
// record. Any refusal to countersign aborts the whole establishment with
// Err::EstablishmentAborted before anything is submitted.
Establishment establish_contract(Network& net, Party& user, Party& insurer, InsurerDb& db,
                                 const Bytes& agreed_terms, const std::vector<Party*>& sensors,
                                 const std::string& policy_name);

// --- Claim lifecycle ------------------------------------------------------

enum class ClaimReject { None, NoAccount, BadSignature };

const char* claim_reject_name(ClaimReject r);

// Insurer-side receipt checks: account lookup by User_PK, then the user
// signature over the canonical body.
ClaimReject insurer_verify_claim(const InsurerDb& db, const ClaimRequestTx& cr);

struct ClaimOutcome {
    std::optional<ClaimCase> claim; // set iff accepted
    ClaimReject rejected = ClaimReject::None;
};

ClaimOutcome lodge_and_verify_claim(Network& net, Party& user, Party& insurer, InsurerDb& db,
                                    ByteView claim_details,
                                    std::optional<ByteView> shared_data = std::nullopt);

// DAT round-trip plus the integrity sweep over every in-scope record.
// User refusal leaves the case Verified; any integrity mismatch flags
// the case with (locator, expected, actual) evidence.
void request_and_check_data(Network& net, Party& insurer, Party& user, ClaimCase& c,
                            AccessScope scope, OffchainStore& store);

// Stores third-party evidence off-chain and chains its hash into the
// contract chain, signed by the provider.
DataAnchorTx record_third_party_evidence(Network& net, Party& insurer, ClaimCase& c,
                                         Party& provider, ByteView evidence,
                                         OffchainStore& store);

// Proposes the decision, collects the user countersignature, mines the
// DT and runs the settlement transfer. A withheld countersignature moves
// the case to Disputed; an insurer balance short of the award blocks
// settlement and leaves the case Decided.
void decide_and_settle(Network& net, Party& insurer, Party& user, ClaimCase& c, Verdict verdict,
                       uint64_t amount, AccountBook& accounts, ByteView rationale = {});

// Court path for disputed cases: re-verifies the whole chain, walks the
// contract chain, mines the court decision and executes its transfer.
void adjudicate_dispute(Network& net, Party& court, Party& user, Party& insurer, ClaimCase& c,
                        Verdict verdict, uint64_t amount, AccountBook& accounts,
                        ByteView rationale = {});

// --- Insurance history ---------------------------------------------------

struct HistoryReport {
    std::string policy_type;
    uint64_t from_ms = 0;
    uint64_t to_ms = 0;
    size_t tx_count = 0;
    size_t claim_count = 0;
    std::vector<DecisionBody> outcomes; // mined decisions, court ones included
};

HistoryToken issue_history_token(Network& net, Party& old_insurer, const InsurerDb& db,
                                 const TxId& sct_tid, ByteView metadata = {});

// New-insurer side: checks token id, issuer signature and chain
// membership, then walks the contract chain into a report. Any failure
// throws Err::VerificationFailed.
HistoryReport verify_history_token(const HistoryToken& token, const Ledger& ledger);

} // namespace claimchain
