// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/crypto.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "json.hpp"

namespace claimchain {

// Transaction identifier: digest of the transaction's canonical body
// bytes (everything except signatures and the id itself), so co-signers
// of a multisig transaction sign identical bytes.
struct TxId {
    Hash256 value;

    auto operator<=>(const TxId&) const = default;
    std::string hex() const { return value.hex(); }
    static TxId from_hex(std::string_view h) { return TxId{Hash256::from_hex(h)}; }
};

enum class TxKind : uint8_t {
    Negotiation = 1,
    Contract = 2,
    SensorGenesis = 3,
    DataAnchor = 4,
    ClaimRequest = 5,
    DataAccess = 6,
    Decision = 7,
    CourtDecision = 8,
    PolicyAdvert = 9,
};

const char* tx_kind_name(TxKind k);

// Payloads at or under this size ride inline; larger ones leave only
// their digest on chain and stay with their owner off-chain.
inline constexpr size_t kInlineThreshold = 1024;

struct ConditionField {
    enum class Mode : uint8_t { Inline = 0, HashOnly = 1 };

    Mode mode = Mode::Inline;
    Bytes inline_bytes;   // Inline mode
    Hash256 content_hash; // HashOnly mode

    // Applies the threshold rule. Empty payload -> Err::InvariantViolation.
    static ConditionField of(ByteView payload);

    // The digest either stored or recomputable from the inline bytes.
    Hash256 commitment() const;

    bool operator==(const ConditionField&) const = default;
};

struct AccessScope {
    std::vector<PublicKey> sensors;
    uint64_t from_ms = 0;
    uint64_t to_ms = 0;

    bool covers(const PublicKey& sensor, uint64_t at_ms) const;
    bool operator==(const AccessScope&) const = default;
};

enum class Verdict : uint8_t { Rejected = 0, Approved = 1 };

struct DecisionBody {
    Verdict verdict = Verdict::Rejected;
    uint64_t amount = 0; // internal credits; must be 0 when Rejected
    Hash256 rationale_hash;

    bool operator==(const DecisionBody&) const = default;
};

// --- The nine ledger transaction kinds -----------------------------------

struct NegotiationTx {
    TxId t_id;
    PublicKey insurance_pk;
    ConditionField condition;
    PublicKey pk; // author (user, or insurer when counter-offering)
    Signature sign;
};

// 2-of-2 signed insurance contract; genesis of a contract chain.
struct ContractTx {
    TxId t_id;
    PublicKey user_pk;
    Signature user_sign;
    PublicKey insurance_pk;
    Signature insurance_sign;
    ConditionField contract;
};

// Per-device chain start, virtually linked to its contract by sct_ref.
struct SensorGenesisTx {
    TxId t_id;
    TxId sct_ref;
    PublicKey sensor_pk;
    PublicKey user_pk;
    Signature user_sign;
    PublicKey insurance_pk;
    Signature insurance_sign;
};

struct DataAnchorTx {
    TxId t_id;
    TxId p_t_id; // previous tx in the author's chain
    Hash256 data_hash;
    PublicKey sensor_pk; // author: a registered sensor, or an evidence provider
    Signature sign;
};

struct ClaimRequestTx {
    TxId t_id;
    TxId p_t_id;
    ConditionField claim_request;
    std::optional<Hash256> data_hash; // set when data was shared directly
    PublicKey insurance_pk;
    PublicKey user_pk;
    Signature sign;
};

struct DataAccessTx {
    TxId t_id;
    TxId p_t_id; // the claim this access request answers
    AccessScope scope;
    std::optional<Hash256> exchanged_data_hash;
    PublicKey user_pk;
    Signature user_sign;
    PublicKey insurance_pk;
    Signature insurance_sign;
};

struct DecisionTx {
    TxId t_id;
    TxId p_t_id;
    DecisionBody decision;
    PublicKey user_pk;
    Signature user_sign;
    PublicKey insurance_pk;
    Signature insurance_sign;
};

struct CourtDecisionTx {
    TxId t_id;
    TxId p_t_id; // tip of the disputed contract chain
    DecisionBody decision;
    PublicKey court_pk; // must be in the configured court registry
    Signature court_sign;
};

struct PolicyAdvertTx {
    TxId t_id;
    PublicKey insurance_pk;
    std::vector<std::string> keywords; // each <= 64 bytes
    Hash256 details_hash;
    Signature sign;
};

using Transaction = std::variant<NegotiationTx, ContractTx, SensorGenesisTx, DataAnchorTx,
                                 ClaimRequestTx, DataAccessTx, DecisionTx, CourtDecisionTx,
                                 PolicyAdvertTx>;

TxKind kind_of(const Transaction& tx);
const TxId& tid_of(const Transaction& tx);
void set_tid(Transaction& tx, const TxId& tid);

// p_t_id (or sct_ref for a sensor genesis); nullopt for unchained kinds.
std::optional<TxId> parent_of(const Transaction& tx);

bool is_multisig_kind(TxKind k);

// Insurer-signed summary of a contract's transaction chain, delivered to
// the user for presentation to a new insurer. Not a ledger transaction.
struct HistoryToken {
    Hash256 token_id; // digest of the canonical token body
    std::string policy_type;
    uint64_t valid_from_ms = 0;
    uint64_t valid_to_ms = 0;
    TxId last_tx_id;
    ConditionField metadata;
    PublicKey user_pk;
    PublicKey insurance_pk;
    Signature insurance_sign;
};

// --- Canonical encoding ---------------------------------------------------

// Body bytes: kind tag, then fields in declared order, each with a 4-byte
// big-endian length prefix; t_id and signature fields excluded.
Bytes canonical_bytes(const Transaction& tx);
TxId compute_tid(const Transaction& tx);

Bytes token_canonical_bytes(const HistoryToken& token);
Hash256 compute_token_id(const HistoryToken& token);

// Full wire form (t_id and signatures included) used for persistence and
// size accounting. Bit-exact: decode(encode(tx)) == tx.
Bytes encode_tx(const Transaction& tx);
Transaction decode_tx(ByteView data); // throws Err::DecodeError

Bytes encode_token(const HistoryToken& token);
HistoryToken decode_token(ByteView data);

// Human-readable projection for the CLI; never used for hashing.
nlohmann::json tx_to_json(const Transaction& tx);
nlohmann::json token_to_json(const HistoryToken& token);

// --- Ledger views ---------------------------------------------------------

// Read-only lookup surface the validator and builders run against; backed
// by the mined ledger alone or by ledger-plus-mempool during admission.
class LedgerView {
  public:
    virtual ~LedgerView() = default;

    virtual const Transaction* find(const TxId& tid) const = 0;

    // Every transaction whose parent path terminates at the given
    // contract, in view order, contract first. Empty if unknown.
    virtual std::vector<const Transaction*> contract_members(const TxId& sct_tid) const = 0;

    // Timestamp a transaction was mined at; nullopt while pending.
    virtual std::optional<uint64_t> tx_time_ms(const TxId& tid) const { return std::nullopt; }
};

// Follows parent links to the contract at the head of a chain. Nullopt if
// any link is dangling or the walk does not end at a ContractTx.
std::optional<TxId> resolve_contract_head(const LedgerView& view, const TxId& tid);

// --- Validation -----------------------------------------------------------

struct ValidationResult {
    bool ok = false;
    Err reason = Err::None;
    std::string detail;

    static ValidationResult accept() { return {true, Err::None, ""}; }
    static ValidationResult reject(Err why, std::string detail)
    {
        return {false, why, std::move(detail)};
    }
    explicit operator bool() const { return ok; }
};

// Checks in order: t_id recomputation, signature validity, multisig
// completeness, parent existence and chain membership, kind-specific
// invariants (amount rule, scope rule, court registry, size rules).
ValidationResult validate_tx(const Transaction& tx, const LedgerView& view,
                             std::span<const PublicKey> court_registry);

// The signature slots a transaction kind requires, in declared order.
// Pointers alias the passed transaction.
struct SignerSlot {
    const char* label;
    const PublicKey* pk;
    const Signature* sig;
};
std::vector<SignerSlot> signer_slots(const Transaction& tx);

// --- Builders -------------------------------------------------------------

NegotiationTx build_negotiation(const PartyKeys& author, const PublicKey& insurance_pk,
                                ByteView condition);

ContractTx build_contract(const PartyKeys& user, const PartyKeys& insurer, ByteView agreed_terms);

SensorGenesisTx build_sensor_genesis(const PartyKeys& user, const PartyKeys& insurer,
                                     const PublicKey& sensor_pk, const TxId& sct_ref);

DataAnchorTx build_data_anchor(const PartyKeys& author, const TxId& prev_tip,
                               const Hash256& data_hash);

// chain_tip must belong to the caller's own contract chain (terminating
// contract signed by these keys) or Err::ChainLinkError is thrown.
ClaimRequestTx build_claim(const PartyKeys& user, const PublicKey& insurance_pk,
                           const LedgerView& view, const TxId& chain_tip, ByteView claim_details,
                           std::optional<ByteView> shared_data);

DataAccessTx build_access(const PartyKeys& insurer, const PartyKeys& user, const LedgerView& view,
                          const TxId& claim_tid, AccessScope scope,
                          std::optional<Hash256> exchanged_data_hash = std::nullopt);

DecisionTx build_decision(const PartyKeys& insurer, const PartyKeys& user, const LedgerView& view,
                          const TxId& case_tip, Verdict verdict, uint64_t amount,
                          const Hash256& rationale_hash);

CourtDecisionTx build_court_decision(const PartyKeys& court, const TxId& disputed_tip,
                                     Verdict verdict, uint64_t amount,
                                     const Hash256& rationale_hash);

PolicyAdvertTx build_policy_advert(const PartyKeys& insurer, std::vector<std::string> keywords,
                                   const Hash256& details_hash);

// Issues the insurer-signed history token for a contract: last_tx_id is
// the chain tip, duration spans the mined timestamps of head and tip.
HistoryToken build_history_token(const PartyKeys& insurer, const LedgerView& view,
                                 const TxId& sct_tid, std::string policy_type,
                                 ByteView metadata);

// Signing helpers shared by builders and workflow countersign paths.
void sign_negotiation(NegotiationTx& tx, const PartyKeys& author);
void sign_contract_user(ContractTx& tx, const PartyKeys& user);
void sign_contract_insurer(ContractTx& tx, const PartyKeys& insurer);

} // namespace claimchain

template <> struct std::hash<claimchain::TxId> {
    size_t operator()(const claimchain::TxId& t) const noexcept
    {
        size_t out = 0;
        for (size_t i = 0; i < sizeof(size_t); ++i)
            out = (out << 8) | t.value.bytes[i];
        return out;
    }
};
