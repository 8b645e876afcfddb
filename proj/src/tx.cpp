// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/tx.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace claimchain {

const char* tx_kind_name(TxKind k)
{
    switch (k)
    {
    case TxKind::Negotiation: return "negotiation";
    case TxKind::Contract: return "contract";
    case TxKind::SensorGenesis: return "sensor_genesis";
    case TxKind::DataAnchor: return "data_anchor";
    case TxKind::ClaimRequest: return "claim_request";
    case TxKind::DataAccess: return "data_access";
    case TxKind::Decision: return "decision";
    case TxKind::CourtDecision: return "court_decision";
    case TxKind::PolicyAdvert: return "policy_advert";
    }
    return "unknown";
}

ConditionField ConditionField::of(ByteView payload)
{
    if (payload.empty())
        throw Error(Err::InvariantViolation, "empty condition payload");
    ConditionField f;
    if (payload.size() <= kInlineThreshold)
    {
        f.mode = Mode::Inline;
        f.inline_bytes.assign(payload.begin(), payload.end());
    }
    else
    {
        f.mode = Mode::HashOnly;
        f.content_hash = digest(payload);
    }
    return f;
}

Hash256 ConditionField::commitment() const
{
    return mode == Mode::Inline ? digest(ByteView(inline_bytes)) : content_hash;
}

bool AccessScope::covers(const PublicKey& sensor, uint64_t at_ms) const
{
    if (at_ms < from_ms || at_ms > to_ms)
        return false;
    return std::find(sensors.begin(), sensors.end(), sensor) != sensors.end();
}

TxKind kind_of(const Transaction& tx)
{
    return static_cast<TxKind>(tx.index() + 1);
}

const TxId& tid_of(const Transaction& tx)
{
    return std::visit([](const auto& t) -> const TxId& { return t.t_id; }, tx);
}

void set_tid(Transaction& tx, const TxId& tid)
{
    std::visit([&](auto& t) { t.t_id = tid; }, tx);
}

std::optional<TxId> parent_of(const Transaction& tx)
{
    struct Visitor {
        std::optional<TxId> operator()(const NegotiationTx&) { return std::nullopt; }
        std::optional<TxId> operator()(const ContractTx&) { return std::nullopt; }
        std::optional<TxId> operator()(const SensorGenesisTx& t) { return t.sct_ref; }
        std::optional<TxId> operator()(const DataAnchorTx& t) { return t.p_t_id; }
        std::optional<TxId> operator()(const ClaimRequestTx& t) { return t.p_t_id; }
        std::optional<TxId> operator()(const DataAccessTx& t) { return t.p_t_id; }
        std::optional<TxId> operator()(const DecisionTx& t) { return t.p_t_id; }
        std::optional<TxId> operator()(const CourtDecisionTx& t) { return t.p_t_id; }
        std::optional<TxId> operator()(const PolicyAdvertTx&) { return std::nullopt; }
    };
    return std::visit(Visitor{}, tx);
}

bool is_multisig_kind(TxKind k)
{
    return k == TxKind::Contract || k == TxKind::SensorGenesis || k == TxKind::DataAccess ||
           k == TxKind::Decision;
}

// --- Composite field payloads ----------------------------------------------

namespace {

Bytes condition_payload(const ConditionField& c)
{
    Encoder enc;
    enc.raw_u8(static_cast<uint8_t>(c.mode));
    if (c.mode == ConditionField::Mode::Inline)
        enc.raw(c.inline_bytes);
    else
        enc.raw(c.content_hash.bytes);
    return enc.take();
}

ConditionField decode_condition(ByteView payload)
{
    Decoder dec(payload);
    uint8_t mode = dec.raw_u8();
    ConditionField c;
    if (mode == static_cast<uint8_t>(ConditionField::Mode::Inline))
    {
        c.mode = ConditionField::Mode::Inline;
        c.inline_bytes = dec.raw(payload.size() - 1);
    }
    else if (mode == static_cast<uint8_t>(ConditionField::Mode::HashOnly))
    {
        c.mode = ConditionField::Mode::HashOnly;
        Bytes h = dec.raw(32);
        std::copy(h.begin(), h.end(), c.content_hash.bytes.begin());
    }
    else
    {
        throw Error(Err::DecodeError, "bad condition mode byte");
    }
    dec.expect_done();
    return c;
}

Bytes optional_hash_payload(const std::optional<Hash256>& h)
{
    Encoder enc;
    if (h)
    {
        enc.raw_u8(1);
        enc.raw(h->bytes);
    }
    else
    {
        enc.raw_u8(0);
    }
    return enc.take();
}

std::optional<Hash256> decode_optional_hash(ByteView payload)
{
    Decoder dec(payload);
    uint8_t present = dec.raw_u8();
    std::optional<Hash256> out;
    if (present == 1)
    {
        Bytes h = dec.raw(32);
        Hash256 hash;
        std::copy(h.begin(), h.end(), hash.bytes.begin());
        out = hash;
    }
    else if (present != 0)
    {
        throw Error(Err::DecodeError, "bad optional-hash presence byte");
    }
    dec.expect_done();
    return out;
}

Bytes scope_payload(const AccessScope& s)
{
    Encoder enc;
    enc.raw_u32(static_cast<uint32_t>(s.sensors.size()));
    for (const auto& pk : s.sensors)
        enc.raw(pk.bytes);
    enc.raw_u64(s.from_ms);
    enc.raw_u64(s.to_ms);
    return enc.take();
}

AccessScope decode_scope(ByteView payload)
{
    Decoder dec(payload);
    uint32_t n = dec.raw_u32();
    AccessScope s;
    s.sensors.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
    {
        Bytes raw = dec.raw(32);
        PublicKey pk;
        std::copy(raw.begin(), raw.end(), pk.bytes.begin());
        s.sensors.push_back(pk);
    }
    s.from_ms = dec.raw_u64();
    s.to_ms = dec.raw_u64();
    dec.expect_done();
    return s;
}

Bytes decision_payload(const DecisionBody& d)
{
    Encoder enc;
    enc.raw_u8(static_cast<uint8_t>(d.verdict));
    enc.raw_u64(d.amount);
    enc.raw(d.rationale_hash.bytes);
    return enc.take();
}

DecisionBody decode_decision(ByteView payload)
{
    Decoder dec(payload);
    uint8_t v = dec.raw_u8();
    if (v > 1)
        throw Error(Err::DecodeError, "bad verdict byte");
    DecisionBody d;
    d.verdict = static_cast<Verdict>(v);
    d.amount = dec.raw_u64();
    Bytes h = dec.raw(32);
    std::copy(h.begin(), h.end(), d.rationale_hash.bytes.begin());
    dec.expect_done();
    return d;
}

Bytes keywords_payload(const std::vector<std::string>& kws)
{
    Encoder enc;
    enc.raw_u32(static_cast<uint32_t>(kws.size()));
    for (const auto& kw : kws)
    {
        enc.raw_u32(static_cast<uint32_t>(kw.size()));
        enc.raw(as_bytes(kw));
    }
    return enc.take();
}

std::vector<std::string> decode_keywords(ByteView payload)
{
    Decoder dec(payload);
    uint32_t n = dec.raw_u32();
    std::vector<std::string> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
    {
        uint32_t len = dec.raw_u32();
        Bytes raw = dec.raw(len);
        out.emplace_back(raw.begin(), raw.end());
    }
    dec.expect_done();
    return out;
}

// --- Canonical body encoders (t_id and signatures excluded) ----------------

void body_fields(Encoder& enc, const NegotiationTx& t)
{
    enc.field(t.insurance_pk.bytes);
    enc.field(condition_payload(t.condition));
    enc.field(t.pk.bytes);
}

void body_fields(Encoder& enc, const ContractTx& t)
{
    enc.field(t.user_pk.bytes);
    enc.field(t.insurance_pk.bytes);
    enc.field(condition_payload(t.contract));
}

void body_fields(Encoder& enc, const SensorGenesisTx& t)
{
    enc.field(t.sct_ref.value.bytes);
    enc.field(t.sensor_pk.bytes);
    enc.field(t.user_pk.bytes);
    enc.field(t.insurance_pk.bytes);
}

void body_fields(Encoder& enc, const DataAnchorTx& t)
{
    enc.field(t.p_t_id.value.bytes);
    enc.field(t.data_hash.bytes);
    enc.field(t.sensor_pk.bytes);
}

void body_fields(Encoder& enc, const ClaimRequestTx& t)
{
    enc.field(t.p_t_id.value.bytes);
    enc.field(condition_payload(t.claim_request));
    enc.field(optional_hash_payload(t.data_hash));
    enc.field(t.insurance_pk.bytes);
    enc.field(t.user_pk.bytes);
}

void body_fields(Encoder& enc, const DataAccessTx& t)
{
    enc.field(t.p_t_id.value.bytes);
    enc.field(scope_payload(t.scope));
    enc.field(optional_hash_payload(t.exchanged_data_hash));
    enc.field(t.user_pk.bytes);
    enc.field(t.insurance_pk.bytes);
}

void body_fields(Encoder& enc, const DecisionTx& t)
{
    enc.field(t.p_t_id.value.bytes);
    enc.field(decision_payload(t.decision));
    enc.field(t.user_pk.bytes);
    enc.field(t.insurance_pk.bytes);
}

void body_fields(Encoder& enc, const CourtDecisionTx& t)
{
    enc.field(t.p_t_id.value.bytes);
    enc.field(decision_payload(t.decision));
    enc.field(t.court_pk.bytes);
}

void body_fields(Encoder& enc, const PolicyAdvertTx& t)
{
    enc.field(t.insurance_pk.bytes);
    enc.field(keywords_payload(t.keywords));
    enc.field(t.details_hash.bytes);
}

TxId field_tid(const Bytes& raw)
{
    if (raw.size() != 32)
        throw Error(Err::DecodeError, "tx id field must be 32 bytes");
    TxId t;
    std::copy(raw.begin(), raw.end(), t.value.bytes.begin());
    return t;
}

Hash256 field_hash(const Bytes& raw)
{
    if (raw.size() != 32)
        throw Error(Err::DecodeError, "hash field must be 32 bytes");
    Hash256 h;
    std::copy(raw.begin(), raw.end(), h.bytes.begin());
    return h;
}

PublicKey field_pk(const Bytes& raw)
{
    if (raw.size() != 32)
        throw Error(Err::DecodeError, "public key field must be 32 bytes");
    PublicKey pk;
    std::copy(raw.begin(), raw.end(), pk.bytes.begin());
    return pk;
}

Signature field_sig(Bytes raw)
{
    return Signature{std::move(raw)};
}

} // namespace

Bytes canonical_bytes(const Transaction& tx)
{
    Encoder enc;
    enc.tag(static_cast<uint8_t>(kind_of(tx)));
    std::visit([&](const auto& t) { body_fields(enc, t); }, tx);
    return enc.take();
}

TxId compute_tid(const Transaction& tx)
{
    return TxId{digest(ByteView(canonical_bytes(tx)))};
}

// --- Full wire encoding -----------------------------------------------------

namespace {

constexpr uint8_t kTokenTag = 0x0a;

struct WireEncoder {
    Encoder enc;

    void operator()(const NegotiationTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.insurance_pk.bytes);
        enc.field(condition_payload(t.condition));
        enc.field(t.pk.bytes);
        enc.field(t.sign.bytes);
    }
    void operator()(const ContractTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.user_pk.bytes);
        enc.field(t.user_sign.bytes);
        enc.field(t.insurance_pk.bytes);
        enc.field(t.insurance_sign.bytes);
        enc.field(condition_payload(t.contract));
    }
    void operator()(const SensorGenesisTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.sct_ref.value.bytes);
        enc.field(t.sensor_pk.bytes);
        enc.field(t.user_pk.bytes);
        enc.field(t.user_sign.bytes);
        enc.field(t.insurance_pk.bytes);
        enc.field(t.insurance_sign.bytes);
    }
    void operator()(const DataAnchorTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.p_t_id.value.bytes);
        enc.field(t.data_hash.bytes);
        enc.field(t.sensor_pk.bytes);
        enc.field(t.sign.bytes);
    }
    void operator()(const ClaimRequestTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.p_t_id.value.bytes);
        enc.field(condition_payload(t.claim_request));
        enc.field(optional_hash_payload(t.data_hash));
        enc.field(t.insurance_pk.bytes);
        enc.field(t.user_pk.bytes);
        enc.field(t.sign.bytes);
    }
    void operator()(const DataAccessTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.p_t_id.value.bytes);
        enc.field(scope_payload(t.scope));
        enc.field(optional_hash_payload(t.exchanged_data_hash));
        enc.field(t.user_pk.bytes);
        enc.field(t.user_sign.bytes);
        enc.field(t.insurance_pk.bytes);
        enc.field(t.insurance_sign.bytes);
    }
    void operator()(const DecisionTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.p_t_id.value.bytes);
        enc.field(decision_payload(t.decision));
        enc.field(t.user_pk.bytes);
        enc.field(t.user_sign.bytes);
        enc.field(t.insurance_pk.bytes);
        enc.field(t.insurance_sign.bytes);
    }
    void operator()(const CourtDecisionTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.p_t_id.value.bytes);
        enc.field(decision_payload(t.decision));
        enc.field(t.court_pk.bytes);
        enc.field(t.court_sign.bytes);
    }
    void operator()(const PolicyAdvertTx& t)
    {
        enc.field(t.t_id.value.bytes);
        enc.field(t.insurance_pk.bytes);
        enc.field(keywords_payload(t.keywords));
        enc.field(t.details_hash.bytes);
        enc.field(t.sign.bytes);
    }
};

} // namespace

Bytes encode_tx(const Transaction& tx)
{
    WireEncoder w;
    w.enc.tag(static_cast<uint8_t>(kind_of(tx)));
    std::visit(w, tx);
    return w.enc.take();
}

Transaction decode_tx(ByteView data)
{
    Decoder dec(data);
    auto kind = dec.tag();
    Transaction out;
    switch (static_cast<TxKind>(kind))
    {
    case TxKind::Negotiation: {
        NegotiationTx t;
        t.t_id = field_tid(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.condition = decode_condition(dec.field());
        t.pk = field_pk(dec.field());
        t.sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::Contract: {
        ContractTx t;
        t.t_id = field_tid(dec.field());
        t.user_pk = field_pk(dec.field());
        t.user_sign = field_sig(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.insurance_sign = field_sig(dec.field());
        t.contract = decode_condition(dec.field());
        out = t;
        break;
    }
    case TxKind::SensorGenesis: {
        SensorGenesisTx t;
        t.t_id = field_tid(dec.field());
        t.sct_ref = field_tid(dec.field());
        t.sensor_pk = field_pk(dec.field());
        t.user_pk = field_pk(dec.field());
        t.user_sign = field_sig(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.insurance_sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::DataAnchor: {
        DataAnchorTx t;
        t.t_id = field_tid(dec.field());
        t.p_t_id = field_tid(dec.field());
        t.data_hash = field_hash(dec.field());
        t.sensor_pk = field_pk(dec.field());
        t.sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::ClaimRequest: {
        ClaimRequestTx t;
        t.t_id = field_tid(dec.field());
        t.p_t_id = field_tid(dec.field());
        t.claim_request = decode_condition(dec.field());
        t.data_hash = decode_optional_hash(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.user_pk = field_pk(dec.field());
        t.sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::DataAccess: {
        DataAccessTx t;
        t.t_id = field_tid(dec.field());
        t.p_t_id = field_tid(dec.field());
        t.scope = decode_scope(dec.field());
        t.exchanged_data_hash = decode_optional_hash(dec.field());
        t.user_pk = field_pk(dec.field());
        t.user_sign = field_sig(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.insurance_sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::Decision: {
        DecisionTx t;
        t.t_id = field_tid(dec.field());
        t.p_t_id = field_tid(dec.field());
        t.decision = decode_decision(dec.field());
        t.user_pk = field_pk(dec.field());
        t.user_sign = field_sig(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.insurance_sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::CourtDecision: {
        CourtDecisionTx t;
        t.t_id = field_tid(dec.field());
        t.p_t_id = field_tid(dec.field());
        t.decision = decode_decision(dec.field());
        t.court_pk = field_pk(dec.field());
        t.court_sign = field_sig(dec.field());
        out = t;
        break;
    }
    case TxKind::PolicyAdvert: {
        PolicyAdvertTx t;
        t.t_id = field_tid(dec.field());
        t.insurance_pk = field_pk(dec.field());
        t.keywords = decode_keywords(dec.field());
        t.details_hash = field_hash(dec.field());
        t.sign = field_sig(dec.field());
        out = t;
        break;
    }
    default:
        throw Error(Err::DecodeError, "unknown transaction kind tag");
    }
    dec.expect_done();
    return out;
}

Bytes token_canonical_bytes(const HistoryToken& token)
{
    Encoder enc;
    enc.tag(kTokenTag);
    enc.field(as_bytes(token.policy_type));
    enc.field_u64(token.valid_from_ms);
    enc.field_u64(token.valid_to_ms);
    enc.field(token.last_tx_id.value.bytes);
    enc.field(condition_payload(token.metadata));
    enc.field(token.user_pk.bytes);
    enc.field(token.insurance_pk.bytes);
    return enc.take();
}

Hash256 compute_token_id(const HistoryToken& token)
{
    return digest(ByteView(token_canonical_bytes(token)));
}

Bytes encode_token(const HistoryToken& token)
{
    Encoder enc;
    enc.tag(kTokenTag);
    enc.field(token.token_id.bytes);
    enc.field(as_bytes(token.policy_type));
    enc.field_u64(token.valid_from_ms);
    enc.field_u64(token.valid_to_ms);
    enc.field(token.last_tx_id.value.bytes);
    enc.field(condition_payload(token.metadata));
    enc.field(token.user_pk.bytes);
    enc.field(token.insurance_pk.bytes);
    enc.field(token.insurance_sign.bytes);
    return enc.take();
}

HistoryToken decode_token(ByteView data)
{
    Decoder dec(data);
    if (dec.tag() != kTokenTag)
        throw Error(Err::DecodeError, "not a history token");
    HistoryToken t;
    t.token_id = field_hash(dec.field());
    Bytes policy = dec.field();
    t.policy_type.assign(policy.begin(), policy.end());
    t.valid_from_ms = dec.field_u64();
    t.valid_to_ms = dec.field_u64();
    t.last_tx_id = field_tid(dec.field());
    t.metadata = decode_condition(dec.field());
    t.user_pk = field_pk(dec.field());
    t.insurance_pk = field_pk(dec.field());
    t.insurance_sign = field_sig(dec.field());
    dec.expect_done();
    return t;
}

// --- JSON projection --------------------------------------------------------

namespace {

nlohmann::json condition_json(const ConditionField& c)
{
    nlohmann::json j;
    if (c.mode == ConditionField::Mode::Inline)
    {
        j["mode"] = "inline";
        j["bytes"] = to_hex(c.inline_bytes);
        j["size"] = c.inline_bytes.size();
    }
    else
    {
        j["mode"] = "hash_only";
        j["content_hash"] = c.content_hash.hex();
    }
    return j;
}

nlohmann::json decision_json(const DecisionBody& d)
{
    return {{"verdict", d.verdict == Verdict::Approved ? "approved" : "rejected"},
            {"amount", d.amount},
            {"rationale_hash", d.rationale_hash.hex()}};
}

} // namespace

nlohmann::json tx_to_json(const Transaction& tx)
{
    nlohmann::json j;
    j["kind"] = tx_kind_name(kind_of(tx));
    j["t_id"] = tid_of(tx).hex();
    std::visit(
        [&](const auto& t) {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, NegotiationTx>)
            {
                j["insurance_pk"] = t.insurance_pk.hex();
                j["condition"] = condition_json(t.condition);
                j["pk"] = t.pk.hex();
                j["sign"] = t.sign.hex();
            }
            else if constexpr (std::is_same_v<T, ContractTx>)
            {
                j["user_pk"] = t.user_pk.hex();
                j["user_sign"] = t.user_sign.hex();
                j["insurance_pk"] = t.insurance_pk.hex();
                j["insurance_sign"] = t.insurance_sign.hex();
                j["contract"] = condition_json(t.contract);
            }
            else if constexpr (std::is_same_v<T, SensorGenesisTx>)
            {
                j["sct_ref"] = t.sct_ref.hex();
                j["sensor_pk"] = t.sensor_pk.hex();
                j["user_pk"] = t.user_pk.hex();
                j["user_sign"] = t.user_sign.hex();
                j["insurance_pk"] = t.insurance_pk.hex();
                j["insurance_sign"] = t.insurance_sign.hex();
            }
            else if constexpr (std::is_same_v<T, DataAnchorTx>)
            {
                j["p_t_id"] = t.p_t_id.hex();
                j["data_hash"] = t.data_hash.hex();
                j["sensor_pk"] = t.sensor_pk.hex();
                j["sign"] = t.sign.hex();
            }
            else if constexpr (std::is_same_v<T, ClaimRequestTx>)
            {
                j["p_t_id"] = t.p_t_id.hex();
                j["claim_request"] = condition_json(t.claim_request);
                if (t.data_hash)
                    j["data_hash"] = t.data_hash->hex();
                j["insurance_pk"] = t.insurance_pk.hex();
                j["user_pk"] = t.user_pk.hex();
                j["sign"] = t.sign.hex();
            }
            else if constexpr (std::is_same_v<T, DataAccessTx>)
            {
                j["p_t_id"] = t.p_t_id.hex();
                nlohmann::json sensors = nlohmann::json::array();
                for (const auto& pk : t.scope.sensors)
                    sensors.push_back(pk.hex());
                j["scope"] = {{"sensors", sensors},
                              {"from_ms", t.scope.from_ms},
                              {"to_ms", t.scope.to_ms}};
                if (t.exchanged_data_hash)
                    j["exchanged_data_hash"] = t.exchanged_data_hash->hex();
                j["user_pk"] = t.user_pk.hex();
                j["user_sign"] = t.user_sign.hex();
                j["insurance_pk"] = t.insurance_pk.hex();
                j["insurance_sign"] = t.insurance_sign.hex();
            }
            else if constexpr (std::is_same_v<T, DecisionTx>)
            {
                j["p_t_id"] = t.p_t_id.hex();
                j["decision"] = decision_json(t.decision);
                j["user_pk"] = t.user_pk.hex();
                j["user_sign"] = t.user_sign.hex();
                j["insurance_pk"] = t.insurance_pk.hex();
                j["insurance_sign"] = t.insurance_sign.hex();
            }
            else if constexpr (std::is_same_v<T, CourtDecisionTx>)
            {
                j["p_t_id"] = t.p_t_id.hex();
                j["decision"] = decision_json(t.decision);
                j["court_pk"] = t.court_pk.hex();
                j["court_sign"] = t.court_sign.hex();
            }
            else if constexpr (std::is_same_v<T, PolicyAdvertTx>)
            {
                j["insurance_pk"] = t.insurance_pk.hex();
                j["keywords"] = t.keywords;
                j["details_hash"] = t.details_hash.hex();
                j["sign"] = t.sign.hex();
            }
        },
        tx);
    return j;
}

nlohmann::json token_to_json(const HistoryToken& token)
{
    return {{"token_id", token.token_id.hex()},
            {"policy_type", token.policy_type},
            {"valid_from_ms", token.valid_from_ms},
            {"valid_to_ms", token.valid_to_ms},
            {"last_tx_id", token.last_tx_id.hex()},
            {"metadata", condition_json(token.metadata)},
            {"user_pk", token.user_pk.hex()},
            {"insurance_pk", token.insurance_pk.hex()},
            {"insurance_sign", token.insurance_sign.hex()}};
}

// --- Chain walking ----------------------------------------------------------

std::optional<TxId> resolve_contract_head(const LedgerView& view, const TxId& tid)
{
    std::unordered_set<TxId> seen;
    TxId cur = tid;
    while (true)
    {
        if (!seen.insert(cur).second)
            return std::nullopt; // cycle
        const Transaction* tx = view.find(cur);
        if (!tx)
            return std::nullopt;
        if (kind_of(*tx) == TxKind::Contract)
            return cur;
        std::optional<TxId> parent = parent_of(*tx);
        if (!parent)
            return std::nullopt;
        cur = *parent;
    }
}

// --- Validation ---------------------------------------------------------

std::vector<SignerSlot> signer_slots(const Transaction& tx)
{
    struct Visitor {
        std::vector<SignerSlot> operator()(const NegotiationTx& t)
        {
            return {{"author", &t.pk, &t.sign}};
        }
        std::vector<SignerSlot> operator()(const ContractTx& t)
        {
            return {{"user", &t.user_pk, &t.user_sign},
                    {"insurer", &t.insurance_pk, &t.insurance_sign}};
        }
        std::vector<SignerSlot> operator()(const SensorGenesisTx& t)
        {
            return {{"user", &t.user_pk, &t.user_sign},
                    {"insurer", &t.insurance_pk, &t.insurance_sign}};
        }
        std::vector<SignerSlot> operator()(const DataAnchorTx& t)
        {
            return {{"sensor", &t.sensor_pk, &t.sign}};
        }
        std::vector<SignerSlot> operator()(const ClaimRequestTx& t)
        {
            return {{"user", &t.user_pk, &t.sign}};
        }
        std::vector<SignerSlot> operator()(const DataAccessTx& t)
        {
            return {{"user", &t.user_pk, &t.user_sign},
                    {"insurer", &t.insurance_pk, &t.insurance_sign}};
        }
        std::vector<SignerSlot> operator()(const DecisionTx& t)
        {
            return {{"user", &t.user_pk, &t.user_sign},
                    {"insurer", &t.insurance_pk, &t.insurance_sign}};
        }
        std::vector<SignerSlot> operator()(const CourtDecisionTx& t)
        {
            return {{"court", &t.court_pk, &t.court_sign}};
        }
        std::vector<SignerSlot> operator()(const PolicyAdvertTx& t)
        {
            return {{"insurer", &t.insurance_pk, &t.sign}};
        }
    };
    return std::visit(Visitor{}, tx);
}

namespace {

std::optional<std::string> condition_error(const ConditionField& c, const char* what)
{
    if (c.mode == ConditionField::Mode::Inline)
    {
        if (c.inline_bytes.empty())
            return std::string(what) + " is empty";
        if (c.inline_bytes.size() > kInlineThreshold)
            return std::string(what) + " exceeds inline threshold";
    }
    return std::nullopt;
}

const ContractTx* head_contract(const LedgerView& view, const TxId& from,
                                std::optional<TxId>* head_tid)
{
    auto head = resolve_contract_head(view, from);
    if (head_tid)
        *head_tid = head;
    if (!head)
        return nullptr;
    const Transaction* tx = view.find(*head);
    return std::get_if<ContractTx>(tx);
}

ValidationResult kind_checks(const Transaction& tx, const LedgerView& view,
                             std::span<const PublicKey> court_registry)
{
    using VR = ValidationResult;
    struct Visitor {
        const LedgerView& view;
        std::span<const PublicKey> courts;

        VR operator()(const NegotiationTx& t)
        {
            if (auto err = condition_error(t.condition, "condition"))
                return VR::reject(Err::InvariantViolation, *err);
            return VR::accept();
        }
        VR operator()(const ContractTx& t)
        {
            if (auto err = condition_error(t.contract, "contract"))
                return VR::reject(Err::InvariantViolation, *err);
            return VR::accept();
        }
        VR operator()(const SensorGenesisTx& t)
        {
            const Transaction* ref = view.find(t.sct_ref);
            const auto* sct = ref ? std::get_if<ContractTx>(ref) : nullptr;
            if (!sct)
                return VR::reject(Err::ChainLinkError, "sct_ref is not a contract");
            if (sct->user_pk != t.user_pk || sct->insurance_pk != t.insurance_pk)
                return VR::reject(Err::InvariantViolation,
                                  "genesis signers differ from contract parties");
            return VR::accept();
        }
        VR operator()(const DataAnchorTx&) { return VR::accept(); }
        VR operator()(const ClaimRequestTx& t)
        {
            if (auto err = condition_error(t.claim_request, "claim request"))
                return VR::reject(Err::InvariantViolation, *err);
            const ContractTx* sct = head_contract(view, t.p_t_id, nullptr);
            if (!sct)
                return VR::reject(Err::ChainLinkError, "claim does not chain to a contract");
            if (sct->user_pk != t.user_pk || sct->insurance_pk != t.insurance_pk)
                return VR::reject(Err::ChainLinkError, "claim chained to an unrelated contract");
            return VR::accept();
        }
        VR operator()(const DataAccessTx& t)
        {
            const Transaction* prev = view.find(t.p_t_id);
            const auto* claim = prev ? std::get_if<ClaimRequestTx>(prev) : nullptr;
            if (!claim)
                return VR::reject(Err::ChainLinkError, "data access must answer a claim request");
            if (claim->user_pk != t.user_pk || claim->insurance_pk != t.insurance_pk)
                return VR::reject(Err::InvariantViolation,
                                  "access parties differ from the claim's");
            if (t.scope.from_ms > t.scope.to_ms)
                return VR::reject(Err::InvariantViolation, "scope time range is inverted");
            std::optional<TxId> head;
            head_contract(view, t.p_t_id, &head);
            if (!head)
                return VR::reject(Err::ChainLinkError, "claim does not chain to a contract");
            std::set<PublicKey> registered;
            for (const Transaction* member : view.contract_members(*head))
                if (const auto* gen = std::get_if<SensorGenesisTx>(member))
                    registered.insert(gen->sensor_pk);
            for (const PublicKey& pk : t.scope.sensors)
                if (!registered.count(pk))
                    return VR::reject(Err::ScopeError,
                                      "scope names an unregistered sensor " + pk.hex());
            return VR::accept();
        }
        VR operator()(const DecisionTx& t)
        {
            if (t.decision.verdict == Verdict::Rejected && t.decision.amount != 0)
                return VR::reject(Err::InvariantViolation, "rejected decision with amount > 0");
            const ContractTx* sct = head_contract(view, t.p_t_id, nullptr);
            if (!sct)
                return VR::reject(Err::ChainLinkError, "decision does not chain to a contract");
            if (sct->user_pk != t.user_pk || sct->insurance_pk != t.insurance_pk)
                return VR::reject(Err::ChainLinkError, "decision chained to an unrelated contract");
            return VR::accept();
        }
        VR operator()(const CourtDecisionTx& t)
        {
            if (t.decision.verdict == Verdict::Rejected && t.decision.amount != 0)
                return VR::reject(Err::InvariantViolation, "rejected decision with amount > 0");
            bool known = std::find(courts.begin(), courts.end(), t.court_pk) != courts.end();
            if (!known)
                return VR::reject(Err::AuthorizationError, "court key not in registry");
            return VR::accept();
        }
        VR operator()(const PolicyAdvertTx& t)
        {
            for (const auto& kw : t.keywords)
                if (kw.size() > 64)
                    return VR::reject(Err::InvariantViolation, "keyword longer than 64 bytes");
            return VR::accept();
        }
    };
    return std::visit(Visitor{view, court_registry}, tx);
}

} // namespace

ValidationResult validate_tx(const Transaction& tx, const LedgerView& view,
                             std::span<const PublicKey> court_registry)
{
    // 1. t_id recomputation
    if (compute_tid(tx) != tid_of(tx))
        return ValidationResult::reject(Err::TidMismatch, "stored t_id does not match body");

    // 2. signatures over the canonical body
    Bytes body = canonical_bytes(tx);
    bool multisig = is_multisig_kind(kind_of(tx));
    size_t missing = 0;
    for (const SignerSlot& slot : signer_slots(tx))
    {
        if (!slot.sig->present())
        {
            if (multisig)
            {
                ++missing;
                continue;
            }
            return ValidationResult::reject(Err::BadSignature,
                                            std::string(slot.label) + " signature missing");
        }
        if (!verify(*slot.pk, body, *slot.sig))
            return ValidationResult::reject(Err::BadSignature,
                                            std::string(slot.label) + " signature invalid");
    }

    // 3. multisig completeness (2-of-2)
    if (missing > 0)
        return ValidationResult::reject(Err::MultisigIncomplete,
                                        "multisig transaction lacks a countersignature");

    // 4. parent existence and chain membership
    if (auto parent = parent_of(tx))
    {
        if (!view.find(*parent))
            return ValidationResult::reject(Err::ChainLinkError,
                                            "unknown previous transaction " + parent->hex());
        if (!resolve_contract_head(view, *parent))
            return ValidationResult::reject(Err::ChainLinkError,
                                            "previous transaction does not chain to a contract");
    }

    // 5. kind-specific invariants
    return kind_checks(tx, view, court_registry);
}

// --- Builders ----------------------------------------------------------------

namespace {

Signature sign_body(const Transaction& tx, const SecretKey& sk)
{
    return sign(sk, ByteView(canonical_bytes(tx)));
}

} // namespace

void sign_negotiation(NegotiationTx& tx, const PartyKeys& author)
{
    Transaction t = tx;
    tx.sign = sign_body(t, author.sk);
}

void sign_contract_user(ContractTx& tx, const PartyKeys& user)
{
    Transaction t = tx;
    tx.user_sign = sign_body(t, user.sk);
}

void sign_contract_insurer(ContractTx& tx, const PartyKeys& insurer)
{
    Transaction t = tx;
    tx.insurance_sign = sign_body(t, insurer.sk);
}

NegotiationTx build_negotiation(const PartyKeys& author, const PublicKey& insurance_pk,
                                ByteView condition)
{
    NegotiationTx tx;
    tx.insurance_pk = insurance_pk;
    tx.condition = ConditionField::of(condition); // rejects empty conditions
    tx.pk = author.pk;
    tx.t_id = compute_tid(tx);
    sign_negotiation(tx, author);
    return tx;
}

ContractTx build_contract(const PartyKeys& user, const PartyKeys& insurer, ByteView agreed_terms)
{
    ContractTx tx;
    tx.user_pk = user.pk;
    tx.insurance_pk = insurer.pk;
    tx.contract = ConditionField::of(agreed_terms);
    tx.t_id = compute_tid(tx);
    sign_contract_user(tx, user);
    sign_contract_insurer(tx, insurer);
    return tx;
}

SensorGenesisTx build_sensor_genesis(const PartyKeys& user, const PartyKeys& insurer,
                                     const PublicKey& sensor_pk, const TxId& sct_ref)
{
    SensorGenesisTx tx;
    tx.sct_ref = sct_ref;
    tx.sensor_pk = sensor_pk;
    tx.user_pk = user.pk;
    tx.insurance_pk = insurer.pk;
    tx.t_id = compute_tid(tx);
    Bytes body = canonical_bytes(tx);
    tx.user_sign = sign(user.sk, body);
    tx.insurance_sign = sign(insurer.sk, body);
    return tx;
}

DataAnchorTx build_data_anchor(const PartyKeys& author, const TxId& prev_tip,
                               const Hash256& data_hash)
{
    DataAnchorTx tx;
    tx.p_t_id = prev_tip;
    tx.data_hash = data_hash;
    tx.sensor_pk = author.pk;
    tx.t_id = compute_tid(tx);
    tx.sign = sign_body(tx, author.sk);
    return tx;
}

ClaimRequestTx build_claim(const PartyKeys& user, const PublicKey& insurance_pk,
                           const LedgerView& view, const TxId& chain_tip, ByteView claim_details,
                           std::optional<ByteView> shared_data)
{
    const ContractTx* sct = head_contract(view, chain_tip, nullptr);
    if (!sct || sct->user_pk != user.pk || sct->insurance_pk != insurance_pk)
        throw Error(Err::ChainLinkError, "chain tip is not in the caller's contract chain");

    ClaimRequestTx tx;
    tx.p_t_id = chain_tip;
    tx.claim_request = ConditionField::of(claim_details);
    if (shared_data)
        tx.data_hash = digest(*shared_data);
    tx.insurance_pk = insurance_pk;
    tx.user_pk = user.pk;
    tx.t_id = compute_tid(tx);
    tx.sign = sign_body(tx, user.sk);
    return tx;
}

DataAccessTx build_access(const PartyKeys& insurer, const PartyKeys& user, const LedgerView& view,
                          const TxId& claim_tid, AccessScope scope,
                          std::optional<Hash256> exchanged_data_hash)
{
    const Transaction* prev = view.find(claim_tid);
    const auto* claim = prev ? std::get_if<ClaimRequestTx>(prev) : nullptr;
    if (!claim)
        throw Error(Err::NotFound, "claim " + claim_tid.hex() + " not found");

    std::optional<TxId> head;
    head_contract(view, claim_tid, &head);
    if (!head)
        throw Error(Err::ChainLinkError, "claim does not chain to a contract");
    std::set<PublicKey> registered;
    for (const Transaction* member : view.contract_members(*head))
        if (const auto* gen = std::get_if<SensorGenesisTx>(member))
            registered.insert(gen->sensor_pk);
    for (const PublicKey& pk : scope.sensors)
        if (!registered.count(pk))
            throw Error(Err::ScopeError, "scope names an unregistered sensor " + pk.hex());

    DataAccessTx tx;
    tx.p_t_id = claim_tid;
    tx.scope = std::move(scope);
    tx.exchanged_data_hash = exchanged_data_hash;
    tx.user_pk = user.pk;
    tx.insurance_pk = insurer.pk;
    tx.t_id = compute_tid(tx);
    Bytes body = canonical_bytes(Transaction{tx});
    tx.insurance_sign = sign(insurer.sk, body);
    tx.user_sign = sign(user.sk, body);
    return tx;
}

DecisionTx build_decision(const PartyKeys& insurer, const PartyKeys& user, const LedgerView& view,
                          const TxId& case_tip, Verdict verdict, uint64_t amount,
                          const Hash256& rationale_hash)
{
    if (verdict == Verdict::Rejected && amount != 0)
        throw Error(Err::InvariantViolation, "rejected decision cannot carry an amount");
    if (!resolve_contract_head(view, case_tip))
        throw Error(Err::ChainLinkError, "case tip does not chain to a contract");

    DecisionTx tx;
    tx.p_t_id = case_tip;
    tx.decision = {verdict, amount, rationale_hash};
    tx.user_pk = user.pk;
    tx.insurance_pk = insurer.pk;
    tx.t_id = compute_tid(tx);
    Bytes body = canonical_bytes(Transaction{tx});
    tx.insurance_sign = sign(insurer.sk, body);
    tx.user_sign = sign(user.sk, body);
    return tx;
}

CourtDecisionTx build_court_decision(const PartyKeys& court, const TxId& disputed_tip,
                                     Verdict verdict, uint64_t amount,
                                     const Hash256& rationale_hash)
{
    if (verdict == Verdict::Rejected && amount != 0)
        throw Error(Err::InvariantViolation, "rejected decision cannot carry an amount");
    CourtDecisionTx tx;
    tx.p_t_id = disputed_tip;
    tx.decision = {verdict, amount, rationale_hash};
    tx.court_pk = court.pk;
    tx.t_id = compute_tid(tx);
    tx.court_sign = sign_body(tx, court.sk);
    return tx;
}

PolicyAdvertTx build_policy_advert(const PartyKeys& insurer, std::vector<std::string> keywords,
                                   const Hash256& details_hash)
{
    for (const auto& kw : keywords)
        if (kw.size() > 64)
            throw Error(Err::InvariantViolation, "keyword longer than 64 bytes: " + kw);
    PolicyAdvertTx tx;
    tx.insurance_pk = insurer.pk;
    tx.keywords = std::move(keywords);
    tx.details_hash = details_hash;
    tx.t_id = compute_tid(tx);
    tx.sign = sign_body(tx, insurer.sk);
    return tx;
}

HistoryToken build_history_token(const PartyKeys& insurer, const LedgerView& view,
                                 const TxId& sct_tid, std::string policy_type, ByteView metadata)
{
    const Transaction* head = view.find(sct_tid);
    const auto* sct = head ? std::get_if<ContractTx>(head) : nullptr;
    if (!sct)
        throw Error(Err::NotFound, "contract " + sct_tid.hex() + " not found");
    if (sct->insurance_pk != insurer.pk)
        throw Error(Err::AuthorizationError, "token issuer is not the contract's insurer");

    auto members = view.contract_members(sct_tid);
    const TxId& tip = members.empty() ? sct_tid : tid_of(*members.back());

    HistoryToken token;
    token.policy_type = std::move(policy_type);
    token.valid_from_ms = view.tx_time_ms(sct_tid).value_or(0);
    token.valid_to_ms = view.tx_time_ms(tip).value_or(token.valid_from_ms);
    token.last_tx_id = tip;
    token.metadata = metadata.empty() ? ConditionField{} : ConditionField::of(metadata);
    token.user_pk = sct->user_pk;
    token.insurance_pk = insurer.pk;
    token.token_id = compute_token_id(token);
    token.insurance_sign = sign(insurer.sk, ByteView(token_canonical_bytes(token)));
    return token;
}

} // namespace claimchain
