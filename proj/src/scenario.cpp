// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#include "claimchain/scenario.hpp"

#include <fstream>
#include <sstream>

namespace claimchain {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> tokenize(const std::string& line, size_t line_no)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char ch : line)
    {
        if (ch == '"')
        {
            quoted = !quoted;
            continue;
        }
        if (!quoted && ch == '#')
            break;
        if (!quoted && (ch == ' ' || ch == '\t'))
        {
            if (!cur.empty())
                out.push_back(std::exchange(cur, ""));
            continue;
        }
        cur.push_back(ch);
    }
    if (quoted)
        throw ScenarioError(line_no, 0, "unterminated quote");
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

bool is_flag(const std::string& tok)
{
    return tok == "refuse" || tok == "withhold";
}

} // namespace

ScenarioScript ScenarioScript::parse(const std::string& text)
{
    ScenarioScript script;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        std::vector<std::string> tokens = tokenize(line, line_no);
        if (tokens.empty())
            continue;
        ScenarioStep step;
        step.line_no = line_no;
        step.action = tokens[0];
        for (size_t i = 1; i < tokens.size(); ++i)
        {
            auto eq = tokens[i].find('=');
            if (eq != std::string::npos && eq > 0)
                step.kwargs[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
            else if (is_flag(tokens[i]))
                step.kwargs[tokens[i]] = "true";
            else
                step.args.push_back(tokens[i]);
        }
        script.steps.push_back(std::move(step));
    }
    return script;
}

ScenarioScript ScenarioScript::load(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(Err::IoError, "cannot open script " + p.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text);
}

namespace {

// Mutable world the steps act on.
struct Runner {
    Network net;
    OffchainStore store;
    AccountBook accounts;
    std::map<std::string, InsurerDb> dbs;       // per insurer
    std::map<std::string, Bytes> agreed;        // "user|insurer" -> accepted terms
    std::map<std::string, TxId> contracts;      // "user|insurer" -> latest contract
    std::map<std::string, ClaimCase> cases;     // "user|insurer" -> active case
    std::vector<std::string> summary;

    Runner(const fs::path& out_dir, uint64_t seed, uint64_t wait_period_ms)
        : net(Network::spawn(make_config(seed, wait_period_ms))), store(out_dir / "store")
    {
    }

    static NetworkConfig make_config(uint64_t seed, uint64_t wait_period_ms)
    {
        NetworkConfig cfg;
        cfg.miners = {"miner-0"};
        cfg.seed = seed;
        cfg.wait_period_ms = wait_period_ms;
        return cfg;
    }

    void note(std::string line) { summary.push_back(std::move(line)); }

    static std::string pair_key(const std::string& user, const std::string& insurer)
    {
        return user + "|" + insurer;
    }

    Party& party_with_role(const std::string& name, Role role)
    {
        Party& p = net.require_party(name);
        if (p.role != role)
            throw Error(Err::ConfigError,
                        name + " is a " + role_name(p.role) + ", expected " + role_name(role));
        return p;
    }

    InsurerDb& db_for(const std::string& insurer) { return dbs[insurer]; }

    ClaimCase& case_for(const std::string& user, const std::string& insurer)
    {
        auto it = cases.find(pair_key(user, insurer));
        if (it == cases.end())
            throw Error(Err::NotFound, "no open claim between " + user + " and " + insurer);
        return it->second;
    }
};

uint64_t parse_u64(const std::string& s, const char* what)
{
    try
    {
        size_t pos = 0;
        uint64_t v = std::stoull(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    }
    catch (const std::exception&)
    {
        throw Error(Err::ParseError, std::string("bad ") + what + " value: " + s);
    }
}

std::string kw_or(const ScenarioStep& step, const std::string& key, const std::string& fallback)
{
    auto it = step.kwargs.find(key);
    return it == step.kwargs.end() ? fallback : it->second;
}

void need_args(const ScenarioStep& step, size_t n, const char* usage)
{
    if (step.args.size() < n)
        throw Error(Err::ParseError, std::string("usage: ") + usage);
}

std::string joined(const std::vector<std::string>& parts, size_t from)
{
    std::string out;
    for (size_t i = from; i < parts.size(); ++i)
    {
        if (i > from)
            out += " ";
        out += parts[i];
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s)
    {
        if (ch == ',')
        {
            if (!cur.empty())
                out.push_back(std::exchange(cur, ""));
        }
        else
            cur.push_back(ch);
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

Role parse_role(const std::string& s)
{
    if (s == "user")
        return Role::User;
    if (s == "insurer")
        return Role::Insurer;
    if (s == "court")
        return Role::Court;
    if (s == "sensor")
        return Role::Sensor;
    throw Error(Err::ParseError, "unknown role " + s + " (user|insurer|court|sensor)");
}

void run_step(Runner& r, const ScenarioStep& step)
{
    const std::string& act = step.action;

    if (act == "keygen")
    {
        need_args(step, 2, "keygen <role> <name>");
        Party& p = r.net.add_party(parse_role(step.args[0]), step.args[1]);
        r.note("keygen " + step.args[1] + " (" + role_name(p.role) + ") pk=" +
               p.identity().hex().substr(0, 16) + "...");
    }
    else if (act == "deposit")
    {
        need_args(step, 2, "deposit <account> <amount>");
        r.net.require_party(step.args[0]);
        r.accounts.deposit(step.args[0],
                           static_cast<int64_t>(parse_u64(step.args[1], "amount")));
        r.note("deposit " + step.args[1] + " to " + step.args[0]);
    }
    else if (act == "advertise")
    {
        need_args(step, 2, "advertise <insurer> <keyword>...");
        Party& insurer = r.party_with_role(step.args[0], Role::Insurer);
        std::vector<std::string> keywords(step.args.begin() + 1, step.args.end());
        std::string details =
            "policy details (" + joined(step.args, 1) + ") offered by " + insurer.account_id;
        StoreReceipt rec =
            r.store.put_record(insurer.identity(), as_bytes(details), r.net.clock());
        PolicyAdvertTx ad =
            build_policy_advert(insurer.identity_keys(), keywords, rec.payload_hash);
        r.net.submit(ad);
        r.net.settle();
        r.note("advertise " + insurer.account_id + " [" + joined(keywords, 0) + "] details@" +
               rec.locator);
    }
    else if (act == "negotiate")
    {
        need_args(step, 3, "negotiate <user> <insurer> <condition> [accept_round=k] [cap=n]");
        Party& user = r.party_with_role(step.args[0], Role::User);
        Party& insurer = r.party_with_role(step.args[1], Role::Insurer);
        size_t accept_round = parse_u64(kw_or(step, "accept_round", "1"), "accept_round");
        size_t cap = parse_u64(kw_or(step, "cap", "10"), "cap");
        Bytes opening = to_bytes(joined(step.args, 2));

        auto policy = [accept_round](size_t round, const Bytes& last) -> std::optional<Bytes> {
            if (round >= accept_round)
                return std::nullopt;
            Bytes counter = last;
            std::string suffix = " | counter " + std::to_string(round);
            counter.insert(counter.end(), suffix.begin(), suffix.end());
            return counter;
        };
        NegotiationOutcome outcome =
            negotiate(r.net, user, insurer, std::move(opening), policy, cap);
        if (outcome.agreed)
        {
            r.agreed[Runner::pair_key(user.account_id, insurer.account_id)] = outcome.condition;
            r.note("negotiate " + user.account_id + "<->" + insurer.account_id + " agreed in " +
                   std::to_string(outcome.rounds()) + " round(s)");
        }
        else
        {
            r.note("negotiate " + user.account_id + "<->" + insurer.account_id +
                   " abandoned after " + std::to_string(outcome.rounds()) + " round(s)");
        }
    }
    else if (act == "contract")
    {
        need_args(step, 2, "contract <user> <insurer> [policy=name] [sensors=a,b]");
        Party& user = r.party_with_role(step.args[0], Role::User);
        Party& insurer = r.party_with_role(step.args[1], Role::Insurer);
        std::string key = Runner::pair_key(user.account_id, insurer.account_id);
        auto terms = r.agreed.find(key);
        if (terms == r.agreed.end())
            throw Error(Err::InvariantViolation,
                        "no agreed terms between " + user.account_id + " and " +
                            insurer.account_id + "; negotiate first");
        std::vector<Party*> sensors;
        for (const std::string& name : split_csv(kw_or(step, "sensors", "")))
            sensors.push_back(&r.party_with_role(name, Role::Sensor));
        Establishment est =
            establish_contract(r.net, user, insurer, r.db_for(insurer.account_id),
                               terms->second, sensors, kw_or(step, "policy", "general"));
        r.contracts[key] = est.sct.t_id;
        r.note("contract " + key + " sct=" + est.sct.t_id.hex().substr(0, 16) + "... sensors=" +
               std::to_string(sensors.size()));
    }
    else if (act == "pay")
    {
        need_args(step, 3, "pay <user> <insurer> <amount>");
        Party& user = r.party_with_role(step.args[0], Role::User);
        Party& insurer = r.party_with_role(step.args[1], Role::Insurer);
        int64_t amount = static_cast<int64_t>(parse_u64(step.args[2], "amount"));
        auto sct = r.contracts.find(Runner::pair_key(user.account_id, insurer.account_id));
        if (sct == r.contracts.end())
            throw Error(Err::NotFound, "no contract to pay premiums on");
        r.accounts.transfer(user.account_id, insurer.account_id, amount);
        r.db_for(insurer.account_id).record_payment(sct->second, r.net.clock(), amount);
        r.note("pay " + step.args[2] + " " + user.account_id + " -> " + insurer.account_id);
    }
    else if (act == "sensor-put")
    {
        need_args(step, 1, "sensor-put <sensor> [size=512] [count=1] [text=...]");
        Party& sensor = r.party_with_role(step.args[0], Role::Sensor);
        PartyKeys keys = sensor.identity_keys();
        size_t count = parse_u64(kw_or(step, "count", "1"), "count");
        std::string text = kw_or(step, "text", "");
        size_t size = parse_u64(kw_or(step, "size", "512"), "size");
        for (size_t i = 0; i < count; ++i)
        {
            auto tip = r.net.sensor_tip(keys.pk);
            if (!tip)
                throw Error(Err::AuthorizationError,
                            sensor.account_id + " has no genesis; put it under a contract first");
            Bytes payload = text.empty() ? r.net.random_bytes(size) : to_bytes(text);
            StoreReceipt rec = r.store.put_record(keys.pk, payload, r.net.clock());
            anchor_record(keys, r.net.view(), rec, *tip,
                          [&](Transaction tx) { r.net.submit(std::move(tx)); });
        }
        r.net.settle();
        r.note("sensor-put " + sensor.account_id + " x" + std::to_string(count));
    }
    else if (act == "claim")
    {
        need_args(step, 3, "claim <user> <insurer> <details> [data=<bytes>]");
        Party& user = r.party_with_role(step.args[0], Role::User);
        Party& insurer = r.party_with_role(step.args[1], Role::Insurer);
        std::optional<Bytes> shared;
        if (step.kwargs.count("data"))
            shared = r.net.random_bytes(parse_u64(step.kwargs.at("data"), "data"));
        std::optional<ByteView> shared_view;
        if (shared)
            shared_view = ByteView(*shared);
        ClaimOutcome outcome =
            lodge_and_verify_claim(r.net, user, insurer, r.db_for(insurer.account_id),
                                   as_bytes(joined(step.args, 2)), shared_view);
        if (!outcome.claim)
            throw Error(Err::AuthorizationError,
                        std::string("claim rejected: ") + claim_reject_name(outcome.rejected));
        std::string key = Runner::pair_key(user.account_id, insurer.account_id);
        r.cases.insert_or_assign(key, *outcome.claim);
        r.note("claim " + key + " tid=" + outcome.claim->claim_tid.hex().substr(0, 16) +
               "... state=" + case_state_name(outcome.claim->state));
    }
    else if (act == "grant")
    {
        need_args(step, 2, "grant <insurer> <user> [sensors=a,b] [from=ms] [to=ms] [refuse]");
        Party& insurer = r.party_with_role(step.args[0], Role::Insurer);
        Party& user = r.party_with_role(step.args[1], Role::User);
        ClaimCase& c = r.case_for(user.account_id, insurer.account_id);

        AccessScope scope;
        std::vector<std::string> names = split_csv(kw_or(step, "sensors", ""));
        if (names.empty())
        {
            const CustomerRecord* rec = r.db_for(insurer.account_id).find_by_sct(c.sct_tid);
            if (rec)
                scope.sensors = rec->sensor_pks;
        }
        else
        {
            for (const std::string& name : names)
                scope.sensors.push_back(r.party_with_role(name, Role::Sensor).identity());
        }
        scope.from_ms = parse_u64(kw_or(step, "from", "0"), "from");
        scope.to_ms = step.kwargs.count("to") ? parse_u64(step.kwargs.at("to"), "to")
                                              : UINT64_MAX;

        bool refuse = step.kwargs.count("refuse");
        auto saved = user.approve;
        if (refuse)
            user.approve = [](const Transaction& tx) {
                return !std::holds_alternative<DataAccessTx>(tx);
            };
        request_and_check_data(r.net, insurer, user, c, scope, r.store);
        user.approve = saved;
        r.note("grant " + insurer.account_id + "<-" + user.account_id + " state=" +
               case_state_name(c.state) + (c.flagged ? " FLAGGED" : ""));
    }
    else if (act == "evidence")
    {
        need_args(step, 4, "evidence <provider> <user> <insurer> <text>");
        Party& provider = r.net.require_party(step.args[0]);
        Party& user = r.party_with_role(step.args[1], Role::User);
        Party& insurer = r.party_with_role(step.args[2], Role::Insurer);
        ClaimCase& c = r.case_for(user.account_id, insurer.account_id);
        DataAnchorTx anchor = record_third_party_evidence(r.net, insurer, c, provider,
                                                          as_bytes(joined(step.args, 3)),
                                                          r.store);
        r.note("evidence " + provider.account_id + " anchored " +
               anchor.t_id.hex().substr(0, 16) + "...");
    }
    else if (act == "decide")
    {
        need_args(step, 3, "decide <insurer> <user> approve <amount>|reject [withhold]");
        Party& insurer = r.party_with_role(step.args[0], Role::Insurer);
        Party& user = r.party_with_role(step.args[1], Role::User);
        ClaimCase& c = r.case_for(user.account_id, insurer.account_id);
        Verdict verdict;
        uint64_t amount = 0;
        if (step.args[2] == "approve")
        {
            need_args(step, 4, "decide <insurer> <user> approve <amount>");
            verdict = Verdict::Approved;
            amount = parse_u64(step.args[3], "amount");
        }
        else if (step.args[2] == "reject")
            verdict = Verdict::Rejected;
        else
            throw Error(Err::ParseError, "verdict must be approve or reject");

        bool withhold = step.kwargs.count("withhold");
        auto saved = user.approve;
        if (withhold)
            user.approve = [](const Transaction& tx) {
                return !std::holds_alternative<DecisionTx>(tx);
            };
        decide_and_settle(r.net, insurer, user, c, verdict, amount, r.accounts);
        user.approve = saved;
        r.note("decide " + insurer.account_id + " " + step.args[2] + " -> state=" +
               case_state_name(c.state));
    }
    else if (act == "dispute")
    {
        need_args(step, 4, "dispute <court> <user> <insurer> approve <amount>|reject");
        Party& court = r.party_with_role(step.args[0], Role::Court);
        Party& user = r.party_with_role(step.args[1], Role::User);
        Party& insurer = r.party_with_role(step.args[2], Role::Insurer);
        ClaimCase& c = r.case_for(user.account_id, insurer.account_id);
        Verdict verdict;
        uint64_t amount = 0;
        if (step.args[3] == "approve")
        {
            need_args(step, 5, "dispute <court> <user> <insurer> approve <amount>");
            verdict = Verdict::Approved;
            amount = parse_u64(step.args[4], "amount");
        }
        else if (step.args[3] == "reject")
            verdict = Verdict::Rejected;
        else
            throw Error(Err::ParseError, "verdict must be approve or reject");
        adjudicate_dispute(r.net, court, user, insurer, c, verdict, amount, r.accounts);
        r.note("dispute ruled by " + court.account_id + " -> state=" + case_state_name(c.state));
    }
    else if (act == "pih")
    {
        need_args(step, 3, "pih <old-insurer> <user> <new-insurer>");
        Party& old_insurer = r.party_with_role(step.args[0], Role::Insurer);
        Party& user = r.party_with_role(step.args[1], Role::User);
        r.party_with_role(step.args[2], Role::Insurer); // must be declared
        auto sct = r.contracts.find(Runner::pair_key(user.account_id, old_insurer.account_id));
        if (sct == r.contracts.end())
            throw Error(Err::NotFound, "no contract to issue history for");
        HistoryToken token = issue_history_token(r.net, old_insurer,
                                                 r.db_for(old_insurer.account_id), sct->second);
        HistoryReport report = verify_history_token(token, r.net.ledger());
        r.note("pih " + step.args[2] + " verified history of " + user.account_id + ": policy=" +
               report.policy_type + " txs=" + std::to_string(report.tx_count) + " claims=" +
               std::to_string(report.claim_count));
    }
    else
    {
        throw Error(Err::ParseError, "unknown action '" + act + "'");
    }
}

} // namespace

ScenarioResult run_scenario(const ScenarioScript& script, const fs::path& out_dir, uint64_t seed,
                            uint64_t wait_period_ms)
{
    fs::create_directories(out_dir);
    Runner r(out_dir, seed, wait_period_ms);

    size_t step_no = 0;
    for (const ScenarioStep& step : script.steps)
    {
        ++step_no;
        try
        {
            run_step(r, step);
        }
        catch (const ScenarioError&)
        {
            throw;
        }
        catch (const Error& e)
        {
            throw ScenarioError(step.line_no, step_no, e.what());
        }
    }

    r.net.run_for(2 * r.net.wait_period());
    if (r.net.mempool_size() != 0)
        throw ScenarioError(0, step_no, "mempool failed to drain at end of run");

    VerificationReport report = r.net.ledger().verify();
    if (!report.ok())
        throw ScenarioError(0, step_no,
                            "ledger verification failed at block " +
                                std::to_string(report.first_failure->height) + ": " +
                                report.first_failure->what);

    ScenarioResult result;
    result.blocks = r.net.ledger().blocks().size();
    for (const Block& b : r.net.ledger().blocks())
        for (const Transaction& tx : b.txs)
            ++result.kind_census[tx_kind_name(kind_of(tx))];

    result.ledger_path = out_dir / "ledger.jsonl";
    result.trace_path = out_dir / "trace.jsonl";
    r.net.ledger().save_jsonl(result.ledger_path);
    r.net.trace().save_jsonl(result.trace_path);
    r.accounts.save_json(out_dir / "accounts.json");
    for (const auto& [name, db] : r.dbs)
        db.save_json(out_dir / ("insurer_" + name + ".json"));

    std::ostringstream summary;
    summary << "scenario: " << script.steps.size() << " step(s), " << result.blocks
            << " block(s), " << r.net.ledger().tx_count() << " transaction(s)\n";
    for (const std::string& line : r.summary)
        summary << "  " << line << "\n";
    summary << "mined transactions by kind:\n";
    for (const auto& [kind, count] : result.kind_census)
        summary << "  " << kind << ": " << count << "\n";
    summary << "accounts:\n";
    for (const auto& [id, bal] : r.accounts.balances())
        summary << "  " << id << ": " << bal << "\n";
    result.summary = summary.str();

    std::ofstream sum(out_dir / "summary.txt", std::ios::binary | std::ios::trunc);
    sum << result.summary;
    return result;
}

} // namespace claimchain
