// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include "claimchain/crypto.hpp"
#include "claimchain/tx.hpp"

#include <functional>

namespace claimchain {

enum class Role { User, Insurer, Court, Sensor };

const char* role_name(Role r);

// A network participant. Users rotate keys per counterparty so they stay
// recognizable to each recipient but unlinkable across recipients;
// insurers, courts and sensors keep one public-facing identity key.
struct Party {
    Role role;
    std::string account_id;
    KeyRing ring;

    // Countersign hook consulted before this party signs a draft it did
    // not author; scripted refusals drive the dispute paths.
    std::function<bool(const Transaction&)> approve;

    Party(Role r, std::string id, KeyRing kr)
        : role(r), account_id(std::move(id)), ring(std::move(kr))
    {
    }

    const PublicKey& identity() { return ring.fresh_pk("self"); }
    PartyKeys identity_keys() { return ring.keys_for("self"); }

    const PublicKey& pk_for(const PublicKey& counterparty)
    {
        return role == Role::User ? ring.fresh_pk(counterparty.hex()) : identity();
    }

    PartyKeys keys_for(const PublicKey& counterparty)
    {
        return role == Role::User ? ring.keys_for(counterparty.hex()) : identity_keys();
    }

    bool approves(const Transaction& draft) const { return !approve || approve(draft); }
};

} // namespace claimchain
