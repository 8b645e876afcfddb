// Copyright 2026 the claimchain developers. Licensed under the Apache
// License, Version 2.0. See http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace claimchain {

enum class Err {
    None = 0,
    TidMismatch,
    BadSignature,
    MultisigIncomplete,
    ChainLinkError,
    InvariantViolation,
    ScopeError,
    AuthorizationError,
    NotFound,
    ConsensusViolation,
    DuplicateTx,
    EncodingError,
    DecodeError,
    ConfigError,
    AccessDenied,
    VerificationFailed,
    InsufficientFunds,
    EstablishmentAborted,
    EntropyFailure,
    IoError,
    ParseError,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
  public:
    Error(Err code, const std::string& what)
        : std::runtime_error(std::string(err_name(code)) + ": " + what), code_(code)
    {
    }

    Err code() const { return code_; }

  private:
    Err code_;
};

} // namespace claimchain
