#pragma once

#include <stdexcept>
#include <string>

namespace oucd {

// Invalid network / operator configuration (channel mismatch, bad sizes).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition (shape mismatch, misuse of the tape).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Bad user input: flags, override keys, patch sizes, manifests.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace oucd
