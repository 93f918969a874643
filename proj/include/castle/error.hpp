#pragma once

#include <stdexcept>
#include <string>

namespace castle {

// Error taxonomy shared by the library and the CLI exit-code contract:
// Config/input -> 2, Validation -> 3, Db/Gateway runtime -> 4.
enum class ErrorKind {
    Config,
    Parse,
    Validation,
    Gateway,
    Db,
    Data,
    Internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    static Error config(std::string msg) { return Error(ErrorKind::Config, std::move(msg)); }
    static Error parse(std::string msg) { return Error(ErrorKind::Parse, std::move(msg)); }
    static Error validation(std::string msg) { return Error(ErrorKind::Validation, std::move(msg)); }
    static Error gateway(std::string msg) { return Error(ErrorKind::Gateway, std::move(msg)); }
    static Error db(std::string msg) { return Error(ErrorKind::Db, std::move(msg)); }
    static Error data(std::string msg) { return Error(ErrorKind::Data, std::move(msg)); }
    static Error internal(std::string msg) { return Error(ErrorKind::Internal, std::move(msg)); }

private:
    ErrorKind kind_;
};

} // namespace castle
