#pragma once

#include <string>
#include <string_view>

#include "castle/error.hpp"

namespace castle {

enum class Dialect {
    Postgresql,
    Mysql,
    Sqlserver,
};

// Surface form of the scalar-limit clause. Each dialect owns exactly one.
enum class LimitForm {
    Limit, // LIMIT n
    Top,   // TOP n
};

inline LimitForm limit_form(Dialect d) {
    return d == Dialect::Sqlserver ? LimitForm::Top : LimitForm::Limit;
}

inline std::string_view dialect_name(Dialect d) {
    switch (d) {
    case Dialect::Postgresql: return "postgresql";
    case Dialect::Mysql: return "mysql";
    case Dialect::Sqlserver: return "sqlserver";
    }
    return "postgresql";
}

inline Dialect parse_dialect(std::string_view name) {
    if (name == "postgresql" || name == "postgres")
        return Dialect::Postgresql;
    if (name == "mysql")
        return Dialect::Mysql;
    if (name == "sqlserver" || name == "mssql")
        return Dialect::Sqlserver;
    throw Error::config("unknown dialect: " + std::string(name));
}

} // namespace castle
