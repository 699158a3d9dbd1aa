#pragma once

#include <stdexcept>
#include <string>

namespace gsr {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DuplicateNode : Error {
    explicit DuplicateNode(const std::string& id) : Error("duplicate node id: " + id), id(id) {}
    std::string id;
};

struct DegenerateGeometry : Error {
    explicit DegenerateGeometry(const std::string& id)
        : Error("degenerate (zero-volume) aabb on node: " + id), id(id) {}
    std::string id;
};

struct UnknownPredicate : Error {
    explicit UnknownPredicate(const std::string& token)
        : Error("unknown predicate token: '" + token + "'"), token(token) {}
    std::string token;
};

struct UnknownNode : Error {
    explicit UnknownNode(const std::string& id) : Error("unknown node id: " + id), id(id) {}
    std::string id;
};

struct ParseError : Error {
    ParseError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line(line),
          column(column) {}
    int line = 0;
    int column = 0;
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error("schema violation: " + msg) {}
};

struct DeltaMismatch : Error {
    explicit DeltaMismatch(const std::string& msg) : Error("delta mismatch: " + msg) {}
};

struct IllegalTransition : Error {
    explicit IllegalTransition(const std::string& reason)
        : Error("illegal transition: " + reason), reason(reason) {}
    std::string reason;
};

struct NoInstruction : Error {
    NoInstruction() : Error("trajectory has no instruction text") {}
};

struct TransportError : Error {
    enum class Kind { Timeout, ConnectionRefused, MalformedReply };
    TransportError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}
    Kind kind;
};

}  // namespace gsr
