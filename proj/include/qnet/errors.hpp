#pragma once

#include <stdexcept>
#include <string>

namespace qnet {

// Error taxonomy. Codes are stable across the C API boundary:
// 1 = parse/usage, 2 = failed semantic/resource checks, 3 = engine errors.
enum class ErrorCode {
    Parse = 1,
    Semantic = 2,
    Engine = 3,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string what) : std::runtime_error(std::move(what)), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

struct ParseError : Error {
    explicit ParseError(std::string what) : Error(ErrorCode::Parse, std::move(what)) {}
};

struct SemanticError : Error {
    explicit SemanticError(std::string what) : Error(ErrorCode::Semantic, std::move(what)) {}
};

struct EngineError : Error {
    explicit EngineError(std::string what) : Error(ErrorCode::Engine, std::move(what)) {}
};

}  // namespace qnet
