#pragma once

#include <stdexcept>
#include <string>

namespace minikind {

// Half-open source range, 1-based lines and columns.
struct SourceSpan {
  std::string file;
  int line = 0, col = 0;
  int end_line = 0, end_col = 0;

  SourceSpan() = default;
  SourceSpan(std::string f, int l, int c, int el, int ec)
      : file(std::move(f)), line(l), col(c), end_line(el), end_col(ec) {}

  bool valid() const { return line > 0; }
  std::string str() const;

  // Smallest span covering both.
  static SourceSpan join(const SourceSpan& a, const SourceSpan& b);
};

// Base for all checked failures. `kind` is a stable machine-readable tag
// ("parse-error", "type-error", ...) used by tests and the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, SourceSpan span, const std::string& msg)
      : std::runtime_error(span.valid() ? span.str() + ": " + msg : msg),
        kind_(std::move(kind)),
        span_(std::move(span)),
        msg_(msg) {}

  const std::string& kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  const std::string& message() const { return msg_; }

 private:
  std::string kind_;
  SourceSpan span_;
  std::string msg_;
};

struct LexError : Error {
  LexError(SourceSpan s, const std::string& m) : Error("lex-error", std::move(s), m) {}
};
struct ParseError : Error {
  ParseError(SourceSpan s, const std::string& m) : Error("parse-error", std::move(s), m) {}
};
struct TypeError : Error {
  TypeError(SourceSpan s, const std::string& m) : Error("type-error", std::move(s), m) {}
};
struct LinearityError : Error {
  LinearityError(SourceSpan s, const std::string& m) : Error("linearity-error", std::move(s), m) {}
};
struct CycleError : Error {
  CycleError(SourceSpan s, const std::string& m) : Error("cycle-error", std::move(s), m) {}
};
struct RecursionError : Error {
  RecursionError(SourceSpan s, const std::string& m) : Error("recursion-error", std::move(s), m) {}
};

struct SortError : Error {
  explicit SortError(const std::string& m) : Error("sort-error", {}, m) {}
};
struct NonlinearError : Error {
  explicit NonlinearError(const std::string& m) : Error("nonlinear-error", {}, m) {}
};
struct MissingVar : Error {
  explicit MissingVar(const std::string& name)
      : Error("missing-var", {}, "no value for variable " + name) {}
};

struct SolverSpawnError : Error {
  explicit SolverSpawnError(const std::string& m) : Error("solver-spawn-error", {}, m) {}
};
struct HandshakeError : Error {
  explicit HandshakeError(const std::string& m) : Error("handshake-error", {}, m) {}
};
struct SessionDead : Error {
  explicit SessionDead(const std::string& m) : Error("session-dead", {}, m) {}
};
struct LabelClash : Error {
  explicit LabelClash(const std::string& m) : Error("label-clash", {}, m) {}
};
struct ProtocolError : Error {
  explicit ProtocolError(const std::string& m) : Error("protocol-error", {}, m) {}
};
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& m) : Error("capability-error", {}, m) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config-error", {}, m) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format-error", {}, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io-error", {}, m) {}
};
struct ExplosionError : Error {
  explicit ExplosionError(const std::string& m) : Error("explosion-error", {}, m) {}
};

}  // namespace minikind
