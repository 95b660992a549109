#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disc {

// Parse failure in any of the text formats; positions are 1-based.
struct parse_error : std::runtime_error {
  std::size_t line;
  std::size_t column;
  parse_error(const std::string& msg, std::size_t line_, std::size_t column_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                           std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
};

// Vertex-name lookup failures and name collisions.
struct name_error : std::runtime_error {
  std::string name;
  name_error(const std::string& msg, std::string name_)
      : std::runtime_error(msg + ": " + name_), name(std::move(name_)) {}
};

// A term atom that does not type against the running graph.
struct type_error : std::runtime_error {
  std::size_t index;
  std::string reason;
  type_error(std::size_t index_, const std::string& reason_)
      : std::runtime_error("ill-typed at atom " + std::to_string(index_) + ": " + reason_),
        index(index_),
        reason(reason_) {}
};

// Composition of reactions whose middle graphs differ.
struct compose_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal rewrite-engine failure; carries the derivation up to the failure.
struct engine_error : std::runtime_error {
  std::string trace_dump;
  engine_error(const std::string& msg, std::string trace_dump_)
      : std::runtime_error(msg), trace_dump(std::move(trace_dump_)) {}
};

}  // namespace disc
