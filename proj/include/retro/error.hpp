// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace retro {

// Each kind maps to a distinct process exit code in the CLI.
enum class ErrorKind {
  kConfig,           // bad flag value, unknown transform id, wrong map for the command
  kIo,               // file missing / unreadable / unwritable
  kParse,            // malformed JSON, JSONL, CSV or RTEN
  kValidation,       // well-formed input that violates a domain invariant
  kIncompleteLog,    // prediction log lacks an entry required by the computation
  kUndefinedMetric,  // ratio with an empty denominator
  kEmptySplit,       // zero-shot split requested without equivariant pairs
};

std::string_view to_string(ErrorKind kind);
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace retro
