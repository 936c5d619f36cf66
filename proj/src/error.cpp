// SPDX-License-Identifier: Apache-2.0
#include "retro/error.hpp"

namespace retro {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIncompleteLog: return "incomplete-log";
    case ErrorKind::kUndefinedMetric: return "undefined-metric";
    case ErrorKind::kEmptySplit: return "empty-split";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 2;
    case ErrorKind::kIo: return 3;
    case ErrorKind::kParse: return 4;
    case ErrorKind::kValidation: return 5;
    case ErrorKind::kIncompleteLog: return 6;
    case ErrorKind::kUndefinedMetric: return 7;
    case ErrorKind::kEmptySplit: return 8;
  }
  return 1;
}

}  // namespace retro
