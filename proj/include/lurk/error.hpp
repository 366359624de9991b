#pragma once

#include <stdexcept>
#include <string>

namespace lurk {

// Fatal condition for a pipeline stage. Recoverable per-record problems are
// never thrown; they are tallied in the owning stage's diagnostics instead.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace lurk
