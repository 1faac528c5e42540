#pragma once

#include <stdexcept>
#include <string>

namespace depgraph {

/// Lookup of an issue key (or other entity) that is not present.
class NotFoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Input that violates a documented invariant or precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace depgraph
