#ifndef HETDQCD_ERRORS_HPP
#define HETDQCD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hetdqcd {

// Invalid arguments to an operation (bad parameter, out-of-range index).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A documented contract was broken at runtime (nonmonotone membership
// predicate, D-bar condition violated, ...). Maps to CLI exit code 3.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Problem size exceeds a hard capacity limit (e.g. 2^N enumeration).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetdqcd

#endif
