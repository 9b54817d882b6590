#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ehrenfest {

// Target set is outside the symmetric family; the message names two states
// whose sorted overlap profiles differ.
class NotSymmetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// State space too large for the requested oracle solve.
class CapExceededError : public std::runtime_error {
 public:
  CapExceededError(std::uint64_t states, std::uint64_t cap, const std::string& what)
      : std::runtime_error(what), states_(states), cap_(cap) {}
  std::uint64_t states() const { return states_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t states_;
  std::uint64_t cap_;
};

}  // namespace ehrenfest
