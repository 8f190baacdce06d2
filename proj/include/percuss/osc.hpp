#pragma once

#include "percuss/types.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace percuss::osc {

using Arg = std::variant<std::int32_t, float, std::string>;

struct Message {
  std::string address;
  std::vector<Arg> args;

  bool operator==(const Message&) const = default;
};

/// Type tag character for an argument: 'i', 'f' or 's'.
char type_tag(const Arg& arg);

/// OSC 1.0 binary message: padded address, padded ",<tags>", big-endian
/// int32/float32, padded strings. No bundles.
std::vector<std::uint8_t> encode(const Message& msg);

/// Bytes taken by a NUL-terminated, 4-byte padded OSC string.
constexpr std::size_t padded_size(std::size_t len) { return (len + 4) & ~std::size_t{3}; }

}  // namespace percuss::osc
