#include "percuss/osc.hpp"

#include <bit>
#include <cstring>

namespace percuss::osc {

char type_tag(const Arg& arg) {
  switch (arg.index()) {
    case 0: return 'i';
    case 1: return 'f';
    default: return 's';
  }
}

namespace {

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
  out.insert(out.end(), s.begin(), s.end());
  out.resize(out.size() + (padded_size(s.size()) - s.size()), 0);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

bool has_nul(const std::string& s) { return s.find('\0') != std::string::npos; }

}  // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
  if (msg.address.empty() || msg.address.front() != '/')
    throw Error(Errc::invalid_address, "OSC address must start with '/': \"" + msg.address + "\"");
  if (has_nul(msg.address)) throw Error(Errc::embedded_nul, "NUL byte in OSC address");

  std::string tags = ",";
  for (const Arg& a : msg.args) {
    tags.push_back(type_tag(a));
    if (const auto* s = std::get_if<std::string>(&a); s && has_nul(*s))
      throw Error(Errc::embedded_nul, "NUL byte in OSC string argument");
  }

  std::vector<std::uint8_t> out;
  out.reserve(padded_size(msg.address.size()) + padded_size(tags.size()) + 4 * msg.args.size());
  put_string(out, msg.address);
  put_string(out, tags);
  for (const Arg& a : msg.args) {
    if (const auto* i = std::get_if<std::int32_t>(&a)) put_be32(out, static_cast<std::uint32_t>(*i));
    else if (const auto* f = std::get_if<float>(&a)) put_be32(out, std::bit_cast<std::uint32_t>(*f));
    else put_string(out, std::get<std::string>(a));
  }
  return out;
}

}  // namespace percuss::osc
