#include "percuss/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace percuss {

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    throw Error(Errc::config_invalid, "endpoint \"" + text + "\" is not host:port");
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc{} || ptr != last || port == 0 || port > 65535)
    throw Error(Errc::config_invalid, "endpoint \"" + text + "\" has an invalid port");
  std::string host = text.substr(0, colon);
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {host, static_cast<std::uint16_t>(port)};
}

UdpSender::UdpSender(const Endpoint& dest) : dest_(dest) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(dest.port);
  if (const int rc = getaddrinfo(dest.host.c_str(), port.c_str(), &hints, &res); rc != 0 || !res)
    throw Error(Errc::socket_failure, "cannot resolve " + dest.host + ": " + gai_strerror(rc));
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ < 0) {
    const int err = errno;
    freeaddrinfo(res);
    throw Error(Errc::socket_failure, std::string("socket: ") + std::strerror(err));
  }
  const auto* raw = reinterpret_cast<const std::uint8_t*>(res->ai_addr);
  addr_.assign(raw, raw + res->ai_addrlen);
  freeaddrinfo(res);
}

UdpSender::UdpSender(UdpSender&& other) noexcept
    : dest_(std::move(other.dest_)), fd_(other.fd_), addr_(std::move(other.addr_)) {
  other.fd_ = -1;
}

UdpSender::~UdpSender() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSender::send(std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxDatagram)
    throw Error(Errc::oversized_payload,
                std::to_string(payload.size()) + " bytes exceeds " + std::to_string(kMaxDatagram));
  const ssize_t n = ::sendto(fd_, payload.data(), payload.size(), 0, reinterpret_cast<const sockaddr*>(addr_.data()),
                             static_cast<socklen_t>(addr_.size()));
  if (n < 0)
    throw Error(Errc::socket_failure, "sendto " + dest_.host + ":" + std::to_string(dest_.port) + ": " +
                                          std::strerror(errno));
}

void send_udp(std::span<const std::uint8_t> payload, const Endpoint& dest) {
  if (payload.size() > kMaxDatagram)
    throw Error(Errc::oversized_payload,
                std::to_string(payload.size()) + " bytes exceeds " + std::to_string(kMaxDatagram));
  UdpSender(dest).send(payload);
}

OscDispatcher::OscDispatcher(const std::vector<Endpoint>& destinations, std::size_t queue_capacity)
    : queue_(queue_capacity) {
  senders_.reserve(destinations.size());
  for (const Endpoint& d : destinations) senders_.emplace_back(d);
  worker_ = std::thread([this] { run(); });
}

OscDispatcher::~OscDispatcher() { close(); }

void OscDispatcher::post(std::vector<std::uint8_t> packet) { queue_.push(std::move(packet)); }

void OscDispatcher::close() {
  queue_.close();
  if (worker_.joinable()) worker_.join();
}

std::string OscDispatcher::last_error() const {
  std::lock_guard lock(error_mutex_);
  return last_error_;
}

void OscDispatcher::run() {
  while (auto packet = queue_.pop()) {
    for (UdpSender& s : senders_) {
      try {
        s.send(*packet);
        ++sent_;
      } catch (const Error& e) {
        ++failures_;
        std::lock_guard lock(error_mutex_);
        last_error_ = e.what();
      }
    }
  }
}

}  // namespace percuss
