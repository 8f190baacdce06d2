#pragma once

#include "percuss/types.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace percuss {

/// Largest payload that fits one unfragmented datagram on a 1500-byte MTU.
inline constexpr std::size_t kMaxDatagram = 1472;

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// Parses "host:port"; throws Errc::config_invalid.
Endpoint parse_endpoint(const std::string& text);

/// UDP socket bound to one destination. Fire-and-forget.
class UdpSender {
 public:
  explicit UdpSender(const Endpoint& dest);
  ~UdpSender();
  UdpSender(const UdpSender&) = delete;
  UdpSender& operator=(const UdpSender&) = delete;
  UdpSender(UdpSender&& other) noexcept;
  UdpSender& operator=(UdpSender&&) = delete;

  /// Throws Errc::oversized_payload or Errc::socket_failure.
  void send(std::span<const std::uint8_t> payload);

  const Endpoint& destination() const { return dest_; }

 private:
  Endpoint dest_;
  int fd_ = -1;
  std::vector<std::uint8_t> addr_;  // sockaddr storage
};

/// One-shot send of a single datagram.
void send_udp(std::span<const std::uint8_t> payload, const Endpoint& dest);

/// Bounded FIFO that never blocks the producer: when full, the oldest entry
/// is discarded and counted.
template <typename T>
class DropOldestQueue {
 public:
  explicit DropOldestQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  /// Returns true when an older entry had to be dropped.
  bool push(T value) {
    bool dropped = false;
    {
      std::lock_guard lock(mutex_);
      if (closed_) return false;
      if (items_.size() >= capacity_) {
        items_.pop_front();
        ++dropped_;
        dropped = true;
      }
      items_.push_back(std::move(value));
    }
    ready_.notify_one();
    return dropped;
  }

  /// Blocks until an item is available or the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [this] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mutex_);
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }
  std::size_t dropped() const {
    std::lock_guard lock(mutex_);
    return dropped_;
  }
  std::size_t capacity() const { return capacity_; }

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> items_;
  std::size_t capacity_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

/// Sends encoded OSC packets to every destination from a worker thread fed by
/// a DropOldestQueue. Send failures are counted, never propagated.
class OscDispatcher {
 public:
  OscDispatcher(const std::vector<Endpoint>& destinations, std::size_t queue_capacity = 256);
  ~OscDispatcher();
  OscDispatcher(const OscDispatcher&) = delete;
  OscDispatcher& operator=(const OscDispatcher&) = delete;

  void post(std::vector<std::uint8_t> packet);

  /// Stops accepting packets and waits for the queue to drain.
  void close();

  std::size_t dropped() const { return queue_.dropped(); }
  std::size_t sent() const { return sent_.load(); }
  std::size_t failures() const { return failures_.load(); }
  std::string last_error() const;

 private:
  void run();

  std::vector<UdpSender> senders_;
  DropOldestQueue<std::vector<std::uint8_t>> queue_;
  std::atomic<std::size_t> sent_{0};
  std::atomic<std::size_t> failures_{0};
  mutable std::mutex error_mutex_;
  std::string last_error_;
  std::thread worker_;
};

}  // namespace percuss
