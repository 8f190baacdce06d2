#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "percuss/jsonl.hpp"
#include "percuss/osc.hpp"
#include "percuss/scene.hpp"
#include "percuss/transport.hpp"
#include "support/osc_decode.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

#include <random>
#include <sstream>

using namespace percuss;
using Bytes = std::vector<std::uint8_t>;

namespace {

Errc error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected percuss::Error");
  return Errc::parse_error;
}

/// Loopback UDP listener on an ephemeral port.
class Listener {
 public:
  Listener() {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    REQUIRE(fd_ >= 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a) == 0);
    socklen_t len = sizeof a;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&a), &len);
    port_ = ntohs(a.sin_port);
  }
  ~Listener() { ::close(fd_); }

  Endpoint endpoint() const { return {"127.0.0.1", port_}; }

  std::optional<Bytes> receive(int timeout_ms = 2000) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, timeout_ms) <= 0) return std::nullopt;
    Bytes buf(65536);
    const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
    if (n < 0) return std::nullopt;
    buf.resize(static_cast<std::size_t>(n));
    return buf;
  }

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

StrikeEvent event(Side side, double intensity, Micros t = 500000, Vec2 pos = Vec2(12.5, 40)) {
  return {side, t, pos, intensity * 36000, intensity};
}

osc::Arg random_arg(std::mt19937& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  switch (kind(rng)) {
    case 0:
      return std::uniform_int_distribution<std::int32_t>(INT32_MIN, INT32_MAX)(rng);
    case 1: {
      float f;
      do {
        const std::uint32_t bits = std::uniform_int_distribution<std::uint32_t>()(rng);
        std::memcpy(&f, &bits, 4);
      } while (std::isnan(f));
      return f;
    }
    default: {
      std::uniform_int_distribution<int> len(0, 11), ch(1, 127);
      std::string s(static_cast<std::size_t>(len(rng)), ' ');
      for (char& c : s) c = static_cast<char>(ch(rng));
      return s;
    }
  }
}

}  // namespace

TEST_CASE("OSC golden bytes") {
  CHECK(osc::encode({"/s", {}}) == Bytes{0x2F, 0x73, 0x00, 0x00, 0x2C, 0x00, 0x00, 0x00});
  CHECK(osc::encode({"/strike", {std::int32_t{1}}}) ==
        Bytes{0x2F, 0x73, 0x74, 0x72, 0x69, 0x6B, 0x65, 0x00, 0x2C, 0x69, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01});
  CHECK(error_code([] { osc::encode({"x", {}}); }) == Errc::invalid_address);
  // float and string layouts, hand-encoded
  CHECK(osc::encode({"/f", {1.0f, std::string("ab")}}) ==
        Bytes{'/', 'f', 0, 0, ',', 'f', 's', 0, 0x3F, 0x80, 0, 0, 'a', 'b', 0, 0});
  CHECK(osc::encode({"/abc", {}}).size() == 12);  // "/abc" needs a full NUL word
}

TEST_CASE("OSC errors") {
  CHECK(error_code([] { osc::encode({"", {}}); }) == Errc::invalid_address);
  CHECK(error_code([] { osc::encode({std::string("/a\0b", 4), {}}); }) == Errc::embedded_nul);
  CHECK(error_code([] { osc::encode({"/a", {std::string("x\0y", 3)}}); }) == Errc::embedded_nul);
}

TEST_CASE("padded sizes and type tags") {
  CHECK(osc::padded_size(0) == 4);
  CHECK(osc::padded_size(3) == 4);
  CHECK(osc::padded_size(4) == 8);
  CHECK(osc::type_tag(std::int32_t{3}) == 'i');
  CHECK(osc::type_tag(2.0f) == 'f');
  CHECK(osc::type_tag(std::string("s")) == 's');
}

TEST_CASE("random messages round-trip through the test decoder (property)") {
  std::mt19937 rng(99);
  for (int i = 0; i < 1000; ++i) {
    osc::Message m;
    m.address = "/";
    for (int k = std::uniform_int_distribution<int>(0, 12)(rng); k > 0; --k)
      m.address += static_cast<char>(std::uniform_int_distribution<int>('a', 'z')(rng));
    for (int k = std::uniform_int_distribution<int>(0, 6)(rng); k > 0; --k) m.args.push_back(random_arg(rng));
    const Bytes b = osc::encode(m);
    CHECK(b.size() % 4 == 0);
    auto back = oracle::decode(b);
    REQUIRE(back);
    CHECK(*back == m);
  }
}

TEST_CASE("map_event") {
  SceneRule hit{Side::Left, 0.5, "/hit", {EventField::side, EventField::intensity}};
  SceneConfig scene{"a", {hit}, true};
  auto msgs = map_event(event(Side::Left, 0.8), scene);
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0] == osc::Message{"/hit", {std::int32_t{0}, 0.8f}});

  scene.rules[0].min_intensity = 0.9;
  CHECK(map_event(event(Side::Left, 0.8), scene).empty());

  SceneConfig three{"b",
                    {{std::nullopt, 0.0, "/one", {EventField::t}},
                     {Side::Right, 0.0, "/two", {}},
                     {std::nullopt, 0.0, "/{side}/three", {EventField::x, EventField::y, osc::Arg{std::int32_t{7}}}}},
                    false};
  auto two = map_event(event(Side::Left, 0.3, 1'250'000), three);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == osc::Message{"/one", {1.25f}});
  CHECK(two[1] == osc::Message{"/L/three", {12.5f, 40.0f, std::int32_t{7}}});
  auto right = map_event(event(Side::Right, 0.3), three);
  REQUIRE(right.size() == 3);
  CHECK(right[0] == osc::Message{"/one", {0.5f}});
  CHECK(right[2].address == "/R/three");

  // stateless and deterministic
  for (int i = 0; i < 10; ++i) CHECK(map_event(event(Side::Left, 0.3, 1'250'000), three) == two);
}

TEST_CASE("default scene") {
  auto msgs = map_event(event(Side::Right, 0.25, 2'000'000), default_scene());
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0] == osc::Message{"/sos/strike", {std::int32_t{1}, 0.25f, 2.0f, 12.5f, 40.0f}});
}

TEST_CASE("scene switching") {
  SceneSet set({{"a", {{std::nullopt, 0, "/a", {}}}, true}, {"b", {{std::nullopt, 0, "/b", {}}}, false}});
  CHECK(set.active().name == "a");
  set.switch_scene("b");
  CHECK(map_event(event(Side::Left, 1), set.active())[0].address == "/b");
  CHECK(error_code([&] { set.switch_scene("c"); }) == Errc::unknown_scene);
  CHECK(set.active().name == "b");
  set.switch_scene("b");
  CHECK(set.active().name == "b");
}

TEST_CASE("scene documents") {
  const std::string doc = R"({
    "initial": "duet",
    "scenes": [
      {"name": "solo", "rules": [{"address": "/solo", "args": ["intensity"]}]},
      {"name": "duet", "spine_output": false, "rules": [
        {"match": {"side": "L", "min_intensity": 0.2}, "address": "/gong", "args": ["side", 3, 0.5, "t", {"string": "hi"}, {"int": 4}]},
        {"match": {"side": "any"}, "address": "/cymbal/{side}", "args": ["x", "y"]}
      ]}
    ]})";
  SceneSet set = parse_scenes(doc);
  CHECK(set.active().name == "duet");
  CHECK_FALSE(set.active().spine_output);
  auto msgs = map_event(event(Side::Left, 0.5, 1'000'000), set.active());
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0] == osc::Message{"/gong", {std::int32_t{0}, std::int32_t{3}, 0.5f, 1.0f, std::string("hi"), std::int32_t{4}}});
  CHECK(msgs[1].address == "/cymbal/L");

  auto bad = [](const std::string& text) {
    try {
      parse_scenes(text);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config_invalid);
      return std::string(e.what());
    }
    FAIL("expected config-invalid");
    return std::string();
  };
  CHECK(bad(R"({"scenes": []})").find("scenes") != std::string::npos);
  CHECK(bad(R"({"scenes": [{"name": "a", "rules": [{"address": "hit"}]}]})").find("address") != std::string::npos);
  CHECK(bad(R"({"scenes": [{"name": "a", "rules": [{"address": "/h", "args": ["speed"]}]}]})").find("speed") !=
        std::string::npos);
  CHECK(bad(R"({"initial": "z", "scenes": [{"name": "a", "rules": []}]})").find("initial") != std::string::npos);
  CHECK(bad("{not json").find("scenes") != std::string::npos);
  CHECK(error_code([] { load_scenes("/nonexistent/scenes.json"); }) == Errc::config_invalid);
}

TEST_CASE("UDP loopback") {
  Listener rx;
  const Bytes payload = osc::encode({"/strike", {std::int32_t{1}, 0.5f}});
  send_udp(payload, rx.endpoint());
  auto got = rx.receive();
  REQUIRE(got);
  CHECK(*got == payload);

  UdpSender tx(rx.endpoint());
  tx.send(payload);
  CHECK(rx.receive() == payload);
}

TEST_CASE("UDP errors") {
  Listener rx;
  const Bytes big(2000, 0);
  CHECK(error_code([&] { send_udp(big, rx.endpoint()); }) == Errc::oversized_payload);
  CHECK_NOTHROW(send_udp(Bytes(kMaxDatagram, 0), rx.endpoint()));
  // broadcast without SO_BROADCAST is refused by the kernel
  CHECK(error_code([] { send_udp(Bytes(8, 0), {"255.255.255.255", 9}); }) == Errc::socket_failure);
  CHECK(error_code([] { parse_endpoint("localhost"); }) == Errc::config_invalid);
  CHECK(error_code([] { parse_endpoint("localhost:99999"); }) == Errc::config_invalid);
  CHECK(parse_endpoint("127.0.0.1:57120").port == 57120);
}

TEST_CASE("dispatcher: failures are counted and delivery continues") {
  Listener rx;
  OscDispatcher d({{"255.255.255.255", 9}, rx.endpoint()}, 16);
  const Bytes payload = osc::encode({"/s", {}});
  d.post(payload);
  d.post(payload);
  d.close();
  CHECK(d.failures() == 2);
  CHECK_FALSE(d.last_error().empty());
  CHECK(d.sent() == 2);
  CHECK(rx.receive() == payload);
  CHECK(rx.receive() == payload);
}

TEST_CASE("dispatcher preserves order") {
  Listener rx;
  OscDispatcher d({rx.endpoint()}, 256);
  for (std::int32_t i = 0; i < 50; ++i) d.post(osc::encode({"/n", {i}}));
  d.close();
  CHECK(d.dropped() == 0);
  for (std::int32_t i = 0; i < 50; ++i) {
    auto got = rx.receive();
    REQUIRE(got);
    CHECK(oracle::decode(*got)->args.at(0) == osc::Arg{i});
  }
}

TEST_CASE("drop-oldest queue") {
  DropOldestQueue<int> q(3);
  CHECK_FALSE(q.push(1));
  CHECK_FALSE(q.push(2));
  CHECK_FALSE(q.push(3));
  CHECK(q.push(4));
  CHECK(q.dropped() == 1);
  CHECK(q.size() == 3);
  CHECK(q.try_pop() == 2);
  CHECK(q.pop() == 3);
  q.close();
  CHECK(q.pop() == 4);
  CHECK_FALSE(q.pop());
  CHECK_FALSE(q.push(5));

  // producer never blocks when nobody consumes
  DropOldestQueue<int> slow(256);
  for (int i = 0; i < 10000; ++i) slow.push(i);
  CHECK(slow.dropped() == 10000 - 256);
  CHECK(slow.try_pop() == 10000 - 256);
}

TEST_CASE("JSONL records") {
  StrikeEvent e{Side::Right, 16667, Vec2(170, 162), 24000.5, 0.5};
  CHECK(jsonl::event_line(e) == R"({"t":16667,"side":"R","x":170.0,"y":162.0,"peak_acc":24000.5,"intensity":0.5})");
  CHECK(jsonl::truth_line({Side::Left, 125000, Vec2(1.5, 2)}) == R"({"t":125000,"side":"L","x":1.5,"y":2.0})");
  SpineField f{33333, Side::Left, {{Vec2(1, 2), Vec2(0, -1), 3.5}}};
  CHECK(jsonl::spine_line(f) == R"({"t":33333,"side":"L","spines":[[1.0,2.0,0.0,-1.0,3.5]]})");

  std::istringstream in(jsonl::event_line(e) + "\n\n" + jsonl::event_line(e) + "\n");
  auto back = jsonl::read_events(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].t == 16667);
  CHECK(back[0].side == Side::Right);
  CHECK(back[0].peak_acc == 24000.5);

  std::istringstream broken(R"({"t":1,"side":"L","x":0,"y":0})" "\n" R"({"t":2,"side":"Q"})" "\n");
  try {
    jsonl::read_truth(broken);
    FAIL("expected parse error");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::parse_error);
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
}
