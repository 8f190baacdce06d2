#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace percuss {

/// Row-major 2D raster. rows() is the image height, cols() the width.
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vec2 = Eigen::Vector2d;

/// Microseconds since stream start.
using Micros = std::int64_t;

enum class Side { Left, Right };

inline constexpr std::string_view side_code(Side s) { return s == Side::Left ? "L" : "R"; }
inline constexpr int side_index(Side s) { return s == Side::Left ? 0 : 1; }

enum class Errc {
  malformed_header,
  truncated_payload,
  unsupported_maxval,
  io_failure,
  format_mismatch,
  non_monotone_timestamp,
  invalid_address,
  embedded_nul,
  socket_failure,
  oversized_payload,
  unknown_scene,
  geometry_out_of_bounds,
  config_invalid,
  parse_error,
};

std::string_view errc_name(Errc e);

/// Library-wide exception; `code()` names the failure kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc e) {
  switch (e) {
    case Errc::malformed_header: return "malformed-header";
    case Errc::truncated_payload: return "truncated-payload";
    case Errc::unsupported_maxval: return "unsupported-maxval";
    case Errc::io_failure: return "io-failure";
    case Errc::format_mismatch: return "format-mismatch";
    case Errc::non_monotone_timestamp: return "non-monotone-timestamp";
    case Errc::invalid_address: return "invalid-address";
    case Errc::embedded_nul: return "embedded-nul";
    case Errc::socket_failure: return "socket-failure";
    case Errc::oversized_payload: return "oversized-payload";
    case Errc::unknown_scene: return "unknown-scene";
    case Errc::geometry_out_of_bounds: return "geometry-out-of-bounds";
    case Errc::config_invalid: return "config-invalid";
    case Errc::parse_error: return "parse-error";
  }
  return "unknown";
}

}  // namespace percuss
