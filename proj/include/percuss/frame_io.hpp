#pragma once

#include "percuss/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace percuss {

using Luma = Raster<std::uint8_t>;

/// Timestamped single-channel luminance frame.
struct Frame {
  Luma luma;  // height x width, row-major
  Micros timestamp = 0;

  Frame() = default;
  Frame(int width, int height, Micros t = 0, std::uint8_t fill = 0);
  Frame(int width, int height, std::span<const std::uint8_t> pixels, Micros t = 0);

  int width() const { return static_cast<int>(luma.cols()); }
  int height() const { return static_cast<int>(luma.rows()); }
  std::span<const std::uint8_t> pixels() const {
    return {luma.data(), static_cast<std::size_t>(luma.size())};
  }
  std::uint8_t at(int x, int y) const { return luma(y, x); }
  std::uint8_t& at(int x, int y) { return luma(y, x); }
};

Frame decode_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const Frame& frame);

enum class StreamFormat { pgm_sequence, raw_y8, y4m };

std::optional<StreamFormat> parse_stream_format(std::string_view name);
std::string_view stream_format_name(StreamFormat f);

/// Timestamp for frame `index` of a stream with no per-frame clock.
Micros synthesized_timestamp(std::int64_t index, double fps);

/// Sequential frame iterator. `next()` returns nullopt at clean end of stream
/// and throws `Error` on malformed data.
class FrameSource {
 public:
  virtual ~FrameSource() = default;

  virtual std::optional<Frame> next() = 0;

  virtual StreamFormat format() const = 0;
  int width() const { return width_; }
  int height() const { return height_; }
  double nominal_fps() const { return fps_; }

 protected:
  FrameSource(int width, int height, double fps) : width_(width), height_(height), fps_(fps) {}

  int width_;
  int height_;
  double fps_;
};

struct StreamSpec {
  std::string path;  // "-" for stdin; directory for pgm-sequence
  StreamFormat format = StreamFormat::y4m;
  double nominal_fps = 60.0;
  int width = 0;   // required for raw-y8
  int height = 0;  // required for raw-y8
};

std::unique_ptr<FrameSource> open_stream(const StreamSpec& spec);

/// Wraps an arbitrary istream (owned or borrowed) as a raw-y8 or y4m source.
std::unique_ptr<FrameSource> open_stream(std::shared_ptr<std::istream> in, const StreamSpec& spec);

/// Frames produced on demand by a generator; `generate(i)` returns nullopt at end.
class GeneratedSource : public FrameSource {
 public:
  using Generator = std::function<std::optional<Frame>(std::int64_t index)>;

  GeneratedSource(int width, int height, double fps, Generator generate)
      : FrameSource(width, height, fps), generate_(std::move(generate)) {}

  std::optional<Frame> next() override;
  StreamFormat format() const override { return StreamFormat::raw_y8; }

 private:
  Generator generate_;
  std::int64_t index_ = 0;
};

/// Writes frames as a stream in one of the supported container formats.
class FrameWriter {
 public:
  virtual ~FrameWriter() = default;
  virtual void write(const Frame& frame) = 0;
};

/// `out` must outlive the writer. For pgm-sequence, `dir` receives
/// zero-padded numbered files.
std::unique_ptr<FrameWriter> make_frame_writer(std::ostream& out, StreamFormat format, int width,
                                               int height, double fps);
std::unique_ptr<FrameWriter> make_pgm_sequence_writer(const std::filesystem::path& dir);

}  // namespace percuss
