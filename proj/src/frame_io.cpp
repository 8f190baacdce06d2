#include "percuss/frame_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace percuss {

namespace fs = std::filesystem;

Frame::Frame(int width, int height, Micros t, std::uint8_t fill) : timestamp(t) {
  if (width <= 0 || height <= 0) throw Error(Errc::malformed_header, "frame dimensions must be positive");
  luma = Luma::Constant(height, width, fill);
}

Frame::Frame(int width, int height, std::span<const std::uint8_t> pixels, Micros t) : Frame(width, height, t) {
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(Errc::truncated_payload, "pixel count does not match width x height");
  std::copy(pixels.begin(), pixels.end(), luma.data());
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* what) {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000) throw Error(Errc::malformed_header, std::string(what) + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(Errc::malformed_header, std::string("non-numeric ") + what);
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::uint8_t peek() const { return bytes_[pos_]; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Frame decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error(Errc::malformed_header, "missing P5 magic");
  HeaderReader r(bytes.subspan(2));
  const long width = r.read_uint("width");
  const long height = r.read_uint("height");
  const long maxval = r.read_uint("maxval");
  if (width <= 0 || height <= 0) throw Error(Errc::malformed_header, "zero dimension");
  if (maxval > 255) throw Error(Errc::unsupported_maxval, "maxval " + std::to_string(maxval));
  if (maxval == 0) throw Error(Errc::malformed_header, "maxval 0");
  // exactly one whitespace byte separates the header from the raster
  if (r.at_end() || !std::isspace(r.peek())) throw Error(Errc::truncated_payload, "no raster after header");
  r.advance(1);

  const std::size_t offset = 2 + r.pos();
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset || bytes.size() - offset < need)
    throw Error(Errc::truncated_payload,
                "expected " + std::to_string(need) + " pixel bytes, got " + std::to_string(bytes.size() - offset));
  return Frame(static_cast<int>(width), static_cast<int>(height), bytes.subspan(offset, need));
}

std::vector<std::uint8_t> encode_pgm(const Frame& frame) {
  const std::string header =
      "P5\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto px = frame.pixels();
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

std::optional<StreamFormat> parse_stream_format(std::string_view name) {
  if (name == "pgm-sequence" || name == "pgm") return StreamFormat::pgm_sequence;
  if (name == "raw-y8" || name == "raw") return StreamFormat::raw_y8;
  if (name == "y4m") return StreamFormat::y4m;
  return std::nullopt;
}

std::string_view stream_format_name(StreamFormat f) {
  switch (f) {
    case StreamFormat::pgm_sequence: return "pgm-sequence";
    case StreamFormat::raw_y8: return "raw-y8";
    case StreamFormat::y4m: return "y4m";
  }
  return "?";
}

Micros synthesized_timestamp(std::int64_t index, double fps) {
  return static_cast<Micros>(std::llround(static_cast<double>(index) * 1e6 / fps));
}

std::optional<Frame> GeneratedSource::next() {
  auto f = generate_(index_);
  if (f) ++index_;
  return f;
}

namespace {

/// Reads up to n bytes; returns the count actually read.
std::size_t read_fully(std::istream& in, std::uint8_t* dst, std::size_t n) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount());
}

class RawY8Source final : public FrameSource {
 public:
  RawY8Source(std::shared_ptr<std::istream> in, int w, int h, double fps)
      : FrameSource(w, h, fps), in_(std::move(in)) {}

  std::optional<Frame> next() override {
    if (done_) return std::nullopt;
    Frame f(width_, height_, synthesized_timestamp(index_, fps_));
    const std::size_t need = static_cast<std::size_t>(f.luma.size());
    const std::size_t got = read_fully(*in_, f.luma.data(), need);
    if (got == 0) {
      if (in_->bad()) throw Error(Errc::io_failure, "read error on raw stream");
      done_ = true;
      return std::nullopt;
    }
    if (got < need) {
      done_ = true;
      throw Error(Errc::format_mismatch, "raw payload is not a multiple of the frame size (" +
                                             std::to_string(got) + " trailing bytes)");
    }
    ++index_;
    return f;
  }

  StreamFormat format() const override { return StreamFormat::raw_y8; }

 private:
  std::shared_ptr<std::istream> in_;
  std::int64_t index_ = 0;
  bool done_ = false;
};

struct Y4mHeader {
  int width = 0;
  int height = 0;
  double fps = 0.0;
  std::size_t chroma_bytes = 0;
};

std::size_t chroma_plane_bytes(const std::string& colorspace, int w, int h) {
  const std::size_t cw2 = static_cast<std::size_t>((w + 1) / 2);
  const std::size_t ch2 = static_cast<std::size_t>((h + 1) / 2);
  if (colorspace.empty() || colorspace.rfind("420", 0) == 0) return 2 * cw2 * ch2;
  if (colorspace.rfind("422", 0) == 0) return 2 * cw2 * static_cast<std::size_t>(h);
  if (colorspace.rfind("444", 0) == 0) return 2 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (colorspace.rfind("mono", 0) == 0) return 0;
  throw Error(Errc::format_mismatch, "unsupported y4m colorspace C" + colorspace);
}

Y4mHeader parse_y4m_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::format_mismatch, "empty y4m stream");
  std::istringstream tokens(line);
  std::string tok;
  tokens >> tok;
  if (tok != "YUV4MPEG2") throw Error(Errc::format_mismatch, "y4m header absent");
  Y4mHeader h;
  std::string colorspace;
  while (tokens >> tok) {
    const char tag = tok[0];
    const std::string val = tok.substr(1);
    try {
      if (tag == 'W') h.width = std::stoi(val);
      else if (tag == 'H') h.height = std::stoi(val);
      else if (tag == 'C') colorspace = val;
      else if (tag == 'F') {
        const auto colon = val.find(':');
        if (colon == std::string::npos) throw Error(Errc::format_mismatch, "bad y4m frame rate " + val);
        const double num = std::stod(val.substr(0, colon));
        const double den = std::stod(val.substr(colon + 1));
        if (num > 0 && den > 0) h.fps = num / den;
      }
    } catch (const std::logic_error&) {
      throw Error(Errc::format_mismatch, "bad y4m header token " + tok);
    }
  }
  if (h.width <= 0 || h.height <= 0) throw Error(Errc::format_mismatch, "y4m header lacks W/H");
  h.chroma_bytes = chroma_plane_bytes(colorspace, h.width, h.height);
  return h;
}

class Y4mSource final : public FrameSource {
 public:
  Y4mSource(std::shared_ptr<std::istream> in, const Y4mHeader& h, double fallback_fps)
      : FrameSource(h.width, h.height, h.fps > 0 ? h.fps : fallback_fps),
        in_(std::move(in)),
        chroma_bytes_(h.chroma_bytes) {}

  std::optional<Frame> next() override {
    if (done_) return std::nullopt;
    std::string marker;
    if (!std::getline(*in_, marker)) {
      done_ = true;
      if (in_->bad()) throw Error(Errc::io_failure, "read error on y4m stream");
      return std::nullopt;
    }
    if (marker.rfind("FRAME", 0) != 0) {
      done_ = true;
      throw Error(Errc::format_mismatch, "expected FRAME marker");
    }
    Frame f(width_, height_, synthesized_timestamp(index_, fps_));
    const std::size_t need = static_cast<std::size_t>(f.luma.size());
    if (read_fully(*in_, f.luma.data(), need) < need) {
      done_ = true;
      throw Error(Errc::format_mismatch, "truncated y4m luma plane");
    }
    if (chroma_bytes_ > 0) {
      in_->ignore(static_cast<std::streamsize>(chroma_bytes_));
      if (static_cast<std::size_t>(in_->gcount()) < chroma_bytes_) {
        done_ = true;
        throw Error(Errc::format_mismatch, "truncated y4m chroma planes");
      }
    }
    ++index_;
    return f;
  }

  StreamFormat format() const override { return StreamFormat::y4m; }

 private:
  std::shared_ptr<std::istream> in_;
  std::size_t chroma_bytes_;
  std::int64_t index_ = 0;
  bool done_ = false;
};

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PgmSequenceSource final : public FrameSource {
 public:
  PgmSequenceSource(std::vector<fs::path> files, Frame first, double fps)
      : FrameSource(first.width(), first.height(), fps), files_(std::move(files)), first_(std::move(first)) {}

  std::optional<Frame> next() override {
    if (index_ >= files_.size()) return std::nullopt;
    Frame f = index_ == 0 ? std::move(first_) : decode_pgm(slurp(files_[index_]));
    if (f.width() != width_ || f.height() != height_)
      throw Error(Errc::format_mismatch, files_[index_].string() + " has different dimensions");
    f.timestamp = synthesized_timestamp(static_cast<std::int64_t>(index_), fps_);
    ++index_;
    return f;
  }

  StreamFormat format() const override { return StreamFormat::pgm_sequence; }

 private:
  std::vector<fs::path> files_;
  Frame first_;
  std::size_t index_ = 0;
};

std::unique_ptr<FrameSource> open_pgm_sequence(const StreamSpec& spec) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (fs::is_directory(spec.path, ec)) {
    for (const auto& entry : fs::directory_iterator(spec.path, ec))
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  } else if (fs::is_regular_file(spec.path, ec)) {
    files.push_back(spec.path);
  } else {
    throw Error(Errc::io_failure, "no such file or directory: " + spec.path);
  }
  if (files.empty()) throw Error(Errc::io_failure, "no .pgm files in " + spec.path);
  Frame first = decode_pgm(slurp(files.front()));
  return std::make_unique<PgmSequenceSource>(std::move(files), std::move(first), spec.nominal_fps);
}

}  // namespace

std::unique_ptr<FrameSource> open_stream(std::shared_ptr<std::istream> in, const StreamSpec& spec) {
  if (!(spec.nominal_fps > 0)) throw Error(Errc::format_mismatch, "nominal fps must be positive");
  switch (spec.format) {
    case StreamFormat::raw_y8:
      if (spec.width <= 0 || spec.height <= 0)
        throw Error(Errc::format_mismatch, "raw-y8 needs width and height");
      return std::make_unique<RawY8Source>(std::move(in), spec.width, spec.height, spec.nominal_fps);
    case StreamFormat::y4m: {
      const Y4mHeader h = parse_y4m_header(*in);
      return std::make_unique<Y4mSource>(std::move(in), h, spec.nominal_fps);
    }
    case StreamFormat::pgm_sequence:
      break;
  }
  throw Error(Errc::format_mismatch, "pgm-sequence cannot be read from a single stream");
}

std::unique_ptr<FrameSource> open_stream(const StreamSpec& spec) {
  if (spec.format == StreamFormat::pgm_sequence) return open_pgm_sequence(spec);
  std::shared_ptr<std::istream> in;
  if (spec.path == "-") {
    in = std::shared_ptr<std::istream>(&std::cin, [](std::istream*) {});
  } else {
    auto file = std::make_shared<std::ifstream>(spec.path, std::ios::binary);
    if (!*file) throw Error(Errc::io_failure, "cannot open " + spec.path);
    in = std::move(file);
  }
  return open_stream(std::move(in), spec);
}

namespace {

class RawWriter final : public FrameWriter {
 public:
  explicit RawWriter(std::ostream& out) : out_(out) {}
  void write(const Frame& f) override {
    const auto px = f.pixels();
    out_.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out_) throw Error(Errc::io_failure, "write failed");
  }

 private:
  std::ostream& out_;
};

class Y4mWriter final : public FrameWriter {
 public:
  Y4mWriter(std::ostream& out, int w, int h, double fps) : out_(out) {
    // integer rates are written exactly; others as a x1000 fraction
    const long num = std::lround(fps * 1000.0);
    const bool whole = num % 1000 == 0;
    out_ << "YUV4MPEG2 W" << w << " H" << h << " F" << (whole ? num / 1000 : num) << ':' << (whole ? 1 : 1000)
         << " Ip A1:1 Cmono\n";
  }
  void write(const Frame& f) override {
    out_ << "FRAME\n";
    const auto px = f.pixels();
    out_.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!out_) throw Error(Errc::io_failure, "write failed");
  }

 private:
  std::ostream& out_;
};

class PgmDirWriter final : public FrameWriter {
 public:
  explicit PgmDirWriter(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(Errc::io_failure, "cannot create " + dir_.string());
  }
  void write(const Frame& f) override {
    std::ostringstream name;
    name << "frame_" << std::setw(6) << std::setfill('0') << index_++ << ".pgm";
    std::ofstream out(dir_ / name.str(), std::ios::binary);
    const auto bytes = encode_pgm(f);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io_failure, "cannot write " + (dir_ / name.str()).string());
  }

 private:
  fs::path dir_;
  std::size_t index_ = 0;
};

}  // namespace

std::unique_ptr<FrameWriter> make_frame_writer(std::ostream& out, StreamFormat format, int width, int height,
                                               double fps) {
  switch (format) {
    case StreamFormat::raw_y8: return std::make_unique<RawWriter>(out);
    case StreamFormat::y4m: return std::make_unique<Y4mWriter>(out, width, height, fps);
    case StreamFormat::pgm_sequence: break;
  }
  throw Error(Errc::format_mismatch, "pgm-sequence output needs a directory");
}

std::unique_ptr<FrameWriter> make_pgm_sequence_writer(const fs::path& dir) {
  return std::make_unique<PgmDirWriter>(dir);
}

}  // namespace percuss
