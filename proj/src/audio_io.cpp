// Copyright 2026 The timbreid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "timbreid/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "timbreid/error.hpp"

namespace timbreid {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatIeeeFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

float read_f32(const unsigned char* p) {
  std::uint32_t bits = read_u32(p);
  float out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

struct FmtChunk {
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
};

// Decodes one sample at byte offset `p`, mapping integer PCM to [-1, 1).
double decode_sample(const unsigned char* p, std::uint16_t format_tag,
                     std::uint16_t bits) {
  if (format_tag == kFormatIeeeFloat) {
    return static_cast<double>(read_f32(p));
  }
  switch (bits) {
    case 8:
      // 8-bit WAV is unsigned with midpoint 128.
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      const auto v = static_cast<std::int16_t>(read_u16(p));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(
          (static_cast<std::uint32_t>(p[0]) << 8) |
          (static_cast<std::uint32_t>(p[1]) << 16) |
          (static_cast<std::uint32_t>(p[2]) << 24));
      v >>= 8;  // sign-extend back down to 24 bits
      return v / 8388608.0;
    }
    default:
      throw UnsupportedFormat("unhandled bit depth");
  }
}

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_u16(std::ofstream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF)};
  write_bytes(out, b, 2);
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  write_bytes(out, b, 4);
}

}  // namespace

AudioStream read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  std::vector<unsigned char> file((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  if (file.size() < 12 || std::memcmp(file.data(), "RIFF", 4) != 0 ||
      std::memcmp(file.data() + 8, "WAVE", 4) != 0) {
    throw UnsupportedFormat(path + " is not a RIFF/WAVE file");
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  // Chunk scan. Chunks are word-aligned; unknown ones are skipped.
  std::size_t pos = 12;
  while (pos + 8 <= file.size()) {
    const unsigned char* hdr = file.data() + pos;
    const std::uint32_t chunk_size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > file.size()) {
      throw UnsupportedFormat("truncated chunk in " + path);
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw UnsupportedFormat("short fmt chunk");
      const unsigned char* f = file.data() + body;
      fmt.format_tag = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.sample_rate = read_u32(f + 4);
      fmt.bits_per_sample = read_u16(f + 14);
      if (fmt.format_tag == kFormatExtensible) {
        if (chunk_size < 40) throw UnsupportedFormat("short extensible fmt");
        fmt.format_tag = read_u16(f + 24);  // first two bytes of SubFormat
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = file.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);
  }

  if (!have_fmt || data == nullptr) {
    throw UnsupportedFormat(path + ": missing fmt or data chunk");
  }
  if (fmt.channels == 0 || fmt.sample_rate == 0) {
    throw UnsupportedFormat(path + ": bad fmt chunk");
  }
  const bool ok_pcm = fmt.format_tag == kFormatPcm &&
                      (fmt.bits_per_sample == 8 || fmt.bits_per_sample == 16 ||
                       fmt.bits_per_sample == 24);
  const bool ok_float =
      fmt.format_tag == kFormatIeeeFloat && fmt.bits_per_sample == 32;
  if (!ok_pcm && !ok_float) {
    throw UnsupportedFormat(path + ": only 8/16/24-bit PCM and 32-bit float");
  }

  const std::size_t bytes_per_sample = fmt.bits_per_sample / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t n_frames = data_size / frame_bytes;
  if (n_frames == 0) throw EmptyAudio(path + " contains no samples");

  AudioStream stream;
  stream.sample_rate = static_cast<double>(fmt.sample_rate);
  stream.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    const unsigned char* frame = data + i * frame_bytes;
    for (std::uint16_t c = 0; c < fmt.channels; ++c) {
      acc += decode_sample(frame + c * bytes_per_sample, fmt.format_tag,
                           fmt.bits_per_sample);
    }
    stream.samples[i] = acc / fmt.channels;
  }
  return stream;
}

void write_wav(const std::string& path, const AudioStream& stream) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");

  const auto n = static_cast<std::uint32_t>(stream.samples.size());
  const std::uint32_t data_bytes = n * 4;
  const auto rate = static_cast<std::uint32_t>(stream.sample_rate);

  write_bytes(out, "RIFF", 4);
  write_u32(out, 36 + data_bytes);
  write_bytes(out, "WAVE", 4);
  write_bytes(out, "fmt ", 4);
  write_u32(out, 16);
  write_u16(out, kFormatIeeeFloat);
  write_u16(out, 1);  // mono
  write_u32(out, rate);
  write_u32(out, rate * 4);
  write_u16(out, 4);
  write_u16(out, 32);
  write_bytes(out, "data", 4);
  write_u32(out, data_bytes);
  for (double s : stream.samples) {
    const auto v = static_cast<float>(s);
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    write_u32(out, bits);
  }
  if (!out) throw IoError("write failure on " + path);
}

AudioStream scale_stream(const AudioStream& stream) {
  double peak = 0.0;
  for (double s : stream.samples) peak = std::max(peak, std::abs(s));
  if (peak == 0.0) {
    throw SilentStream("max |sample| is zero; stream is digital silence");
  }
  AudioStream out;
  out.sample_rate = stream.sample_rate;
  out.scaled = true;
  out.samples.resize(stream.samples.size());
  for (std::size_t i = 0; i < stream.samples.size(); ++i) {
    out.samples[i] = stream.samples[i] / peak;
  }
  return out;
}

}  // namespace timbreid
