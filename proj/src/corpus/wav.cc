#include "pvc/corpus/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace pvc {
namespace {

uint32_t read_u32(const unsigned char* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) { return uint16_t(p[0] | (p[1] << 8)); }

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw DataError(path.string() + ": " + what);
}

}  // namespace

Waveform load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "unreadable file");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(path, "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const uint32_t size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > bytes.size() && std::memcmp(chunk, "data", 4) != 0) {
      fail(path, "truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(path, "malformed fmt chunk");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real format tag in the sub-format GUID.
      if (format == 0xfffe && size >= 26) format = read_u16(bytes.data() + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) fail(path, "data chunk before fmt chunk");
      if (channels != 1) fail(path, "multi-channel audio (" + std::to_string(channels) + " channels)");
      if (format != 1 || bits != 16) {
        fail(path, "unsupported encoding (format " + std::to_string(format) + ", " +
                       std::to_string(bits) + " bits); expected 16-bit PCM");
      }
      if (rate == 0) fail(path, "zero sample rate");
      const size_t avail = std::min<size_t>(size, bytes.size() - body);
      Waveform wave;
      wave.sample_rate = static_cast<int>(rate);
      wave.samples.resize(avail / 2);
      for (size_t i = 0; i < wave.samples.size(); ++i) {
        const auto v = static_cast<int16_t>(read_u16(bytes.data() + body + 2 * i));
        wave.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return wave;
    }
    pos = body + size + (size & 1);
  }
  fail(path, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

void save_wav(const std::filesystem::path& path, const Waveform& wave) {
  const auto n = static_cast<uint32_t>(wave.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<uint32_t>(wave.sample_rate));
  put_u32(out, static_cast<uint32_t>(wave.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (float s : wave.samples) {
    const long q = std::lround(static_cast<double>(s) * 32768.0);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(path.string() + ": cannot open for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError(path.string() + ": write failed");
}

}  // namespace pvc
