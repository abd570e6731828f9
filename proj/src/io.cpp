#include "rediffuse/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rediffuse {

namespace {

void put_u32_le(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v & 0xff));
  out.push_back(uint8_t((v >> 8) & 0xff));
  out.push_back(uint8_t((v >> 16) & 0xff));
  out.push_back(uint8_t((v >> 24) & 0xff));
}

uint32_t get_u32_le(const uint8_t* p) {
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::vector<uint8_t> tensor_to_bytes(const ImageTensor& t) {
  std::vector<uint8_t> out;
  out.reserve(6 + 4 * t.shape.size() + 4 * t.data.size());
  out.push_back('T');
  out.push_back('N');
  out.push_back('S');
  out.push_back('R');
  out.push_back(0);  // dtype f32
  out.push_back(uint8_t(t.shape.size()));
  for (uint32_t d : t.shape) put_u32_le(out, d);
  for (float f : t.data) {
    uint32_t bits = std::bit_cast<uint32_t>(f);
    put_u32_le(out, bits);
  }
  return out;
}

ImageTensor tensor_from_bytes(const uint8_t* bytes, size_t len) {
  if (len < 6 || std::memcmp(bytes, "TNSR", 4) != 0)
    throw std::invalid_argument("tensor: bad magic");
  if (bytes[4] != 0) throw std::invalid_argument("tensor: unknown dtype");
  size_t ndim = bytes[5];
  if (ndim == 0) throw std::invalid_argument("tensor: zero rank");
  size_t header = 6 + 4 * ndim;
  if (len < header) throw std::invalid_argument("tensor: truncated header");
  std::vector<uint32_t> shape(ndim);
  for (size_t i = 0; i < ndim; ++i) shape[i] = get_u32_le(bytes + 6 + 4 * i);
  size_t n = ImageTensor::checked_numel(shape);
  if (len != header + 4 * n)
    throw std::invalid_argument("tensor: payload length mismatch");
  std::vector<float> data(n);
  for (size_t i = 0; i < n; ++i) {
    uint32_t bits = get_u32_le(bytes + header + 4 * i);
    data[i] = std::bit_cast<float>(bits);
  }
  return ImageTensor(std::move(shape), std::move(data));
}

ImageTensor tensor_from_bytes(const std::vector<uint8_t>& bytes) {
  return tensor_from_bytes(bytes.data(), bytes.size());
}

void write_tensor(const std::filesystem::path& path, const ImageTensor& t) {
  auto bytes = tensor_to_bytes(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          std::streamsize(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

ImageTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return tensor_from_bytes(bytes);
}

std::string base64_encode(const uint8_t* bytes, size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < len; i += 3) {
    uint32_t v = (uint32_t(bytes[i]) << 16) | (uint32_t(bytes[i + 1]) << 8) |
                 uint32_t(bytes[i + 2]);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  if (i + 1 == len) {
    uint32_t v = uint32_t(bytes[i]) << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (i + 2 == len) {
    uint32_t v = (uint32_t(bytes[i]) << 16) | (uint32_t(bytes[i + 1]) << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::string base64_encode(const std::vector<uint8_t>& bytes) {
  return base64_encode(bytes.data(), bytes.size());
}

std::vector<uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0)
    throw std::invalid_argument("base64: length not a multiple of 4");
  std::vector<uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int pad = 0;
    uint32_t v = 0;
    for (size_t j = 0; j < 4; ++j) {
      char c = text[i + j];
      if (c == '=') {
        // '=' is only valid in the final two positions of the last quad.
        if (i + 4 != text.size() || j < 2)
          throw std::invalid_argument("base64: misplaced padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw std::invalid_argument("base64: data after padding");
      int d = b64_value(c);
      if (d < 0) throw std::invalid_argument("base64: invalid character");
      v = (v << 6) | uint32_t(d);
    }
    out.push_back(uint8_t((v >> 16) & 0xff));
    if (pad < 2) out.push_back(uint8_t((v >> 8) & 0xff));
    if (pad < 1) out.push_back(uint8_t(v & 0xff));
  }
  return out;
}

std::string tensor_to_base64(const ImageTensor& t) {
  return base64_encode(tensor_to_bytes(t));
}

ImageTensor tensor_from_base64(const std::string& text) {
  return tensor_from_bytes(base64_decode(text));
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_float(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path.string());
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for write: " + path.string());
  f.write(content.data(), std::streamsize(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace rediffuse
