#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rediffuse/tensor.hpp"

namespace rediffuse {

// TNSR binary layout, little-endian regardless of host:
//   "TNSR" | dtype u8 (0 = f32) | ndim u8 | ndim x dim u32 | payload f32
std::vector<uint8_t> tensor_to_bytes(const ImageTensor& t);
ImageTensor tensor_from_bytes(const uint8_t* bytes, size_t len);
ImageTensor tensor_from_bytes(const std::vector<uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const ImageTensor& t);
ImageTensor read_tensor(const std::filesystem::path& path);

std::string base64_encode(const uint8_t* bytes, size_t len);
std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(const std::string& text);

std::string tensor_to_base64(const ImageTensor& t);
ImageTensor tensor_from_base64(const std::string& text);

// Shortest round-trip decimal forms, for CSV cells and JSON numbers.
std::string format_double(double v);
std::string format_float(float v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace rediffuse
