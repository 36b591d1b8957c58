#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "rmnet/image.hpp"

namespace rmnet {

// Decodes any PNG to an 8-bit RGB image (grey is replicated, alpha dropped).
Image read_png_rgb(const std::filesystem::path& path);

// Decodes a PNG to one 8-bit channel. Colour input is converted by Rec.601
// luminance and reported through `was_color`.
GrayImage read_png_gray(const std::filesystem::path& path, bool* was_color = nullptr);

// Rounds to the nearest 8-bit value; model-range images are de-normalised first.
void write_png_rgb(const std::filesystem::path& path, const Image& img);
void write_png_gray(const std::filesystem::path& path, const GrayImage& img);
// Visible pixels become 255, holes 0.
void write_png_mask(const std::filesystem::path& path, const BinaryMask& mask);

// Writes bytes, mapping ENOSPC to DiskFullError and other failures to IoError.
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace rmnet
