#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsc/tensor.hpp"

namespace lsc {

/// SCT1 layout: "SCT1", u8 rank, rank x u64 LE extents, payload as f64 LE.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

/// Binary PGM (P5, 8- or 16-bit) as an HxW tensor scaled to [0, 1].
Tensor load_pgm(const std::filesystem::path& path);
void save_pgm(const Tensor& image, const std::filesystem::path& path);

/// Loads one or more grayscale sources (.pgm or .sct) and stacks them into
/// an HxWxC tensor, C indexing images. A single HxW source stays rank 2;
/// an .sct that is already HxWxC is passed through.
Tensor load_images(const std::vector<std::filesystem::path>& paths);

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace lsc
