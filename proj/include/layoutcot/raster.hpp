#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace layoutcot {

/// Grayscale map (saliency or gradient) with intensities in [0, 1],
/// stored row-major.
struct SaliencyRaster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
  bool operator==(const SaliencyRaster&) const = default;
};

/// Reads a binary PGM (P5) file, 8- or 16-bit. Intensities are divided by
/// the file's declared max value.
/// Throws FormatError for a bad header and DimensionMismatch for short pixel data.
SaliencyRaster load_raster(const std::filesystem::path& path);
SaliencyRaster decode_pgm(const std::string& bytes);

/// Writes an 8-bit P5 file; values are scaled by 255 and rounded.
void save_raster(const SaliencyRaster& raster, const std::filesystem::path& path);
std::string encode_pgm(const SaliencyRaster& raster);

}  // namespace layoutcot
