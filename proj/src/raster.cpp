#include "layoutcot/raster.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "layoutcot/error.hpp"

namespace layoutcot {

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const unsigned char c = static_cast<unsigned char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(c)) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t begin = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(begin, pos - begin);
}

std::size_t header_number(const std::string& bytes, std::size_t& pos, const char* what) {
  const std::string token = next_token(bytes, pos);
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::FormatError, std::string("bad PGM ") + what + " '" + token + "'");
  }
  return static_cast<std::size_t>(std::stoull(token));
}

}  // namespace

SaliencyRaster decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") {
    throw Error(ErrorCode::FormatError, "not a binary PGM (P5) file");
  }
  SaliencyRaster r;
  r.width = header_number(bytes, pos, "width");
  r.height = header_number(bytes, pos, "height");
  const std::size_t max_value = header_number(bytes, pos, "max value");
  if (max_value == 0 || max_value > 65535) {
    throw Error(ErrorCode::FormatError, "PGM max value out of range");
  }
  if (r.width == 0 || r.height == 0) {
    throw Error(ErrorCode::DimensionMismatch, "PGM has a zero dimension");
  }
  // Exactly one whitespace byte separates the header from the pixel data.
  ++pos;
  const std::size_t bytes_per_pixel = max_value < 256 ? 1 : 2;
  const std::size_t count = r.width * r.height;
  if (pos > bytes.size() || bytes.size() - pos < count * bytes_per_pixel) {
    throw Error(ErrorCode::DimensionMismatch, "PGM pixel data shorter than " +
                                                  std::to_string(r.width) + "x" +
                                                  std::to_string(r.height));
  }
  r.values.resize(count);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  const double scale = static_cast<double>(max_value);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned value = bytes_per_pixel == 1
                               ? data[i]
                               : (static_cast<unsigned>(data[2 * i]) << 8) | data[2 * i + 1];
    if (value > max_value) throw Error(ErrorCode::FormatError, "PGM sample exceeds max value");
    r.values[i] = static_cast<double>(value) / scale;
  }
  return r;
}

SaliencyRaster load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open raster " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

std::string encode_pgm(const SaliencyRaster& raster) {
  if (raster.values.size() != raster.width * raster.height) {
    throw Error(ErrorCode::DimensionMismatch, "raster value count does not match its size");
  }
  std::ostringstream os;
  os << "P5\n" << raster.width << ' ' << raster.height << "\n255\n";
  for (double v : raster.values) {
    const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    os.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  return os.str();
}

void save_raster(const SaliencyRaster& raster, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write raster " + path.string());
  const std::string bytes = encode_pgm(raster);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace layoutcot
