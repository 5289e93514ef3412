#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace fflp {

/// Labelled grayscale images, one byte per pixel, row-major.
///
/// FFDS file layout (little-endian): "FFDS", u32 count, u32 rows, u32 cols,
/// then `count` records of rows*cols pixel bytes followed by one label byte.
struct Dataset {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::vector<std::uint8_t>> images;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t pixels() const { return std::size_t{rows} * cols; }
};

inline constexpr std::uint8_t kMaxLabel = 9;

void write_dataset(std::ostream& os, const Dataset& data);
/// Throws FormatError; for bad records the reported position is the index of
/// the first bad record (truncated or label > 9).
Dataset read_dataset(std::istream& is);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

/// Path of the bundled 8x8 digits file.
std::filesystem::path default_digits_path();

}  // namespace fflp
