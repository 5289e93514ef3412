#include "fflp/dataset.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "fflp/errors.hpp"

#ifndef FFLP_DATA_DIR
#define FFLP_DATA_DIR "data"
#endif

namespace fflp {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'F', 'D', 'S'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is, std::uint64_t offset) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated dataset header", offset);
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
}

}  // namespace

void write_dataset(std::ostream& os, const Dataset& data) {
  if (data.images.size() != data.labels.size()) throw std::invalid_argument("image/label count mismatch");
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, static_cast<std::uint32_t>(data.size()));
  put_u32(os, data.rows);
  put_u32(os, data.cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.images[i].size() != data.pixels()) throw std::invalid_argument("image size mismatch");
    os.write(reinterpret_cast<const char*>(data.images[i].data()), static_cast<std::streamsize>(data.pixels()));
    os.put(static_cast<char>(data.labels[i]));
  }
}

Dataset read_dataset(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kMagic) throw FormatError("bad dataset magic", 0);
  Dataset d;
  const std::uint32_t count = get_u32(is, 4);
  d.rows = get_u32(is, 8);
  d.cols = get_u32(is, 12);
  if (d.rows == 0 || d.cols == 0 || d.pixels() > (1u << 20)) throw FormatError("bad image dimensions", 8);

  d.images.reserve(std::min<std::uint32_t>(count, 1u << 16));
  std::vector<std::uint8_t> record(d.pixels() + 1);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!is.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(record.size()))) {
      throw FormatError("truncated dataset record", i);
    }
    if (record.back() > kMaxLabel) throw FormatError("dataset label out of range", i);
    d.images.emplace_back(record.begin(), record.end() - 1);
    d.labels.push_back(record.back());
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after dataset records", count);
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset " + path.string());
  return read_dataset(is);
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write dataset " + path.string());
  write_dataset(os, data);
  if (!os) throw IoError("write failed for " + path.string());
}

std::filesystem::path default_digits_path() {
  if (const char* dir = std::getenv("FFLP_DATA_DIR")) return std::filesystem::path(dir) / "digits8x8.ffds";
  return std::filesystem::path(FFLP_DATA_DIR) / "digits8x8.ffds";
}

}  // namespace fflp
