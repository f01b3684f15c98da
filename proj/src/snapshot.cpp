#include "coulomb_lab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace clab {
namespace {

constexpr char kMagic[] = "SCF1";

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
  return v;
}

}  // namespace

void write_snapshot(const ScalarField& f, const std::filesystem::path& path,
                    const std::string& name) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  nlohmann::json header = {{"n", f.grid().n()}, {"R", f.grid().R()}, {"name", name}};
  out << kMagic << '\n' << header.dump() << '\n';
  std::vector<char> buf(f.size() * 8);
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v[i]));
    std::memcpy(buf.data() + 8 * i, &bits, 8);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Snapshot read_snapshot_named(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic)
    throw FormatError(path.string() + ": not an SCF1 snapshot");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  int n = 0;
  double R = 0.0;
  std::string name;
  try {
    const auto header = nlohmann::json::parse(line);
    n = header.at("n").get<int>();
    R = header.at("R").get<double>();
    name = header.value("name", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad header: " + e.what());
  }
  Grid grid = [&] {
    try {
      return Grid(n, R);
    } catch (const Error& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }();
  std::vector<char> buf(grid.size() * 8);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size())
    throw LengthMismatch(path.string() + ": expected " + std::to_string(buf.size()) +
                         " payload bytes, found " + std::to_string(in.gcount()));
  if (in.peek() != std::char_traits<char>::eof())
    throw LengthMismatch(path.string() + ": trailing bytes after payload");
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, buf.data() + 8 * i, 8);
    values[i] = std::bit_cast<double>(to_little(bits));
  }
  return {ScalarField(grid, std::move(values)), name};
}

}  // namespace clab
