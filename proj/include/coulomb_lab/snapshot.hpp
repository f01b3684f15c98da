#pragma once

// "SCF1" snapshot files:
//   bytes "SCF1\n"
//   one-line JSON header {"n":int,"R":float,"name":string}\n
//   n^3 little-endian IEEE-754 doubles, x-fastest.

#include <filesystem>
#include <string>

#include "coulomb_lab/field.hpp"

namespace clab {

struct Snapshot {
  ScalarField field;
  std::string name;
};

void write_snapshot(const ScalarField& f, const std::filesystem::path& path,
                    const std::string& name = "field");

Snapshot read_snapshot_named(const std::filesystem::path& path);

inline ScalarField read_snapshot(const std::filesystem::path& path) {
  return read_snapshot_named(path).field;
}

}  // namespace clab
