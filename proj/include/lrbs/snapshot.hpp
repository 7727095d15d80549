#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrbs/lattice.hpp"

namespace lrbs {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotHeader {
  int dim = 1;
  std::vector<int> extents;
  FieldKind kind = FieldKind::integer;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
};

/// Exactly one of `counts` / `reals` is set. The lattice is periodic.
struct Snapshot {
  SnapshotHeader header;
  std::optional<CountField> counts;
  std::optional<RealField> reals;
};

/// Format: `LRBS-FIELD v1`, then `dim=<d> extent=<e1,...> kind=<int|real> step=<n> seed=<s>`,
/// then row-major values, one row of the last axis per line.
void write_snapshot(std::ostream& out, const CountField& field, std::int64_t step, std::uint64_t seed);
void write_snapshot(std::ostream& out, const RealField& field, std::int64_t step, std::uint64_t seed);
void save_snapshot(const std::string& path, const CountField& field, std::int64_t step, std::uint64_t seed);
void save_snapshot(const std::string& path, const RealField& field, std::int64_t step, std::uint64_t seed);

/// Errors name the offending line.
Snapshot read_snapshot(std::istream& in);
Snapshot load_snapshot(const std::string& path);

}  // namespace lrbs
