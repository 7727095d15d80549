#include "lrbs/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lrbs {

namespace {

template <class T>
void write_field(std::ostream& out, const Field<T>& field, std::int64_t step, std::uint64_t seed) {
  const auto& lat = field.lattice();
  out << "LRBS-FIELD v1\n";
  out << "dim=" << lat.dim() << " extent=";
  for (int i = 0; i < lat.dim(); ++i) out << (i ? "," : "") << lat.extent(i);
  out << " kind=" << (Field<T>::kind == FieldKind::integer ? "int" : "real") << " step=" << step << " seed=" << seed
      << "\n";
  const std::size_t row = static_cast<std::size_t>(lat.extent(lat.dim() - 1));
  char buf[64];
  for (std::size_t s = 0; s < field.size(); ++s) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, field[s]);
    out.write(buf, ptr - buf);
    out << ((s + 1) % row == 0 ? '\n' : ' ');
  }
}

template <class T>
void save_field(const std::string& path, const Field<T>& field, std::int64_t step, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SnapshotError("cannot write " + path);
  write_field(out, field, step, seed);
  if (!out) throw SnapshotError("write failed for " + path);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw SnapshotError("line " + std::to_string(line) + ": " + msg);
}

template <class T>
bool parse_number(const std::string& tok, T& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

void write_snapshot(std::ostream& out, const CountField& field, std::int64_t step, std::uint64_t seed) {
  write_field(out, field, step, seed);
}
void write_snapshot(std::ostream& out, const RealField& field, std::int64_t step, std::uint64_t seed) {
  write_field(out, field, step, seed);
}
void save_snapshot(const std::string& path, const CountField& field, std::int64_t step, std::uint64_t seed) {
  save_field(path, field, step, seed);
}
void save_snapshot(const std::string& path, const RealField& field, std::int64_t step, std::uint64_t seed) {
  save_field(path, field, step, seed);
}

Snapshot read_snapshot(std::istream& in) {
  std::string text;
  if (!std::getline(in, text)) fail(1, "empty file");
  if (text != "LRBS-FIELD v1") fail(1, "expected 'LRBS-FIELD v1'");
  if (!std::getline(in, text)) fail(2, "missing header line");

  Snapshot snap;
  auto& h = snap.header;
  bool have[5] = {false, false, false, false, false};
  std::istringstream hs(text);
  std::string item;
  while (hs >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(2, "malformed header item '" + item + "'");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    if (key == "dim") {
      if (!parse_number(val, h.dim) || h.dim < 1 || h.dim > kMaxDim) fail(2, "bad dim");
      have[0] = true;
    } else if (key == "extent") {
      std::istringstream es(val);
      std::string e;
      while (std::getline(es, e, ',')) {
        int v = 0;
        if (!parse_number(e, v) || v < 1) fail(2, "bad extent");
        h.extents.push_back(v);
      }
      have[1] = true;
    } else if (key == "kind") {
      if (val == "int")
        h.kind = FieldKind::integer;
      else if (val == "real")
        h.kind = FieldKind::real;
      else
        fail(2, "kind must be int or real");
      have[2] = true;
    } else if (key == "step") {
      if (!parse_number(val, h.step)) fail(2, "bad step");
      have[3] = true;
    } else if (key == "seed") {
      if (!parse_number(val, h.seed)) fail(2, "bad seed");
      have[4] = true;
    } else {
      fail(2, "unknown header key '" + key + "'");
    }
  }
  for (bool b : have)
    if (!b) fail(2, "header needs dim, extent, kind, step and seed");
  if (static_cast<int>(h.extents.size()) != h.dim) fail(2, "extent count does not match dim");

  Lattice lat(h.dim, h.extents);
  std::vector<Count> counts;
  std::vector<double> reals;
  const std::size_t n = lat.size();
  int line = 2;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ls(text);
    std::string tok;
    while (ls >> tok) {
      if (counts.size() + reals.size() >= n) fail(line, "more than " + std::to_string(n) + " values");
      if (h.kind == FieldKind::integer) {
        Count v = 0;
        if (!parse_number(tok, v)) fail(line, "'" + tok + "' is not an integer");
        counts.push_back(v);
      } else {
        double v = 0.0;
        if (!parse_number(tok, v)) fail(line, "'" + tok + "' is not a real number");
        reals.push_back(v);
      }
    }
  }
  const std::size_t got = counts.size() + reals.size();
  if (got != n) fail(line, "expected " + std::to_string(n) + " values, found " + std::to_string(got));
  if (h.kind == FieldKind::integer)
    snap.counts = CountField(lat, std::move(counts));
  else
    snap.reals = RealField(lat, std::move(reals));
  return snap;
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path);
  return read_snapshot(in);
}

}  // namespace lrbs
