#include "cocyclab/table_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace cocyclab {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ShapeError("table: cannot parse " + what + " from '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != static_cast<int>(v) || v < 1) throw ShapeError("table: " + what + " must be a positive integer");
  return static_cast<int>(v);
}

std::uint64_t to_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(bits);
  return bits;
}

}  // namespace

Tail<> parse_tail(const std::string& s) {
  if (s == "zero") return Tail<>::zero();
  if (s == "identity") return Tail<>::identity();
  if (s == "harmonic") return Tail<>::harmonic();
  const auto parts = split(s, ':');
  if (parts.size() == 2 && parts[0] == "geometric") return Tail<>::geometric(to_double(parts[1], "geometric ratio"));
  if (parts.size() == 4 && parts[0] == "power") {
    return {to_double(parts[1], "tail scale"), to_double(parts[2], "tail power"), to_double(parts[3], "tail ratio")};
  }
  throw ShapeError("unknown tail '" + s + "'");
}

void write_table(const std::string& path, const TableGrid& grid, TableFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("table: cannot open " + path + " for writing");
  const Eigen::Index m = grid.truncation();
  out << "cocycle-table v1 format=" << (format == TableFormat::text ? "text" : "binary")
      << " base_dim=" << grid.nodes.size() << " nodes=";
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) out << (i ? "," : "") << grid.nodes[i];
  out << " truncation=" << m << " tail=" << grid.tail.describe() << '\n';
  out.precision(17);
  for (const Eigen::MatrixXd& b : grid.blocks) {
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        if (format == TableFormat::text) {
          out << b(r, c) << (c + 1 < m ? ' ' : '\n');
        } else {
          const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(b(r, c)));
          out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
      }
    }
  }
  if (!out) throw PreconditionError("table: write to " + path + " failed");
}

TableGrid read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("table: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "cocycle-table" || version != "v1") throw ShapeError("table: bad header in " + path);
  std::map<std::string, std::string> fields;
  std::string kv;
  while (hs >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ShapeError("table: malformed header field '" + kv + "'");
    fields[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const char* key : {"format", "base_dim", "nodes", "truncation", "tail"}) {
    if (!fields.count(key)) throw ShapeError(std::string("table: header lacks ") + key);
  }
  TableGrid grid;
  const int base_dim = to_int(fields["base_dim"], "base_dim");
  for (const auto& n : split(fields["nodes"], ',')) grid.nodes.push_back(to_int(n, "nodes"));
  if (static_cast<int>(grid.nodes.size()) != base_dim) throw ShapeError("table: nodes do not match base_dim");
  const int m = to_int(fields["truncation"], "truncation");
  grid.tail = parse_tail(fields["tail"]);
  std::size_t count = 1;
  for (int n : grid.nodes) count *= static_cast<std::size_t>(n);
  const bool text = fields["format"] == "text";
  if (!text && fields["format"] != "binary") throw ShapeError("table: unknown format " + fields["format"]);
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::MatrixXd b(m, m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        if (text) {
          if (!(in >> b(r, c))) throw ShapeError("table: too few values in " + path);
        } else {
          std::uint64_t bits = 0;
          if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw ShapeError("table: truncated binary data");
          b(r, c) = std::bit_cast<double>(to_little(bits));
        }
      }
    }
    grid.blocks.push_back(std::move(b));
  }
  if (text) {
    std::string extra;
    if (in >> extra) throw ShapeError("table: trailing data in " + path);
  } else if (in.peek() != std::char_traits<char>::eof()) {
    throw ShapeError("table: trailing data in " + path);
  }
  return grid;
}

}  // namespace cocyclab
