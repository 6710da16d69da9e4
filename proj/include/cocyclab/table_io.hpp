#pragma once

#include "cocyclab/cocycle.hpp"

#include <string>

namespace cocyclab {

enum class TableFormat { text, binary };

/// Writes a table grid. The first line is the header
///   cocycle-table v1 format=<text|binary> base_dim=<1|2> nodes=<n0>[,<n1>] truncation=<M> tail=<tail>
/// followed by the blocks in node order, each row-major: whitespace-separated
/// decimals for text, little-endian float64 for binary.
void write_table(const std::string& path, const TableGrid& grid, TableFormat format);

/// Reads a file written by write_table. Throws ShapeError on malformed input.
TableGrid read_table(const std::string& path);

/// Parses "zero", "identity", "harmonic", "geometric:q" or "power:c:a:q".
Tail<> parse_tail(const std::string& s);

}  // namespace cocyclab
