#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "latkit/core.hpp"

namespace latkit {

/// Malformed lattice text; carries the 1-based position when the JSON itself
/// failed to parse (line == 0 otherwise).
class LatticeFormatError : public InvalidInput {
 public:
  LatticeFormatError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : InvalidInput(what), line(line), column(column) {}
  std::size_t line;
  std::size_t column;
};

/// Reads {"name", "ambient_dim", "basis": [[entry, ...], ...]}. Integers and
/// "p/q" strings are exact; any decimal entry (JSON float or decimal string)
/// puts the whole basis in float mode.
LatticeBasis parse_lattice_json(const std::string& text);
LatticeBasis read_lattice_file(const std::filesystem::path& path);

nlohmann::json lattice_to_json(const LatticeBasis& basis);
void write_lattice_file(const std::filesystem::path& path, const LatticeBasis& basis);

}  // namespace latkit
