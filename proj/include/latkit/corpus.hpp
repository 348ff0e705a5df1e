#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "latkit/core.hpp"

namespace latkit {

/// A bundled test lattice. Irrational entries are stored as 40-digit decimal
/// strings, which parse to float-mode bases.
struct CorpusEntry {
  std::string file;         // e.g. "zn4.json"
  nlohmann::json document;  // the file contents
  std::string description;
  /// Every sublattice has determinant >= 1 and det(L) = 1.
  bool stable = false;
  /// Closed-form determinant: a "p/q" string for exact entries, else decimal.
  std::string det_text;
  double det = 0;
  bool exact = true;

  LatticeBasis basis() const;
};

std::vector<CorpusEntry> corpus_entries();

/// Writes every corpus file plus manifest.json; returns the written paths.
std::vector<std::filesystem::path> corpus_generate(const std::filesystem::path& outdir);

}  // namespace latkit
