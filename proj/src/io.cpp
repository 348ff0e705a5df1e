#include "latkit/io.hpp"

#include <fstream>
#include <sstream>

namespace latkit {

namespace {

using nlohmann::json;

struct Entry {
  Rational exact;
  double value = 0;
  bool is_exact = true;
};

Entry parse_entry(const json& v, std::size_t i, std::size_t j) {
  auto where = "basis[" + std::to_string(i) + "][" + std::to_string(j) + "]";
  Entry e;
  if (v.is_number_integer()) {
    e.exact = v.is_number_unsigned() ? Rational(Integer(std::to_string(v.get<std::uint64_t>())))
                                     : Rational(Integer(std::to_string(v.get<std::int64_t>())));
    e.value = e.exact.get_d();
  } else if (v.is_number_float()) {
    e.value = v.get<double>();
    e.is_exact = false;
  } else if (v.is_string()) {
    const auto s = v.get<std::string>();
    try {
      e.exact = parse_rational(s);
    } catch (const InvalidInput& err) {
      throw LatticeFormatError(where + ": " + err.what());
    }
    e.value = e.exact.get_d();
    if (s.find_first_of(".eE") != std::string::npos) e.is_exact = false;
  } else {
    throw LatticeFormatError(where + ": entry must be a number or a \"p/q\" string");
  }
  return e;
}

}  // namespace

LatticeBasis parse_lattice_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(err.byte == 0 ? 0 : err.byte - 1, text.size());
    for (std::size_t k = 0; k < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw LatticeFormatError("malformed JSON at line " + std::to_string(line) + ", column " +
                                 std::to_string(column) + ": " + err.what(),
                             line, column);
  }
  if (!doc.is_object() || !doc.contains("basis") || !doc["basis"].is_array()) {
    throw LatticeFormatError("lattice file needs an object with a \"basis\" array");
  }
  const json& rows = doc["basis"];
  if (rows.empty()) throw LatticeFormatError("basis has no rows");
  std::size_t width = 0;
  std::vector<std::vector<Entry>> entries;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array()) throw LatticeFormatError("basis[" + std::to_string(i) + "] is not an array");
    if (i == 0) width = rows[i].size();
    if (rows[i].size() != width) throw LatticeFormatError("basis rows have different lengths");
    std::vector<Entry> r;
    for (std::size_t j = 0; j < rows[i].size(); ++j) r.push_back(parse_entry(rows[i][j], i, j));
    entries.push_back(std::move(r));
  }
  if (doc.contains("ambient_dim")) {
    if (!doc["ambient_dim"].is_number_integer() || doc["ambient_dim"].get<long>() != static_cast<long>(width)) {
      throw LatticeFormatError("ambient_dim does not match the row length");
    }
  }
  std::string name = doc.value("name", std::string());
  bool exact = true;
  for (const auto& r : entries)
    for (const auto& e : r) exact = exact && e.is_exact;
  if (exact) {
    RatMatrix m(entries.size(), width);
    for (std::size_t i = 0; i < entries.size(); ++i)
      for (std::size_t j = 0; j < width; ++j) m(i, j) = entries[i][j].exact;
    return LatticeBasis(std::move(m), name);
  }
  RealMatrix m(entries.size(), width);
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) m(i, j) = entries[i][j].value;
  return LatticeBasis(std::move(m), name);
}

LatticeBasis read_lattice_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open lattice file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_lattice_json(ss.str());
}

nlohmann::json lattice_to_json(const LatticeBasis& basis) {
  json rows = json::array();
  for (std::size_t i = 0; i < basis.rank(); ++i) {
    json r = json::array();
    for (std::size_t j = 0; j < basis.ambient_dim(); ++j) {
      if (basis.is_exact()) {
        const Rational& q = basis.exact_rows()(i, j);
        if (q.get_den() == 1 && q.get_num().fits_slong_p()) {
          r.push_back(q.get_num().get_si());
        } else {
          r.push_back(to_string(q));
        }
      } else {
        r.push_back(basis.rows()(i, j));
      }
    }
    rows.push_back(std::move(r));
  }
  return json{{"name", basis.name()}, {"ambient_dim", basis.ambient_dim()}, {"basis", rows}};
}

void write_lattice_file(const std::filesystem::path& path, const LatticeBasis& basis) {
  std::ofstream out(path);
  if (!out) throw LatkitError("cannot write " + path.string());
  out << lattice_to_json(basis).dump(2) << "\n";
}

}  // namespace latkit
