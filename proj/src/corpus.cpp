#include "latkit/corpus.hpp"

#include <gmpxx.h>

#include <cmath>
#include <fstream>

#include "latkit/errors.hpp"
#include "latkit/io.hpp"

namespace latkit {

namespace {

using nlohmann::json;

constexpr int kDigits = 40;
constexpr mp_bitcnt_t kBits = 256;

std::string decimal(const mpf_class& x) {
  if (x == 0) return "0";
  mp_exp_t exp = 0;
  char* raw = mpf_get_str(nullptr, &exp, 10, kDigits, x.get_mpf_t());
  std::string digits(raw);
  void (*freefunc)(void*, size_t);
  mp_get_memory_functions(nullptr, nullptr, &freefunc);
  freefunc(raw, std::char_traits<char>::length(raw) + 1);
  std::string sign;
  if (digits[0] == '-') {
    sign = "-";
    digits.erase(0, 1);
  }
  if (exp <= 0) return sign + "0." + std::string(static_cast<std::size_t>(-exp), '0') + digits;
  if (static_cast<std::size_t>(exp) >= digits.size())
    return sign + digits + std::string(static_cast<std::size_t>(exp) - digits.size(), '0');
  return sign + digits.substr(0, static_cast<std::size_t>(exp)) + "." + digits.substr(static_cast<std::size_t>(exp));
}

mpf_class msqrt(const mpq_class& q) {
  mpf_class v(q, kBits), r(0, kBits);
  mpf_sqrt(r.get_mpf_t(), v.get_mpf_t());
  return r;
}

json exact_doc(const std::string& name, const RatMatrix& m) { return lattice_to_json(LatticeBasis(m, name)); }

json decimal_doc(const std::string& name, const std::vector<std::vector<mpf_class>>& rows) {
  json b = json::array();
  for (const auto& r : rows) {
    json jr = json::array();
    for (const auto& v : r) {
      if (v == 0) {
        jr.push_back(0);
      } else {
        jr.push_back(decimal(v));
      }
    }
    b.push_back(jr);
  }
  return {{"name", name}, {"ambient_dim", rows.empty() ? 0 : rows[0].size()}, {"basis", b}};
}

std::vector<std::vector<mpf_class>> zeros(std::size_t n) {
  return std::vector<std::vector<mpf_class>>(n, std::vector<mpf_class>(n, mpf_class(0, kBits)));
}

std::vector<std::vector<mpf_class>> hexagonal_rows() {
  // side a with a^2 sqrt(3)/2 = 1
  const mpf_class s3 = msqrt(mpq_class(3));
  mpf_class a(0, kBits), v(2 / s3, kBits);
  mpf_sqrt(a.get_mpf_t(), v.get_mpf_t());
  auto r = zeros(2);
  r[0][0] = a;
  r[1][0] = a / 2;
  r[1][1] = a * s3 / 2;
  return r;
}

// Rotation from the unit quaternion (1, sqrt 2, sqrt 3, sqrt 5) / sqrt 11.
std::vector<std::vector<mpf_class>> rotation_rows() {
  auto p = [](int k) -> mpf_class { return msqrt(mpq_class(k)) / 11; };  // sqrt(k)/11
  const mpf_class xy = p(6), zw = p(5), xz = p(10), yw = p(3), yz = p(15), xw = p(2);
  auto r = zeros(3);
  r[0] = {mpf_class(1 - 2 * mpq_class(8, 11), kBits), 2 * (xy - zw), 2 * (xz + yw)};
  r[1] = {2 * (xy + zw), mpf_class(1 - 2 * mpq_class(7, 11), kBits), 2 * (yz - xw)};
  r[2] = {2 * (xz - yw), 2 * (yz + xw), mpf_class(1 - 2 * mpq_class(5, 11), kBits)};
  return r;
}

std::vector<std::vector<mpf_class>> block_sum(const std::vector<std::vector<mpf_class>>& a,
                                              const std::vector<std::vector<mpf_class>>& b) {
  const std::size_t n = a.size() + b.size();
  auto r = zeros(n);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) r[i][j] = a[i][j];
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[a.size() + i][a.size() + j] = b[i][j];
  return r;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LatticeBasis CorpusEntry::basis() const { return parse_lattice_json(document.dump()); }

std::vector<CorpusEntry> corpus_entries() {
  std::vector<CorpusEntry> out;
  auto add_exact = [&](std::string file, std::string name, RatMatrix m, std::string desc, bool stable) {
    CorpusEntry e;
    e.file = std::move(file);
    e.document = exact_doc(name, m);
    e.description = std::move(desc);
    e.stable = stable;
    const Determinant d = determinant(LatticeBasis(m));
    e.det_text = d.exact ? to_string(*d.exact) : fmt17(d.value);
    e.det = d.value;
    out.push_back(std::move(e));
  };
  auto add_decimal = [&](std::string file, std::string name, const std::vector<std::vector<mpf_class>>& rows,
                         std::string desc, bool stable, const mpf_class& det) {
    CorpusEntry e;
    e.file = std::move(file);
    e.document = decimal_doc(name, rows);
    e.description = std::move(desc);
    e.stable = stable;
    e.exact = false;
    e.det_text = decimal(det);
    e.det = det.get_d();
    out.push_back(std::move(e));
  };

  for (int n : {1, 2, 3, 4, 6, 8}) {
    RatMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    add_exact("zn" + std::to_string(n) + ".json", "Z^" + std::to_string(n), m, "integer lattice", true);
  }
  const mpf_class one(1, kBits);
  add_decimal("rotated_z3.json", "rotated Z^3", rotation_rows(), "Z^3 under an irrational rotation", true, one);
  add_decimal("hexagonal.json", "hexagonal", hexagonal_rows(), "hexagonal lattice scaled to determinant 1", true, one);
  add_decimal("sum_hex_z1.json", "hexagonal + Z", block_sum(hexagonal_rows(), {{one}}), "direct sum", true, one);
  add_decimal("sum_hex_hex.json", "hexagonal + hexagonal", block_sum(hexagonal_rows(), hexagonal_rows()),
              "direct sum", true, one);
  add_decimal("sum_rotz3_hex.json", "rotated Z^3 + hexagonal", block_sum(rotation_rows(), hexagonal_rows()),
              "direct sum", true, one);

  for (int n = 2; n <= 6; ++n) {
    // d_1 = 1, d_k = (k-1)^{(k-1)/2} / k^{k/2}; det = n^{-n/2}
    auto r = zeros(n);
    r[0][0] = one;
    for (int k = 2; k <= n; ++k) {
      mpz_class num, den;
      mpz_ui_pow_ui(num.get_mpz_t(), k - 1, k - 1);
      mpz_ui_pow_ui(den.get_mpz_t(), k, k);
      r[k - 1][k - 1] = msqrt(mpq_class(num, den));
    }
    mpz_class dd;
    mpz_ui_pow_ui(dd.get_mpz_t(), n, n);
    add_decimal("diagonal_n" + std::to_string(n) + ".json", "diagonal n=" + std::to_string(n), r,
                "diagonal d_k = (k-1)^{(k-1)/2}/k^{k/2}, covering radius sqrt(log n/(4e)) + o(1)", false,
                one / msqrt(mpq_class(dd)));
  }

  for (int t : {2, 10}) {
    RatMatrix m(2, 2);
    m(0, 0) = Rational(1, t);
    m(1, 1) = Rational(t * t);
    add_exact("intro_t" + std::to_string(t) + ".json", "intro t=" + std::to_string(t), m,
              "rows (1/t, 0), (0, t^2): a short vector beside a long one", false);
  }
  {
    RatMatrix m(2, 2);
    m(0, 0) = Rational(1, 2);
    m(1, 1) = 2;
    add_exact("half_two.json", "(1/2)Z + 2Z", m, "determinant 1 but not stable", false);
  }
  return out;
}

std::vector<std::filesystem::path> corpus_generate(const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw LatkitError("cannot create " + outdir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  json manifest = json::array();
  for (const CorpusEntry& e : corpus_entries()) {
    const auto path = outdir / e.file;
    std::ofstream out(path);
    if (!out) throw LatkitError("cannot write " + path.string());
    out << e.document.dump(2) << "\n";
    if (!out) throw LatkitError("write failed for " + path.string());
    written.push_back(path);
    manifest.push_back({{"file", e.file},
                        {"name", e.document["name"]},
                        {"dim", e.document["ambient_dim"]},
                        {"mode", e.exact ? "exact" : "decimal"},
                        {"det", e.det_text},
                        {"stable", e.stable},
                        {"description", e.description}});
  }
  const auto mpath = outdir / "manifest.json";
  std::ofstream m(mpath);
  if (!m) throw LatkitError("cannot write " + mpath.string());
  m << json{{"lattices", manifest}}.dump(2) << "\n";
  written.push_back(mpath);
  return written;
}

}  // namespace latkit
