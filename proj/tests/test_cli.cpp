#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "latkit/cli.hpp"
#include "latkit/corpus.hpp"
#include "latkit/io.hpp"
#include "oracles.hpp"

using namespace latkit;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "latkit");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::filesystem::path& corpus_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "latkit_cli_corpus";
    std::filesystem::remove_all(d);
    corpus_generate(d);
    return d;
  }();
  return dir;
}

std::string lat(const std::string& file) { return (corpus_dir() / file).string(); }

}  // namespace

TEST_CASE("corpus files round-trip against the manifest") {
  std::ifstream in(corpus_dir() / "manifest.json");
  const json manifest = json::parse(in)["lattices"];
  CHECK(manifest.size() == corpus_entries().size());
  for (const auto& m : manifest) {
    const LatticeBasis b = read_lattice_file(corpus_dir() / m["file"].get<std::string>());
    const std::string det = m["det"];
    if (m["mode"] == "exact") {
      REQUIRE(b.is_exact());
      const Determinant d = determinant(b);
      REQUIRE(d.exact);
      CHECK(to_string(*d.exact) == det);
    } else {
      CHECK_FALSE(b.is_exact());
      const double want = parse_rational(det).get_d();
      CHECK(b.det() == doctest::Approx(want).epsilon(1e-12));
    }
  }
  const LatticeBasis z8 = read_lattice_file(lat("zn8.json"));
  CHECK(z8.exact_rows() == LatticeBasis::identity(8).exact_rows());
  const LatticeBasis i10 = read_lattice_file(lat("intro_t10.json"));
  CHECK(i10.exact_rows()(0, 0) == Rational(1, 10));
  CHECK(i10.exact_rows()(1, 1) == 100);
  const LatticeBasis f6 = read_lattice_file(lat("diagonal_n6.json"));
  for (int k = 2; k <= 6; ++k)
    CHECK(f6.rows()(k - 1, k - 1) ==
          doctest::Approx(std::pow(k - 1.0, (k - 1) / 2.0) / std::pow(k, k / 2.0)).epsilon(1e-15));
}

TEST_CASE("theta, enum and stable commands") {
  Result th = cli({"theta", "--lattice", lat("zn4.json"), "--s", "1", "--eps", "1e-9"});
  REQUIRE(th.code == 0);
  const double want = std::pow(oracle::theta_1d(1), 4);
  CHECK(th.doc()["lower"].get<double>() <= want);
  CHECK(th.doc()["upper"].get<double>() >= want);
  CHECK(want == doctest::Approx(std::pow(1.0864348, 4)).epsilon(1e-7));

  Result en = cli({"enum", "--lattice", lat("zn2.json"), "--radius", "1"});
  REQUIRE(en.code == 0);
  CHECK(en.doc()["count"] == 5);
  CHECK(en.doc()["points"].size() == 5);

  Result st = cli({"stable", "--lattice", lat("intro_t10.json")});
  REQUIRE(st.code == 0);
  CHECK(st.doc()["stable"] == false);
  CHECK(st.doc()["witness"]["det"].get<double>() == doctest::Approx(0.1));
  CHECK(st.doc()["witness"]["det_squared"] == "1/100");

  CHECK(cli({"stable", "--lattice", lat("hexagonal.json")}).doc()["stable"] == true);
}

TEST_CASE("verify command exit codes") {
  Result ok = cli({"verify", "--lattice", lat("zn4.json"), "--suite", "all", "--samples", "20000"});
  CHECK(ok.code == 0);
  CHECK(ok.doc()["passed"] == true);
  CHECK(ok.doc()["seed"] == 0);

  Result prem = cli({"verify", "--lattice", lat("intro_t10.json")});
  CHECK(prem.code == 1);
  CHECK(prem.doc()["premise_not_met"]["witness_det"].get<double>() == doctest::Approx(0.1));

  Result cov = cli({"verify", "--lattice", lat("diagonal_n6.json"), "--suite", "covering", "--samples", "20000"});
  CHECK(cov.code == 0);

  // premise holds after rescaling to determinant 1
  Result norm = cli({"verify", "--lattice", lat("diagonal_n3.json"), "--suite", "rm", "--normalize"});
  CHECK((norm.code == 0 || norm.code == 1));
  CHECK(cli({"verify", "--lattice", lat("diagonal_n3.json"), "--suite", "rm"}).code == 1);

  // a failing slicing check is conditional
  Result cond = cli({"verify", "--lattice", lat("zn2.json"), "--suite", "covering", "--L-n", "1e-6", "--samples",
                     "20000"});
  CHECK(cond.code == 0);
}

TEST_CASE("usage errors and malformed files") {
  const auto bad = std::filesystem::temp_directory_path() / "latkit_bad.json";
  {
    std::ofstream f(bad);
    f << "{\"basis\": [[1, 0],\n [0, ]]}";
  }
  Result r = cli({"theta", "--lattice", bad.string(), "--s", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find(":2:6:") != std::string::npos);

  CHECK(cli({"bogus"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"theta", "--lattice", lat("zn2.json"), "--s", "-1"}).code == 2);
  CHECK(cli({"theta", "--lattice", lat("zn2.json")}).code == 2);
  CHECK(cli({"random", "--n", "3"}).code == 2);
  CHECK(cli({"verify", "--lattice", lat("zn2.json"), "--suite", "nope"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("budget failures exit with 3") {
  Result r = cli({"filtration", "--lattice", lat("zn8.json"), "--budget", "1"});
  CHECK(r.code == 3);
  CHECK(r.doc()["certified"] == false);
  Result v = cli({"voronoi", "--lattice", lat("zn8.json")});
  CHECK(v.code == 3);
  CHECK(v.doc()["error"] == "dimension_cap");
}

TEST_CASE("identical invocations give identical bytes") {
  const std::vector<std::string> a = {"voronoi", "--lattice", lat("hexagonal.json"), "--samples", "20000"};
  CHECK(cli(a).out == cli(a).out);
  const std::vector<std::string> b = {"random", "--trials", "300", "--radius", "2", "--seed", "7"};
  Result r1 = cli(b);
  CHECK(r1.out == cli(b).out);
  CHECK(r1.doc()["seed"] == 7);
  CHECK(r1.doc()["samples"] == 300);
  const std::vector<std::string> c = {"verify", "--lattice", lat("zn3.json"), "--samples", "20000"};
  CHECK(cli(c).out == cli(c).out);
}

TEST_CASE("table view and output file") {
  Result t = cli({"verify", "--lattice", lat("zn2.json"), "--suite", "rm", "--format", "table"});
  CHECK(t.code == 0);
  CHECK(t.out.find("reverse_minkowski") != std::string::npos);
  CHECK(t.out.find("status") != std::string::npos);

  const auto path = std::filesystem::temp_directory_path() / "latkit_out.json";
  std::filesystem::remove(path);
  Result o = cli({"covering", "--lattice", lat("zn3.json"), "--output", path.string()});
  CHECK(o.code == 0);
  CHECK(o.out.empty());
  std::ifstream in(path);
  const json j = json::parse(in);
  CHECK(j["upper"].get<double>() == doctest::Approx(std::sqrt(3.0) / 2));
}
