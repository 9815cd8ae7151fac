#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "roundcount/cli.hpp"
#include "roundcount/table.hpp"

using namespace roundcount;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

CsvDocument parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

std::string config_value(const CsvDocument& doc, const std::string& key) {
  for (const auto& [k, v] : doc.config)
    if (k == key) return v;
  return "<missing>";
}

}  // namespace

TEST_CASE("reals survive a CSV round trip bit for bit") {
  const double values[] = {0.1, 1.0 / 3.0, 2.0, -0.0, 1e-310, 6.02214076e23, std::nextafter(1.0, 2.0),
                           std::numeric_limits<double>::max(), std::numeric_limits<double>::denorm_min()};
  Table t;
  t.columns = {"x", "label"};
  for (double v : values) t.add_row({v, std::string("a,\"b\"")});
  std::ostringstream out;
  write_csv(t, out);
  const CsvDocument doc = parse(out.str());
  REQUIRE(doc.rows.size() == std::size(values));
  for (std::size_t i = 0; i < std::size(values); ++i) {
    const double back = parse_real(doc.rows[i][0]);
    CHECK(std::memcmp(&back, &values[i], sizeof back) == 0);
    CHECK(doc.rows[i][1] == "a,\"b\"");
  }
  CHECK(std::isnan(parse_real(format_real(std::nan("")))));
  CHECK_THROWS(parse_real("1.5x"));
  CHECK_THROWS(parse_int("12.0"));
  CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("config lines precede the header") {
  Table t;
  t.config = {{"seed", "9"}, {"n", "1,3"}};
  t.columns = {"u"};
  t.add_row({std::int64_t{3}});
  std::ostringstream out;
  write_csv(t, out);
  CHECK(out.str() == "# seed=9\n# n=1,3\nu\n3\n");
  const CsvDocument doc = parse(out.str());
  CHECK(config_value(doc, "n") == "1,3");
}

TEST_CASE("cli pmf emits two columns for a single n") {
  const Run r = run({"pmf", "--dist", "poisson", "--theta", "2", "--n", "3"});
  REQUIRE(r.code == 0);
  const CsvDocument doc = parse(r.out);
  CHECK(doc.columns == std::vector<std::string>{"u", "prob"});
  CHECK(parse_real(doc.rows[0][1]) == doctest::Approx(3 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(config_value(doc, "tie") == "half-up");
  CHECK(config_value(doc, "theta") == "2");
}

TEST_CASE("cli moments at theta 0.1, n 2") {
  const Run r = run({"moments", "--theta", "0.1", "--n", "2"});
  REQUIRE(r.code == 0);
  const CsvDocument doc = parse(r.out);
  bool seen = false;
  for (const auto& row : doc.rows)
    if (row[0] == "closed") {
      seen = true;
      CHECK(parse_real(row[1]) == doctest::Approx(0.19063462346).epsilon(1e-10));
    }
  CHECK(seen);
}

TEST_CASE("cli mse-ratio at n 1 is identically one") {
  const Run r = run({"mse-ratio", "--dist", "poisson", "--n", "1"});
  REQUIRE(r.code == 0);
  const CsvDocument doc = parse(r.out);
  const std::size_t psi = doc.column("psi");
  REQUIRE(!doc.rows.empty());
  for (const auto& row : doc.rows) CHECK(row[psi] == "1");
}

TEST_CASE("cli exit codes") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"nonsense"}).code == cli::kExitUsage);
  CHECK(run({"pmf", "--bogus", "1"}).code == cli::kExitUsage);
  CHECK(run({"pmf", "--theta", "-3"}).code == cli::kExitUsage);
  CHECK(run({"pmf", "--preset", "fig4"}).code == cli::kExitUsage);
  CHECK(run({"mle", "--u", "3", "--n", "2"}).code == cli::kExitUsage);
  CHECK(run({"true-significance", "--phi0", "0"}).code == cli::kExitUsage);
  CHECK(run({"pmf", "--help"}).code == cli::kExitOk);
  const Run numerical = run({"moments", "--theta", "3", "--n", "100000"});
  CHECK(numerical.code == cli::kExitNumerical);
  const auto line = nlohmann::json::parse(numerical.err);
  CHECK(line["kind"] == "numerical");
  CHECK(line["exit_code"] == 1);
  const auto usage = nlohmann::json::parse(run({"pmf", "--bogus"}).err);
  CHECK(usage["kind"] == "usage");
}

TEST_CASE("cli json output parses") {
  const Run r = run({"excess-deaths", "--n1", "7", "--n2", "14", "--theta", "10", "--beta", "2", "--u1", "7",
                     "--u2", "28", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["config"]["n2"] == "14");
  bool seen = false;
  for (const auto& row : doc["rows"])
    if (row["quantity"] == "xi") {
      seen = true;
      CHECK(row["value"].get<double>() == 14.0);
    }
  CHECK(seen);
}

TEST_CASE("cli writes --out files and repeats byte for byte") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = (dir / "roundcount_cli_a.csv").string();
  const auto b = (dir / "roundcount_cli_b.csv").string();
  const std::vector<std::string> base{"mse-sim", "--param", "0.5,2", "--n", "2,5", "--reps", "2000", "--seed", "31"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--out", a});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--out", b, "--workers", "3"});
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  std::ifstream fa(a, std::ios::binary);
  std::ifstream fb(b, std::ios::binary);
  std::stringstream ca;
  std::stringstream cb;
  ca << fa.rdbuf();
  cb << fb.rdbuf();
  CHECK(!ca.str().empty());
  CHECK(ca.str() == cb.str());
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("cli seed comes from the environment when not given") {
  ::setenv(cli::kSeedEnv, "123", 1);
  const Run env_run = run({"mse-sim", "--param", "1", "--n", "2", "--reps", "100"});
  ::unsetenv(cli::kSeedEnv);
  const Run flag_run = run({"mse-sim", "--param", "1", "--n", "2", "--reps", "100", "--seed", "123"});
  REQUIRE(env_run.code == 0);
  CHECK(config_value(parse(env_run.out), "seed") == "123");
  CHECK(env_run.out == flag_run.out);
  ::setenv(cli::kSeedEnv, "not-a-number", 1);
  CHECK(run({"mse-sim", "--param", "1", "--n", "2", "--reps", "10"}).code == cli::kExitUsage);
  ::unsetenv(cli::kSeedEnv);
}

TEST_CASE("cli subcommands all produce tables") {
  const std::vector<std::vector<std::string>> invocations = {
      {"pgf-check", "--dist", "binomial", "--trials", "12", "--phi", "0.3", "--n", "4", "--points", "10"},
      {"mle", "--dist", "negbinomial", "--size", "3", "--u", "0,4,8", "--n", "4"},
      {"mse-exact", "--param", "0.5,1", "--n", "2,3", "--estimator", "U,closed-mle,numeric-mle"},
      {"binned-test", "--u", "7750", "--m", "500", "--n", "31", "--phi0", "0.5"},
      {"true-significance", "--mode", "exact-y,binned-u", "--alpha", "0.05,0.1"},
  };
  for (const auto& args : invocations) {
    CAPTURE(args[0]);
    const Run r = run(args);
    CHECK(r.code == 0);
    CHECK(!parse(r.out).rows.empty());
  }
  const Run pgf = run({"pgf-check", "--theta", "4", "--n", "5"});
  const CsvDocument doc = parse(pgf.out);
  for (const auto& row : doc.rows) CHECK(parse_real(row[doc.column("abs_diff")]) < 1e-10);
}
