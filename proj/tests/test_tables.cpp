#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aim/error.hpp"
#include "aim/tables.hpp"

#include <filesystem>
#include <fstream>

using namespace aim;
namespace fs = std::filesystem;

TEST_CASE("reference file format") {
  const fs::path dir = fs::temp_directory_path() / "aim_tables_test";
  fs::create_directories(dir);
  const fs::path file = dir / "t.txt";
  std::ofstream(file) << "# comment\nalpha = 4\ncolumns = N a b\n\n15 1.5 Fails  # trailing\n20 2 Done\n";
  const RefTable t = load_reference(file);
  CHECK(t.get("alpha") == "4");
  CHECK(t.get_or("beta", "x") == "x");
  CHECK_THROWS_AS(t.get("beta"), ConfigurationError);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][2] == "Fails");
  CHECK(t.column("b") == 2);
  CHECK_THROWS_AS(t.column("c"), ConfigurationError);

  std::ofstream(file) << "columns = a b\n1 2 3\n";
  CHECK_THROWS_AS(load_reference(file), ConfigurationError);
  CHECK_THROWS_AS(load_reference(dir / "missing.txt"), ConfigurationError);
}

TEST_CASE("shipped tables load") {
  for (int i = 1; i <= 4; ++i) {
    const RefTable t = load_reference(default_data_dir() / ("table" + std::to_string(i) + ".txt"));
    CHECK(!t.rows.empty());
  }
  const RefTable t3 = load_reference(default_data_dir() / "table3.txt");
  CHECK(t3.rows.size() == 10);
  const RefTable t4 = load_reference(default_data_dir() / "table4.txt");
  CHECK(t4.rows.size() == 42);
}

TEST_CASE("significant-digit agreement") {
  PrecisionContext ctx(40);
  const Agreement a = agree_sig(make_real("3.5755519913"), "3.575551992", 9);
  CHECK(a.ok);
  CHECK(a.tolerance == doctest::Approx(5e-9));
  CHECK(!agree_sig(make_real("3.575552"), "3.575551992", 9).ok);
  CHECK(agree_sig(make_real("190.7233074397848"), "190.72330743978482539554", 15).ok);
  CHECK(agree_sig(make_real("190.72330743978482539554"), "190.72330743978482539554", 15).tolerance ==
        doctest::Approx(5e-13));
  CHECK(!agree_sig(std::numeric_limits<BigReal>::quiet_NaN(), "1", 3).ok);
  CHECK_THROWS_AS(agree_sig(BigReal(1), "1", 0), DomainError);
}

TEST_CASE("number formatting") {
  PrecisionContext ctx(40);
  CHECK(fixed(make_real("3.57555209"), 6) == "3.575552");
  CHECK(fixed(std::numeric_limits<BigReal>::quiet_NaN(), 6) == "nan");
  CHECK(compact(BigReal(3)) == "3");
  CHECK(compact(make_real("6.5")) == "6.5");
  CHECK(status_name(CellStatus::ExpectedFail) == "expected-fail");
}
