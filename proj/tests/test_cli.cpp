#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include "aim/cli.hpp"
#include "aim/tables.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = aim::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

// minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF records
std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows(1);
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rows.back().push_back(field);
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      rows.back().push_back(field);
      field.clear();
      rows.emplace_back();
    } else {
      field += c;
    }
  }
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aim_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("solve prints the table-one energy") {
  const Outcome o = run({"solve", "--alpha", "4", "--lambda", "0.1", "--gamma", "0", "--r0", "3",
                         "--target-digits", "7", "--format", "json"});
  REQUIRE(o.code == aim::cli::exit_code::ok);
  const json j = json::parse(o.out);
  CHECK(j["energy"] == "3.5755521");
  CHECK(std::abs(std::stod(j["energy"].get<std::string>()) - 3.575552) <= 5e-7);
  CHECK(j["termination"] == "CONVERGED");
  CHECK(j["alpha"] == "4");
  CHECK(j["lambda"] == "0.1");
  CHECK(j["r0"] == "3");
  CHECK(j["backend"] == "jet");
  CHECK(j["wall_ms"].is_null());
  for (const char* key : {"gamma", "state", "iterations", "digits_used"}) CHECK(j.contains(key));
}

TEST_CASE("closed form") {
  const Outcome o = run({"solve", "--alpha", "2", "--lambda", "2", "--gamma", "0", "--format", "json"});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK(std::stod(j["energy"].get<std::string>()) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(j["backend"] == "closed-form");
}

TEST_CASE("usage errors exit 1") {
  CHECK(run({"solve", "--alpha", "0"}).code == aim::cli::exit_code::usage);
  CHECK(run({"solve", "--alpha", "x"}).code == 1);
  CHECK(run({"solve", "--lambda", "-1"}).code == 1);
  CHECK(run({"solve", "--format", "xml"}).code == 1);
  CHECK(run({"solve", "--gamma", "1", "--l", "2"}).code == 1);
  CHECK(run({"solve", "--no-such-flag"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"table", "7"}).code == 1);
  CHECK(run({"solve", "--target-digits", "30", "--start-digits", "20"}).code == 1);
  const Outcome o = run({"solve", "--alpha", "0"});
  CHECK(!o.err.empty());
}

TEST_CASE("numerical failure exits 2") {
  const Outcome o = run({"solve", "--alpha", "4", "--lambda", "0.1", "--max-n", "40", "--format", "json"});
  CHECK(o.code == aim::cli::exit_code::numeric);
  CHECK(json::parse(o.out)["termination"] == "MAX_ITER");
}

TEST_CASE("angular momentum and dimension") {
  const Outcome a = run({"solve", "--alpha", "1", "--lambda", "0", "--l", "1", "--dim", "3", "--format", "json"});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["gamma"] == "1");
  CHECK(std::stod(json::parse(a.out)["energy"].get<std::string>()) == doctest::Approx(5.0));
  const Outcome b = run({"solve", "--alpha", "1", "--lambda", "0", "--l", "0", "--dim", "4", "--format", "json"});
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["gamma"] == "0.5");
}

TEST_CASE("structured output is byte-identical across runs") {
  const std::vector<std::string> args{"sweep", "--alpha", "1", "--lambdas", "0.1,1,10", "--format", "csv"};
  const Outcome a = run(args);
  const Outcome b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const Outcome j1 = run({"solve", "--alpha", "3", "--lambda", "0.1", "--gamma", "2", "--format", "json"});
  const Outcome j2 = run({"solve", "--alpha", "3", "--lambda", "0.1", "--gamma", "2", "--format", "json"});
  CHECK(j1.out == j2.out);
}

TEST_CASE("csv round trip") {
  const Outcome o = run({"sweep", "--alpha", "1", "--lambdas", "0.1,1", "--format", "csv"});
  REQUIRE(o.code == 0);
  CHECK(o.out.find("\r\n") != std::string::npos);
  const auto rows = read_csv(o.out);
  REQUIRE(rows.size() == 3);
  const auto& head = rows[0];
  REQUIRE(head.size() == 11);
  CHECK(head[4] == "energy");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == head.size());
    // the JSON form of the same run carries the same fields
    const Outcome j = run({"solve", "--alpha", "1", "--lambda", rows[i][1], "--format", "json"});
    const json rec = json::parse(j.out);
    for (std::size_t c = 0; c < head.size(); ++c) {
      const json& v = rec[head[c]];
      const std::string as_text = v.is_string() ? v.get<std::string>() : (v.is_null() ? "" : v.dump());
      CHECK(as_text == rows[i][c]);
    }
  }
}

TEST_CASE("json lines parse and re-serialise losslessly") {
  const Outcome o = run({"sweep", "--alpha", "1", "--lambdas", "0.001,1000", "--target-digits", "12",
                         "--format", "json"});
  REQUIRE(o.code == 0);
  const auto ls = lines(o.out);
  REQUIRE(ls.size() == 2);
  for (const auto& l : ls) {
    const nlohmann::ordered_json j = nlohmann::ordered_json::parse(l);
    CHECK(j.dump() == l);
    CHECK(j["energy"].get<std::string>().size() > 12);
  }
}

TEST_CASE("config file and flag precedence") {
  const fs::path dir = scratch_dir("config");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# table one problem\nalpha = 4\nlambda = 0.1\ngamma = 0\nr0 = 3\nformat = json\n";
  const Outcome a = run({"--config", cfg.string(), "solve"});
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out)["energy"] == "3.5755521");
  const Outcome b = run({"--config", cfg.string(), "solve", "--r0", "4"});
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["r0"] == "4");
  std::ofstream(dir / "bad.cfg") << "alpha\n";
  CHECK(run({"--config", (dir / "bad.cfg").string(), "solve"}).code == 1);
  CHECK(run({"--config", (dir / "missing.cfg").string(), "solve"}).code == 1);
}

TEST_CASE("output file") {
  const fs::path dir = scratch_dir("out");
  const fs::path file = dir / "result.json";
  const Outcome o = run({"solve", "--alpha", "1", "--lambda", "1", "--format", "json", "--out", file.string()});
  REQUIRE(o.code == 0);
  CHECK(o.out.empty());
  std::ifstream in(file);
  const json j = json::parse(in);
  CHECK(j["energy"] == "4.0578770");
}

TEST_CASE("timing is opt-in") {
  const Outcome o = run({"solve", "--alpha", "1", "--lambda", "1", "--format", "json", "--timing"});
  REQUIRE(o.code == 0);
  CHECK(json::parse(o.out)["wall_ms"].is_number());
}

TEST_CASE("backend comparison") {
  const Outcome o = run({"solve", "--alpha", "1", "--lambda", "1", "--backend", "both", "--format", "json"});
  REQUIRE(o.code == 0);
  const auto ls = lines(o.out);
  REQUIRE(ls.size() == 2);
  const json a = json::parse(ls[0]);
  const json b = json::parse(ls[1]);
  CHECK(a["backend"] != b["backend"]);
  CHECK(a["energy"] == b["energy"]);
}

TEST_CASE("check against the oracles") {
  SUBCASE("soft coupling") {
    const Outcome o = run({"check", "--alpha", "1", "--lambda", "1", "--format", "json"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK(std::abs(j["aim_minus_fd"].get<double>()) < 1e-5);
    CHECK(std::abs(j["aim_minus_shoot"].get<double>()) < 1e-5);
    CHECK(j["status"] == "agree");
  }
  SUBCASE("unperturbed oscillator") {
    const Outcome o = run({"check", "--alpha", "1", "--lambda", "0", "--format", "json"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    CHECK(std::stod(j["aim"].get<std::string>()) == doctest::Approx(3.0));
    CHECK(std::stod(j["fd"].get<std::string>()) == doctest::Approx(3.0));
    CHECK(std::stod(j["shoot"].get<std::string>()) == doctest::Approx(3.0));
  }
  SUBCASE("small coupling reports first-order perturbation") {
    const Outcome o = run({"check", "--alpha", "1", "--lambda", "0.0001", "--target-digits", "10", "--format", "json"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    REQUIRE(j["perturbation"].is_string());
    CHECK(std::stod(j["perturbation"].get<std::string>()) == doctest::Approx(3.000112838).epsilon(1e-9));
  }
}

TEST_CASE("wavefn output") {
  SUBCASE("ground state peaks at r = 1") {
    const Outcome o = run({"wavefn", "--alpha", "1", "--lambda", "0", "--format", "json"});
    REQUIRE(o.code == 0);
    const json j = json::parse(o.out);
    const auto& s = j["samples"];
    REQUIRE(s.size() > 10);
    double best = -1, at = 0;
    for (const auto& p : s) {
      if (p[1].get<double>() > best) {
        best = p[1].get<double>();
        at = p[0].get<double>();
      }
    }
    CHECK(std::abs(at - 1.0) < 0.03);
    CHECK(j["nodes"] == 0);
  }
  SUBCASE("first excited state has its node near sqrt(3/2)") {
    const Outcome o = run({"wavefn", "--alpha", "1", "--lambda", "0", "--state", "1", "--format", "csv"});
    REQUIRE(o.code == 0);
    const auto rows = read_csv(o.out);
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == std::vector<std::string>{"r", "psi"});
    int changes = 0;
    for (std::size_t i = 2; i < rows.size(); ++i) {
      const double a = std::stod(rows[i - 1][1]), b = std::stod(rows[i][1]);
      if ((a > 0) != (b > 0) && std::abs(a) > 1e-9 && std::abs(b) > 1e-9) {
        ++changes;
        CHECK(std::stod(rows[i - 1][0]) <= std::sqrt(1.5));
        CHECK(std::stod(rows[i][0]) >= std::sqrt(1.5));
      }
    }
    CHECK(changes == 1);
  }
  SUBCASE("supersingular ground state is nodeless") {
    const Outcome o = run({"wavefn", "--alpha", "4", "--lambda", "0.1", "--points", "120", "--format", "json"});
    REQUIRE(o.code == 0);
    CHECK(json::parse(o.out)["nodes"] == 0);
  }
  SUBCASE("closed-form energies have no reconstruction") {
    CHECK(run({"wavefn", "--alpha", "2", "--lambda", "2"}).code == aim::cli::exit_code::numeric);
  }
}

TEST_CASE("table reproduction") {
  SUBCASE("single cell of table four") {
    const Outcome o = run({"table", "4", "--rows", "0.1,0", "--format", "json"});
    REQUIRE(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 1);
    const json j = json::parse(ls[0]);
    CHECK(j["reference"] == "3.575551992");
    CHECK(j["status"] == "pass");
  }
  SUBCASE("a wrong reference value is a mismatch") {
    const fs::path dir = scratch_dir("tables");
    for (const auto& e : fs::directory_iterator(aim::default_data_dir())) fs::copy(e.path(), dir / e.path().filename());
    std::ifstream in(dir / "table4.txt");
    std::stringstream buf;
    buf << in.rdbuf();
    in.close();
    std::string text = buf.str();
    const auto pos = text.find("3.575551992");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "3.575561992");
    std::ofstream(dir / "table4.txt") << text;
    const Outcome o = run({"table", "4", "--rows", "0.1,0", "--data-dir", dir.string()});
    CHECK(o.code == aim::cli::exit_code::mismatch);
  }
  SUBCASE("table three row") {
    const Outcome o = run({"table", "3", "--rows", "1", "--format", "csv"});
    REQUIRE(o.code == 0);
    const auto rows = read_csv(o.out);
    REQUIRE(rows.size() == 2);
  }
  SUBCASE("unknown selector") {
    CHECK(run({"table", "4", "--rows", "0.5,0"}).code == 1);
    CHECK(run({"table", "4", "--rows", "0.1"}).code == 1);
    CHECK(run({"table", "3", "--rows", "0.5"}).code == 1);
    CHECK(run({"table", "1", "--rows", "7"}).code == 1);
  }
}
