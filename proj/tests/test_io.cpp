#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "jpen/io.hpp"
#include "jpen/rng.hpp"
#include "support/random_mats.hpp"

using namespace jpen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  static const fs::path dir = [] {
    fs::path d("io_scratch");
    fs::create_directories(d);
    return d;
  }();
  return dir / name;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, -0.0, 2.0, 1e-300, 1e300, 0.245,
                   12345.678901234567, -1.5e-8}) {
    const std::string text = format_double(v);
    double back = 0.0;
    const auto res =
        std::from_chars(text.data(), text.data() + text.size(), back);
    REQUIRE(res.ec == std::errc{});
    REQUIRE(back == v);
  }
  REQUIRE(format_double(2.0) == "2");
}

TEST_CASE("atomic_write_text leaves no temp file behind") {
  const fs::path path = scratch("atomic.txt");
  atomic_write_text(path, "hello\n");
  REQUIRE(read_text(path) == "hello\n");
  REQUIRE_FALSE(fs::exists(path.string() + ".tmp"));
  atomic_write_text(path, "replaced\n");
  REQUIRE(read_text(path) == "replaced\n");
  REQUIRE_THROWS_AS(read_text(scratch("missing.txt")), ValidationError);
}

TEST_CASE("symmetric matrix CSV round-trips bitwise") {
  Rng rng(3);
  const SymMatrix m = testing::random_pd(7, rng);
  const fs::path path = scratch("matrix.csv");
  atomic_write_text(path, matrix_to_csv(m));
  const SymMatrix back = read_matrix_csv(path);
  REQUIRE(back.dim() == 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j <= i; ++j) REQUIRE(back(i, j) == m(i, j));
}

TEST_CASE("data CSV round-trips bitwise and honors headers") {
  Rng rng(5);
  Eigen::MatrixXd rows(6, 3);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 3; ++j) rows(i, j) = rng.normal();
  const fs::path path = scratch("data.csv");
  atomic_write_text(path, table_to_csv(rows));
  const DataMatrix back = read_data_csv(path);
  REQUIRE((back.rows().array() == rows.array()).all());

  atomic_write_text(path, "a,b,c\n" + table_to_csv(rows));
  const DataMatrix withhdr = read_data_csv(path, true);
  REQUIRE((withhdr.rows().array() == rows.array()).all());
}

TEST_CASE("parse errors carry line and column positions") {
  const fs::path ragged = scratch("ragged.csv");
  atomic_write_text(ragged, "1,2,3\n4,5\n");
  try {
    read_table(ragged);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    REQUIRE(what.find("line 2") != std::string::npos);
    REQUIRE(what.find("expected 3") != std::string::npos);
  }

  const fs::path garbage = scratch("garbage.csv");
  atomic_write_text(garbage, "1,2\n3,oops\n");
  try {
    read_table(garbage);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    REQUIRE(what.find("line 2") != std::string::npos);
    REQUIRE(what.find("column 2") != std::string::npos);
  }

  const fs::path empty = scratch("empty.csv");
  atomic_write_text(empty, "\n\n");
  REQUIRE_THROWS_AS(read_table(empty), ParseError);
}

TEST_CASE("CRLF and trailing newlines are tolerated") {
  const fs::path path = scratch("crlf.csv");
  atomic_write_text(path, "1,2\r\n3,4\r\n\r\n");
  const Eigen::MatrixXd m = read_table(path);
  REQUIRE(m.rows() == 2);
  REQUIRE(m(1, 1) == 4.0);
}

TEST_CASE("read_matrix_csv rejects bad shapes") {
  const fs::path rect = scratch("rect.csv");
  atomic_write_text(rect, "1,2,3\n4,5,6\n");
  REQUIRE_THROWS_AS(read_matrix_csv(rect), ParseError);

  const fs::path asym = scratch("asym.csv");
  atomic_write_text(asym, "1,0.5\n0.4,1\n");
  REQUIRE_THROWS_AS(read_matrix_csv(asym), ParseError);
}

TEST_CASE("read_labeled_csv splits features from labels") {
  const fs::path path = scratch("labeled.csv");
  atomic_write_text(path, "0.5,1.5,0\n-0.5,2.5,1\n0.1,0.2,0\n1,2,1\n");
  const LabeledData d = read_labeled_csv(path);
  REQUIRE(d.labels == std::vector<int>{0, 1, 0, 1});
  REQUIRE(d.x.p() == 2);
  REQUIRE(d.x.rows()(1, 1) == 2.5);

  // Explicit label column in the middle.
  atomic_write_text(path, "0.5,1,1.5\n-0.5,0,2.5\n0.1,1,0.2\n1,0,2\n");
  const LabeledData mid = read_labeled_csv(path, false, 1);
  REQUIRE(mid.labels == std::vector<int>{1, 0, 1, 0});
  REQUIRE(mid.x.rows()(0, 1) == 1.5);

  atomic_write_text(path, "0.5,2\n0.5,1\n0.4,0\n0.3,1\n");
  REQUIRE_THROWS_AS(read_labeled_csv(path), ParseError);
  atomic_write_text(path, "0.5\n0.4\n");
  REQUIRE_THROWS_AS(read_labeled_csv(path), ParseError);
  atomic_write_text(path, "0.5,1\n0.4,0\n");
  REQUIRE_THROWS_AS(read_labeled_csv(path, false, 5), ParameterError);
}

TEST_CASE("pattern CSV uses 0/1 cells") {
  SymPattern pat(3);
  pat.set(1, 0, true);
  REQUIRE(pattern_to_csv(pat) == "0,1,0\n1,0,0\n0,0,0\n");
}
