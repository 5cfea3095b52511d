#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "panelfe/csv.hpp"
#include "panelfe/errors.hpp"
#include "panelfe/panel.hpp"
#include "panelfe/spectral.hpp"

using namespace panelfe;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("panelfe_test_" + name);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

PanelData random_panel(int n, int t, int k, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  PanelData p;
  p.n_units = n;
  p.n_periods = t;
  p.y.resize(n, t);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < t; ++j) p.y(i, j) = dist(gen);
  for (int kk = 0; kk < k; ++kk) {
    Eigen::MatrixXd m(n, t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < t; ++j) m(i, j) = dist(gen);
    p.x.push_back(m);
  }
  for (int i = 0; i < n; ++i) p.unit_labels.push_back("u" + std::to_string(i + 1));
  for (int j = 0; j < t; ++j) p.time_labels.push_back(std::to_string(j + 1));
  return p;
}

}  // namespace

TEST_CASE("csv round trip is bit exact") {
  PanelData p = random_panel(7, 5, 2, 42);
  auto path1 = temp_file("roundtrip1.csv");
  auto path2 = temp_file("roundtrip2.csv");
  save_panel_csv(p, path1.string());
  PanelData q = load_panel_csv(path1.string(), 2);
  save_panel_csv(q, path2.string());
  CHECK(read_file(path1) == read_file(path2));
  CHECK(q.n_units == 7);
  CHECK(q.n_periods == 5);
  CHECK(q.y == p.y);
  CHECK(q.x[0] == p.x[0]);
  CHECK(q.x[1] == p.x[1]);
  CHECK(q.unit_labels == p.unit_labels);
  fs::remove(path1);
  fs::remove(path2);
}

TEST_CASE("row order does not change cell contents") {
  // same cells, rows shuffled: the loaded panels must agree cell-by-cell
  // through their label maps (unit row order may differ by design)
  std::string sorted =
      "unit_id,time_id,y,x1\n"
      "a,1,1,10\na,2,2,20\na,3,3,30\n"
      "b,1,4,40\nb,2,5,50\nb,3,6,60\n"
      "c,1,7,70\nc,2,8,80\nc,3,9,90\n";
  std::string shuffled =
      "unit_id,time_id,y,x1\n"
      "c,3,9,90\nb,1,4,40\na,2,2,20\n"
      "c,1,7,70\na,3,3,30\nb,3,6,60\n"
      "b,2,5,50\nc,2,8,80\na,1,1,10\n";
  auto p1 = temp_file("sorted.csv");
  auto p2 = temp_file("shuffled.csv");
  write_file(p1, sorted);
  write_file(p2, shuffled);
  PanelData a = load_panel_csv(p1.string(), 1);
  PanelData b = load_panel_csv(p2.string(), 1);
  REQUIRE(a.n_units == b.n_units);
  REQUIRE(a.n_periods == b.n_periods);
  CHECK(a.time_labels == b.time_labels);  // times are sorted, so identical
  for (int i = 0; i < a.n_units; ++i) {
    // find the row of b holding the same unit label
    int bi = -1;
    for (int j = 0; j < b.n_units; ++j)
      if (b.unit_labels[j] == a.unit_labels[i]) bi = j;
    REQUIRE(bi >= 0);
    CHECK(a.y.row(i) == b.y.row(bi));
    CHECK(a.x[0].row(i) == b.x[0].row(bi));
  }
  // first-appearance order of the shuffled file
  CHECK(b.unit_labels == std::vector<std::string>{"c", "b", "a"});
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("numeric time labels sort numerically") {
  std::string text =
      "unit_id,time_id,y,x1\n"
      "u,10,3,0\nu,2,2,0\nu,1,1,0\n";
  auto p = temp_file("numsort.csv");
  write_file(p, text);
  PanelData d = load_panel_csv(p.string(), 1);
  CHECK(d.time_labels == std::vector<std::string>{"1", "2", "10"});
  CHECK(d.y(0, 0) == 1.0);
  CHECK(d.y(0, 1) == 2.0);
  CHECK(d.y(0, 2) == 3.0);
  fs::remove(p);
}

TEST_CASE("missing cell raises BalanceError naming the pair") {
  std::string text =
      "unit_id,time_id,y,x1\n"
      "a,1,1,0\na,2,1,0\nb,1,1,0\n";
  auto p = temp_file("missing.csv");
  write_file(p, text);
  try {
    load_panel_csv(p.string(), 1);
    FAIL("expected BalanceError");
  } catch (const BalanceError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  fs::remove(p);
}

TEST_CASE("duplicate cell raises ParseError with the line number") {
  std::string text =
      "unit_id,time_id,y,x1\n"
      "a,1,1,0\na,1,2,0\n";
  auto p = temp_file("dup.csv");
  write_file(p, text);
  try {
    load_panel_csv(p.string(), 1);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  fs::remove(p);
}

TEST_CASE("non numeric value raises ParseError") {
  std::string text =
      "unit_id,time_id,y,x1\n"
      "a,1,abc,0\n";
  auto p = temp_file("nonnum.csv");
  write_file(p, text);
  CHECK_THROWS_AS(load_panel_csv(p.string(), 1), ParseError);
  fs::remove(p);
}

TEST_CASE("wrong header raises ParseError") {
  auto p = temp_file("hdr.csv");
  write_file(p, "id,time,y,x1\na,1,0,0\n");
  CHECK_THROWS_AS(load_panel_csv(p.string(), 1), ParseError);
  fs::remove(p);
}

TEST_CASE("missing file raises IoError") {
  CHECK_THROWS_AS(load_panel_csv("/nonexistent/panelfe/file.csv", 1), IoError);
}

TEST_CASE("subpanel and take_units copy the right cells") {
  PanelData p = random_panel(6, 4, 1, 3);
  PanelData s = p.subpanel(1, 4, 2, 4);
  CHECK(s.n_units == 3);
  CHECK(s.n_periods == 2);
  CHECK(s.y(0, 0) == p.y(1, 2));
  CHECK(s.x[0](2, 1) == p.x[0](3, 3));
  CHECK(s.unit_labels[0] == p.unit_labels[1]);

  PanelData t = p.take_units({5, 0, 0});
  CHECK(t.n_units == 3);
  CHECK(t.y.row(0) == p.y.row(5));
  CHECK(t.y.row(1) == p.y.row(0));
  CHECK(t.y.row(2) == p.y.row(0));
}

TEST_CASE("tail share matches a direct svd sum") {
  std::mt19937 gen(11);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(gen() % 7);
    int t = 2 + static_cast<int>(gen() % 7);
    Eigen::MatrixXd m(n, t);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < t; ++j) m(i, j) = dist(gen);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    for (int r = 0; r <= std::min(n, t); ++r) {
      double expect = 0;
      for (int l = r; l < sv.size(); ++l) expect += sv[l] * sv[l];
      expect /= static_cast<double>(n) * t;
      CHECK(singular_tail_share(m, r) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("tail share closed forms") {
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK(singular_tail_share(id, 1) == doctest::Approx(2.0 / 9.0));
  CHECK(singular_tail_share(id, 3) == doctest::Approx(0.0));

  Eigen::VectorXd u(4), v(3);
  u << 1, -2, 0.5, 3;
  v << 2, 1, -1;
  Eigen::MatrixXd rank1 = u * v.transpose();
  CHECK(singular_tail_share(rank1, 1) == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 2);
  CHECK(singular_tail_share(zero, 0) == doctest::Approx(0.0));

  CHECK(singular_tail_share(id, 4) == doctest::Approx(0.0));  // past the rank
  CHECK_THROWS_AS(singular_tail_share(id, -1), DomainError);
  CHECK_THROWS_AS(singular_tail_share(Eigen::MatrixXd(), 0), DomainError);
}

TEST_CASE("tail share decreases in r") {
  PanelData p = random_panel(10, 8, 0, 9);
  double prev = singular_tail_share(p.y, 0);
  for (int r = 1; r <= 8; ++r) {
    double cur = singular_tail_share(p.y, r);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }
}
