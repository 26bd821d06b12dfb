#include "betarestrict/errors.hpp"
#include "betarestrict/io.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace betarestrict;
using nlohmann::json;

namespace {

io::CsvTable csv(const std::string& text) {
  std::istringstream in(text);
  return io::parse_csv(in);
}

MetricsTable tiny_table(bool with_benchmark) {
  MetricsTable t;
  t.coefficient_names = {"beta1", "beta2"};
  t.reference = VectorXd::Ones(2);
  t.reference_label = "true coefficients";
  t.completed = 2;
  t.failures.push_back({1, "boom"});
  for (Method m : {Method::BMLE, Method::BBIRE}) {
    if (m == Method::BBIRE && !with_benchmark) continue;
    EstimatorMetrics r;
    r.method = m;
    r.mean = (VectorXd(2) << 1.0123456, 0.9).finished();
    r.sd = (VectorXd(2) << 0.1, 0.2).finished();
    r.mse = (VectorXd(2) << 0.01, 0.04).finished();
    r.re = with_benchmark ? VectorXd::Ones(2) : VectorXd::Constant(2, std::numeric_limits<double>::quiet_NaN());
    r.tsre = with_benchmark ? 1.0 : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back(r);
  }
  return t;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("csv parsing") {
  SUBCASE("plain") {
    const auto t = csv("a,b\n1,2\n3,4\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][0] == "3");
  }
  SUBCASE("quotes, embedded separators and line breaks, CRLF") {
    const auto t = csv("name,\"value\"\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",2\r\n");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.header[1] == "value");
    CHECK(t.rows[0][0] == "x, y");
    CHECK(t.rows[0][1] == "say \"hi\"");
    CHECK(t.rows[1][0] == "multi\nline");
  }
  SUBCASE("no trailing newline, empty fields") {
    const auto t = csv("a,b,c\n1,,3");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1].empty());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(csv("a,b\n\"1,2\n"), DomainError);
    CHECK_THROWS_AS(csv("a,b\n1,2,3\n"), DomainError);
    CHECK_THROWS_AS(csv(""), DomainError);
  }
}

TEST_CASE("dataset from csv") {
  const auto t = csv("id,y,x1,x2\nA,0.2,1.5,2\nB,0.7,-1,0.5\nC,0.4,0.25,1e-3\n");
  SUBCASE("with intercept") {
    const Dataset d = io::dataset_from_csv(t, {"y", 4.0, true});
    CHECK(d.n() == 3);
    CHECK(d.p() == 3);
    CHECK(d.column_names == std::vector<std::string>{"intercept", "x1", "x2"});
    CHECK(d.X.col(0) == VectorXd::Ones(3));
    CHECK(d.X(2, 2) == 1e-3);
    CHECK(d.y[1] == 0.7);
    CHECK(d.gamma == 4.0);
  }
  SUBCASE("without intercept") {
    const Dataset d = io::dataset_from_csv(t, {"y", 4.0, false});
    CHECK(d.p() == 2);
    CHECK(d.column_names.front() == "x1");
  }
  SUBCASE("boundary responses are rescaled") {
    const Dataset d = io::dataset_from_csv(csv("y,x\n0,1\n1,2\n0.5,3\n0.25,4\n"), {"y", 2.0, false});
    CHECK(d.y[0] > 0.0);
    CHECK(d.y[1] < 1.0);
    CHECK(d.y[2] == 0.5);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(io::dataset_from_csv(t, {"z", 1.0, false}), DomainError);
    CHECK_THROWS_AS(io::dataset_from_csv(csv("y,x\n0.5,1\n0.4,abc\n"), {"y", 1.0, false}), DomainError);
    CHECK_THROWS_AS(io::dataset_from_csv(csv("y,x\n1.5,1\n"), {"y", 1.0, false}), DomainError);
    CHECK_THROWS_AS(io::dataset_from_csv(csv("y,x\nfoo,1\n"), {"y", 1.0, false}), DomainError);
    CHECK_THROWS_AS(io::dataset_from_csv(csv("y,x\n"), {"y", 1.0, false}), DomainError);
    CHECK_THROWS_AS(io::read_csv_file("/nonexistent/file.csv"), DomainError);
  }
}

TEST_CASE("constraints from json") {
  const json doc = json::parse(R"({"rows": [{"coeffs": [1, 0, 0], "op": "le", "bound": 1.5},
                                            {"coeffs": [0, 1, -1], "op": ">=", "bound": 0}]})");
  const ConstraintSet cs = io::constraints_from_json(doc, 3);
  CHECK(cs.q() == 2);
  CHECK(cs.H().row(1) == (Eigen::RowVectorXd(3) << 0, -1, 1).finished());
  CHECK(cs.G()[0] == 1.5);

  const json array = json::parse(R"([{"coeffs": [1, 0], "op": "ge", "bound": 0}])");
  const ConstraintSet padded = io::constraints_from_json(array, 3, true);
  CHECK(padded.H().row(0) == (Eigen::RowVectorXd(3) << 0, -1, 0).finished());
  CHECK_THROWS_AS(io::constraints_from_json(array, 3, false), ShapeError);
  CHECK_THROWS_AS(io::constraints_from_json(json::parse(R"([{"coeffs": [1, 0, 0], "op": "lt", "bound": 0}])"), 3),
                  InvalidConstraintError);
  CHECK_THROWS_AS(io::constraints_from_json(json::parse(R"([{"coeffs": [1, 0, 0], "op": "le"}])"), 3),
                  InvalidConstraintError);
  CHECK_THROWS_AS(io::constraints_from_json(json::parse(R"([{"coeffs": [0, 0, 0], "op": "le", "bound": 1}])"), 3),
                  InvalidConstraintError);
  CHECK_THROWS_AS(io::constraints_from_json(json::parse(R"({"other": 1})"), 3), InvalidConstraintError);
  CHECK_THROWS_AS(io::read_constraints_file("/nonexistent/c.json", 3), DomainError);
}

TEST_CASE("number formatting") {
  CHECK(io::format_full(0.1) == "0.10000000000000001");
  CHECK(std::stod(io::format_full(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(io::format_display(1.23456) == "1.2346");
  CHECK(io::format_display(-0.00004) == "-0.0000");
  CHECK(io::format_full(std::nan("")) == "NA");
  CHECK(io::format_display(std::nan("")) == "NA");
}

TEST_CASE("fit document") {
  FitResult f;
  f.method = Method::BBIRE;
  f.estimates = (VectorXd(2) << 0.5, -1.0).finished();
  f.sd = (VectorXd(2) << 0.1, 0.2).finished();
  f.diagnostics.acceptance_rate = 0.4;
  f.diagnostics.warnings = {"w"};
  const json j = io::fit_to_json(f, {"a", "b"});
  CHECK(j.at("method") == "BBIRE");
  CHECK(j.at("coefficients") == json::array({"a", "b"}));
  CHECK(j.at("estimates")[1].get<double>() == -1.0);
  CHECK(j.at("sd")[0].get<double>() == 0.1);
  CHECK(j.at("diagnostics").at("acceptance_rate").get<double>() == 0.4);
  CHECK(j.at("diagnostics").at("warnings").size() == 1);
}

TEST_CASE("metrics csv") {
  const json manifest = {{"command", "simulate"}, {"seed", 7}};
  std::ostringstream out;
  io::write_metrics_csv(out, tiny_table(true), manifest);
  const auto ls = lines(out.str());
  REQUIRE(ls.size() >= 8);
  CHECK(ls[0].rfind("# manifest: ", 0) == 0);
  CHECK(json::parse(ls[0].substr(12)) == manifest);
  // comment lines, then header and one row per estimator x coefficient
  std::size_t k = 0;
  while (ls[k].rfind("#", 0) == 0) ++k;
  CHECK(ls[k] == "estimator,coefficient,estimate,sd,mse,re");
  CHECK(ls.size() - k - 1 == 4);
  CHECK(ls[k + 1].rfind("BMLE,beta1,1.0123456", 0) == 0);
  CHECK(out.str().find("failed: 1") != std::string::npos);

  std::ostringstream nan_out;
  io::write_metrics_csv(nan_out, tiny_table(false), manifest);
  CHECK(lines(nan_out.str()).back().ends_with(",NA"));

  std::ostringstream ts;
  io::write_tsre_csv(ts, tiny_table(true), manifest);
  const auto tl = lines(ts.str());
  CHECK(std::find(tl.begin(), tl.end(), "estimator,tsre") != tl.end());
  CHECK(tl.back() == "BBIRE,1");
}

TEST_CASE("markdown tables") {
  const json manifest = {{"command", "simulate"}};
  std::ostringstream md;
  io::write_metrics_markdown(md, tiny_table(true), manifest, "Scenario A");
  const std::string s = md.str();
  CHECK(s.rfind("<!-- manifest: ", 0) == 0);
  CHECK(s.find("## Scenario A") != std::string::npos);
  CHECK(s.find("| Parameter | Estimator | Estimates | SD | MSE | RE |") != std::string::npos);
  CHECK(s.find("1.0123") != std::string::npos);
  CHECK(s.find("TSRE") != std::string::npos);

  std::ostringstream boot;
  io::write_bootstrap_markdown(boot, tiny_table(true), manifest, "Bootstrap");
  CHECK(boot.str().find("BMLE Estimates") != std::string::npos);
  CHECK(boot.str().find("TSRE") != std::string::npos);
}
