#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>

#include "lnafim/errors.hpp"
#include "support.hpp"

using namespace lnafim;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.123}) CHECK(std::stod(io::format_double(v)) == v);
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(io::format_double(std::nan("")) == "nan");
  CHECK(io::number(2.0).is_number());
  CHECK(io::number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("sha256 known vectors") {
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("parameter files") {
  const ReactionNetwork net = parse_model(test::kBirthDeathText);
  const Vector th = io::parse_params(R"({"gamma": 0.5, "k": 3})", net);
  CHECK(th[0] == 3.0);
  CHECK(th[1] == 0.5);
  CHECK(contains(error_of([&] { io::parse_params(R"({"k": 1})", net); }), "missing parameter 'gamma'"));
  CHECK(contains(error_of([&] { io::parse_params(R"({"k": 1, "gamma": 1, "x": 2})", net); }), "'x'"));
  CHECK(contains(error_of([&] { io::parse_params(R"({"k": "1", "gamma": 1})", net); }), "'k'"));
  CHECK(contains(error_of([&] { io::parse_params("{", net); }), "invalid JSON"));
}

TEST_CASE("design files") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  const ObservationDesign d = io::parse_design(
      R"({"regime": "TS", "n": 3, "delta": 0.5, "observed": ["p"],
          "init": {"mode": "stationary", "mean_scale": 5, "var_scale": 25}})", net, "x");
  CHECK(d.times == std::vector<double>{0.5, 1.0, 1.5});
  CHECK(d.observed == std::vector<int>{1});
  CHECK(d.init.mean_scale == 5.0);
  CHECK(d.init.var_scale == 25.0);
  CHECK(d.name == "x");

  const ObservationDesign e = io::parse_design(
      R"({"regime": "DT", "times": [1, 2], "observed": ["r", "p"], "sigma_eps2": 2,
          "init": {"mode": "explicit", "phi0": [1, 2], "V0": [[1, 0.5], [0.5, 2]]}})", net, "y");
  CHECK(e.regime == Regime::DT);
  CHECK(e.init.mode == InitialCondition::Mode::Explicit);
  CHECK(e.init.V0(0, 1) == 0.5);

  CHECK(contains(error_of([&] {
                   io::parse_design(R"({"regime": "TS", "times": [1], "observed": ["p"], "bogus": 1})", net, "bad2");
                 }),
                 "design 'bad2': unknown key 'bogus'"));
  CHECK(contains(error_of([&] { io::parse_design(R"({"regime": "XX", "times": [1], "observed": ["p"]})", net, "d"); }),
                 "'regime'"));
  CHECK(contains(error_of([&] { io::parse_design(R"({"regime": "TS", "times": [1], "observed": ["q"]})", net, "d"); }),
                 "unknown species 'q'"));
  CHECK(contains(error_of([&] { io::parse_design(R"({"regime": "TS", "observed": ["p"]})", net, "d"); }),
                 "'times'"));
  CHECK(contains(error_of([&] {
                   io::parse_design(R"({"regime": "TS", "times": [1], "observed": ["p"],
                     "init": {"mode": "explicit", "phi0": [1, 2], "V0": [[1, 0], [1, 1]]}})", net, "d");
                 }),
                 "symmetric"));
  CHECK(contains(error_of([&] { io::parse_design(R"({"regime": "DT", "times": [1], "observed": ["p"]})", net, "d"); }),
                 "sigma"));
}

TEST_CASE("sweep files") {
  const ReactionNetwork net = parse_model(test::kGeneText);
  const SweepSpec s = io::parse_sweep(
      R"({"design": {"regime": "TS", "observed": ["p"]}, "n": 7,
          "delta_grid": {"from": 0.1, "to": 10, "count": 3}, "criteria": ["log_det", "min_eigenvalue"]})", net);
  CHECK(s.n == 7);
  REQUIRE(s.deltas.size() == 3);
  CHECK(s.deltas[1] == doctest::Approx(1.0));
  CHECK(s.criteria.size() == 2);
  CHECK(contains(error_of([&] {
                   io::parse_sweep(R"({"design": {"regime": "TS", "observed": ["p"]}, "n": 7,
                     "delta_grid": {"from": 0.1, "to": 10, "count": 0}})", net);
                 }),
                 "delta grid is empty"));
  CHECK(!error_of([&] {
           io::parse_sweep(R"({"design": {"regime": "TS", "observed": ["p"]}, "n": 7, "deltas": []})", net);
         }).empty());
}

TEST_CASE("report serialization") {
  Matrix F(2, 2);
  F << 4.0, 0.0, 0.0, 0.0;
  const FimReport r = make_fim_report(F, {"a", "b"}, Vector::Ones(2), ParamScale::Log);
  const io::json j = io::to_json(r);
  CHECK(j["fim"]["rows"] == 2);
  CHECK(j["fim"]["data"].size() == 4);
  CHECK(j["cramer_rao"] == "singular");
  CHECK(j["log_det"] == "-inf");
  CHECK(j["rank"] == 1);
  CHECK(contains(io::summary_text(r), "identifiability rank: 1 of 2"));
  CHECK(io::to_json(r).dump() == j.dump());
}

TEST_CASE("CSV outputs") {
  SweepResult r;
  r.rows.push_back({0.5, Criterion::LogDet, 1.25, "ok"});
  r.rows.push_back({1.0, Criterion::LogDet, -std::numeric_limits<double>::infinity(), "error: a, b"});
  CHECK(io::sweep_csv(r) == "delta,criterion,value,status\n0.5,log_det,1.25,ok\n1,log_det,-inf,error: a  b\n");

  const NeutralEllipse e = neutral_ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2), 1.0, 0, 1,
                                             CrossSection::Profile, 4);
  const std::string csv = io::ellipse_csv(e, {"u", "v"});
  CHECK(csv.rfind("u,v\n1,0\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("manifest") {
  io::RunManifest m;
  m.command = "fim";
  m.add_input("model.lna", "abc");
  m.warn("w");
  m.warn("w");
  m.param_names = {"a"};
  m.theta = Vector::Ones(1);
  const io::json j = m.to_json();
  CHECK(j["inputs"]["model.lna"] == io::sha256_hex("abc"));
  CHECK(j["warnings"].size() == 1);
  CHECK(j["version"] == io::kVersion);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "lnafim_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_file(dir / "x.txt", "hello");
  CHECK(io::read_file(dir / "x.txt") == "hello");
  CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), InputError);
  std::filesystem::remove_all(dir.parent_path());
}
