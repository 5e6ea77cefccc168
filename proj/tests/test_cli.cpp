#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cantor/cli.hpp"

using namespace cantor;
using cantor::cli::RunConfig;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::string& cmd, const RunConfig& cfg) {
  std::ostringstream out, err;
  int code = cli::run(cmd, cfg, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("digits command", "[cli]") {
  RunConfig c;
  c.count = 6;
  auto r = run("digits", c);
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 7);
  CHECK(ls[0] == "n,a,b,c,q,lo,hi,E");
  CHECK(ls[6] == "6,3,1,3,72,44,52,44");
  c.format = cli::Format::Jsonl;
  auto j = run("digits", c);
  auto row = nlohmann::json::parse(lines(j.out).back());
  CHECK(row["E"] == 44);
}

TEST_CASE("value command", "[cli]") {
  RunConfig c;
  c.prefix = 5;
  c.decimals = 10;
  auto r = run("value", c);
  REQUIRE(r.code == 0);
  CHECK(lines(r.out)[1] == "5,623/25600,623,25600,0.0243359375");
}

TEST_CASE("qalpha command", "[cli]") {
  RunConfig c;
  c.alpha = "1/2";
  c.terms = 3;
  auto r = run("qalpha", c);
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  REQUIRE(ls.size() == 4);
  CHECK(ls[1].rfind("1,2,", 0) == 0);
  CHECK(ls[2].rfind("2,8,", 0) == 0);
  CHECK(ls[3].rfind("3,18,", 0) == 0);
}

TEST_CASE("digits output round-trips through validate", "[cli]") {
  for (auto fmt : {cli::Format::Csv, cli::Format::Jsonl}) {
    for (const char* policy : {"min", "max", "mid", "random:5"}) {
      RunConfig c;
      c.count = 200;
      c.policy = policy;
      c.format = fmt;
      const std::string path = "roundtrip_digits.txt";
      c.output = path;
      REQUIRE(run("digits", c).code == 0);
      RunConfig v;
      v.digits_path = path;
      v.check = true;
      auto r = run("validate", v);
      CHECK(r.code == 0);
      CHECK(r.err.find("prefix valid") != std::string::npos);
      std::remove(path.c_str());
    }
  }
}

TEST_CASE("validate reports the first bad position", "[cli]") {
  const std::string path = "bad_digits.txt";
  {
    std::ofstream out(path);
    out << "0\n0\n7\n1\n14\n";
  }
  RunConfig v;
  v.digits_path = path;
  v.check = true;
  auto r = run("validate", v);
  CHECK(r.code == 1);
  CHECK(r.err.find("n = 4") != std::string::npos);
  v.check = false;
  CHECK(run("validate", v).code == 0);
  std::remove(path.c_str());
}

TEST_CASE("config errors exit with 2", "[cli]") {
  RunConfig c;
  c.family = "nonsense";
  CHECK(run("digits", c).code == 2);
  c.family = "const:3";
  CHECK(run("ladder", c).code == 2);
  c.family = "ref2";
  c.policy = "sideways";
  CHECK(run("digits", c).code == 2);
  CHECK(run("frobnicate", RunConfig{}).code == 2);
  RunConfig d;
  d.report = "box,volume";
  CHECK(run("dimension", d).code == 2);
}

TEST_CASE("ladder command", "[cli]") {
  RunConfig c;
  c.family = "slow:3";
  c.max_i = 4;
  auto ls = lines(run("ladder", c).out);
  REQUIRE(ls.size() == 5);
  CHECK(ls[0] == "i,nu_next,l,L");
  CHECK(ls[1] == "1,4,3,3");
  CHECK(ls[2] == "2,7,2,7");
}

TEST_CASE("discrepancy and aap-check in check mode", "[cli]") {
  RunConfig c;
  c.max_n = 3000;
  c.check = true;
  auto d = run("discrepancy", c);
  CHECK(d.code == 0);
  auto ls = lines(d.out);
  CHECK(ls[0] == "n,i,Dstar_num,Dstar_den,Dstar_float,eps_bar_num,eps_bar_den,eps_bar_float,env_bdiscr3,env_sqrt8,hypotheses");
  CHECK(ls.back().rfind("3000,", 0) == 0);
  CHECK(d.err.find("N0 sqrt8 envelope") != std::string::npos);
  c.max_n = 2000;
  c.policy = "random:11";
  auto a = run("aap-check", c);
  CHECK(a.code == 0);
  CHECK(a.err.find(" 0 failing") != std::string::npos);
}

TEST_CASE("dimension and diagnose commands", "[cli]") {
  RunConfig c;
  c.max_k = 6;
  auto r = run("dimension", c);
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 7);
  c.family = "qalpha:1/2";
  c.report = "box,hausdorff,qalpha";
  auto q = run("dimension", c);
  REQUIRE(q.code == 0);
  CHECK(lines(q.out)[0].find("product_ratio") != std::string::npos);
  c.family = "tower";
  c.report = "box";
  c.max_k = 4;
  CHECK(run("dimension", c).code == 0);
  c.family = "geom:8";
  c.max_k = 8;
  CHECK(run("diagnose", c).code == 0);
}

TEST_CASE("identical configs give identical output", "[cli]") {
  RunConfig c;
  c.count = 300;
  c.policy = "random";
  c.seed = 42;
  c.format = cli::Format::Jsonl;
  CHECK(run("digits", c).out == run("digits", c).out);
  c.seed = 43;
  auto other = run("digits", c).out;
  c.seed = 42;
  CHECK(run("digits", c).out != other);
}
