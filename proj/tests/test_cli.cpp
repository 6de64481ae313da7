#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aara/driver.hpp"
#include "aara/errors.hpp"

namespace fs = std::filesystem;
using namespace aara;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  std::string cmd = std::string(AARA_FX_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string corpus(const std::string& name) { return std::string(AARA_CORPUS_DIR) + "/" + name + ".fx"; }

fs::path scratchDir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("aara_fx_test_" + name + "_" + std::to_string(getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("goldens") {
  TEST_CASE("parsing keys, annotations and constraints") {
    auto g = driver::parseGolden(
        "# comment\nentry=sqdist\nstatus=bounded\nann=q1:arg.1[]\nann=q2:arg.2[]\n"
        "constraint=q1+q2==1\nbound=|vs.2|\ntight_family=equal_lengths\n",
        "sqdist");
    CHECK(g.entry == "sqdist");
    CHECK(g.status == "bounded");
    REQUIRE(g.anns.size() == 2);
    CHECK(g.anns[0] == std::pair<std::string, std::string>{"q1", "arg.1[]"});
    CHECK(g.constraints == std::vector<std::string>{"q1+q2==1"});
    CHECK(g.tightFamily == "equal_lengths");
  }

  TEST_CASE("malformed goldens are syntax errors") {
    CHECK_THROWS_AS(driver::parseGolden("status=maybe\n", "x"), Error);
    CHECK_THROWS_AS(driver::parseGolden("no equals sign\n", "x"), Error);
    CHECK_THROWS_AS(driver::parseGolden("entry=f\nstatus=bounded\ntight_family=weird\n", "x"), Error);
  }

  TEST_CASE("the corpus goldens") {
    auto all = driver::loadCorpus(AARA_CORPUS_DIR);
    REQUIRE(all.size() >= 14);
    std::map<std::string, driver::Golden> by;
    for (const auto& g : all) by[g.name] = g;
    CHECK(by.at("sqdist").constraints == std::vector<std::string>{"q1+q2==1", "p==0", "p'==0"});
    CHECK(by.at("store_lists").signature == "L^2(L^1(int)) ->[1;0] unit");
    CHECK(by.at("store_lists_q_naive").status == "unsolvable");
    CHECK(by.at("oneshot_twice").status == "rejected");
    CHECK(by.at("oneshot_twice").error == "LinearReuse");
    for (size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].name < all[i].name);
  }

  TEST_CASE("reading annotations off a signature") {
    auto a = driver::analyzeEntry(corpus("store_lists"), "store_lists");
    REQUIRE(a.result);
    const Arrow& s = a.result->signature;
    CHECK(driver::annotationAt(s, "arg[]") == 2);
    CHECK(driver::annotationAt(s, "arg[][]") == 1);
    CHECK(driver::annotationAt(s, "p") == 1);
    CHECK(driver::annotationAt(s, "p'") == 0);
    CHECK_THROWS_AS(driver::annotationAt(s, "arg.1"), Error);
  }
}

TEST_SUITE("analyze") {
  TEST_CASE("store_lists is bounded") {
    auto r = cli("analyze " + corpus("store_lists") + " --entry store_lists --no-timing");
    CHECK(r.code == 0);
    CHECK(r.out.find("status: bounded") != std::string::npos);
    CHECK(r.out.find("bound: 1 + 2*|vs| + sum|vs[i]|") != std::string::npos);
  }

  TEST_CASE("the naive queue is unsolvable") {
    auto r = cli("analyze " + corpus("store_lists_q_naive") + " --entry store_lists_q_naive");
    CHECK(r.code == 2);
    CHECK(r.out.find("status: unsolvable") != std::string::npos);
  }

  TEST_CASE("syntax errors report line and column") {
    auto d = scratchDir("syntax");
    std::ofstream(d / "bad.fx") << "fun f (x: unit): unit =\n  let in x;\n";
    auto r = cli("analyze " + (d / "bad.fx").string());
    CHECK(r.code == 1);
    CHECK(r.out.find("bad.fx:2:") != std::string::npos);
    CHECK(r.out.find("SyntaxError") != std::string::npos);
    fs::remove_all(d);
  }

  TEST_CASE("json output is stable without timing") {
    auto a = cli("analyze " + corpus("sqdist") + " --json --no-timing");
    auto b = cli("analyze " + corpus("sqdist") + " --json --no-timing");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["functions"][0]["name"] == "sqdist");
    CHECK(j["functions"][0]["bound"]["pretty"] == "|vs.2|");
  }

  TEST_CASE("rejected programs exit 1") {
    auto r = cli("analyze " + corpus("oneshot_twice"));
    CHECK(r.code == 1);
    CHECK(r.out.find("LinearReuse") != std::string::npos);
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("analyze /nonexistent/file.fx").code == 1);
  }
}

TEST_SUITE("run") {
  const std::string sl = "run " + corpus("store_lists") + " --input \"[[1],[2,3]]\"";

  TEST_CASE("profiling store_lists") {
    auto r = cli(sl + " --profile");
    CHECK(r.code == 0);
    CHECK(r.out.find("high_water: 8") != std::string::npos);
    CHECK(r.out.find("net: 8") != std::string::npos);
  }

  TEST_CASE("a budget equal to the high water mark suffices") { CHECK(cli(sl + " --budget 8").code == 0); }

  TEST_CASE("one less exhausts") {
    auto r = cli(sl + " --budget 7");
    CHECK(r.code == 3);
    CHECK(r.out.find("exhausted") != std::string::npos);
  }

  TEST_CASE("trace file") {
    auto d = scratchDir("trace");
    auto r = cli(sl + " --profile --trace " + (d / "t.csv").string());
    CHECK(r.code == 0);
    std::ifstream in(d / "t.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,rule,resource,depth");
    fs::remove_all(d);
  }

  TEST_CASE("step limit is a runtime error") {
    auto r = cli(sl + " --profile --step-limit 10");
    CHECK(r.code == 1);
  }

  TEST_CASE("ill-typed input") { CHECK(cli("run " + corpus("store_lists") + " --input \"(1, 2)\" --profile").code == 1); }
}

TEST_SUITE("verify") {
  TEST_CASE("sqdist has no violations and a tight trial") {
    auto r = cli("verify " + corpus("sqdist") + " --json");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["trials"] == 100);
    CHECK(j["violations"].empty());
    CHECK(j["min_slack"] == "0");
  }

  TEST_CASE("same seed, same report; serial matches parallel") {
    auto a = cli("verify " + corpus("store_lists") + " --seed 17 --json --trials 30");
    auto b = cli("verify " + corpus("store_lists") + " --seed 17 --json --trials 30 --serial");
    CHECK(a.code == 0);
    auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
    CHECK(ja == jb);
  }

  TEST_CASE("unsolvable entries cannot be verified") {
    CHECK(cli("verify " + corpus("store_lists_q_naive")).code == 2);
  }
}

TEST_SUITE("bench") {
  TEST_CASE("the full corpus matches its goldens") {
    auto r = cli(std::string("bench ") + AARA_CORPUS_DIR + " --trials 3 --json");
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    bool sawNaive = false;
    for (const auto& row : j["programs"]) {
      CAPTURE(row.dump());
      CHECK(row["golden"] == "match");
      CHECK(row.contains("time_ms"));
      if (row["program"] == "store_lists_q_naive") {
        sawNaive = true;
        CHECK(row["status"] == "unsolvable");
      }
    }
    CHECK(sawNaive);
  }

  TEST_CASE("a changed golden is a mismatch") {
    auto d = scratchDir("mismatch");
    fs::copy_file(corpus("store_lists"), d / "store_lists.fx");
    std::string g = driver::readFile(std::string(AARA_CORPUS_DIR) + "/store_lists.golden");
    g.replace(g.find("outer==2"), 8, "outer==3");
    std::ofstream(d / "store_lists.golden") << g;
    auto r = cli("bench " + d.string() + " --trials 1");
    CHECK(r.code == 5);
    fs::remove_all(d);
  }

  TEST_CASE("a program without a golden") {
    auto d = scratchDir("missing");
    fs::copy_file(corpus("sqdist"), d / "sqdist.fx");
    CHECK(cli("bench " + d.string() + " --trials 1").code == 1);
    fs::remove_all(d);
  }
}
