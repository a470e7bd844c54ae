#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stampede/cli.hpp"

namespace fs = std::filesystem;
using stampede::cli::run_cli;
using Json = nlohmann::json;

namespace {

const std::string kData = STAMPEDE_DATA_DIR;
const std::string kTestData = STAMPEDE_TEST_DATA_DIR;
const std::string kScenarios = std::string(STAMPEDE_DATA_DIR) + "/../scenarios";

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run lab(std::vector<std::string> args) {
  args.insert(args.end(), {"--data-dir", kData});
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

Run lab_raw(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("stampede_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(CliIngest, GoldenPanel) {
  const auto r = lab({"ingest", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(kTestData + "/golden/panel.csv"));
  EXPECT_EQ(r.err, "5 years joined, 0 warnings\n");
}

TEST(CliIngest, JsonPanel) {
  const auto r = lab({"ingest"});
  ASSERT_EQ(r.code, 0);
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["years"], 5);
  EXPECT_EQ(j["rows"][0]["year"], 1954);
  EXPECT_EQ(j["rows"][0]["fatalities"], 700);
  EXPECT_EQ(j["rows"][0]["trigger"], "Overcrowding");
  EXPECT_DOUBLE_EQ(j["rows"][4]["chokepoint_width_m"].get<double>(), 3.8);
  EXPECT_EQ(j["rows"][3]["key_phrases"][1], "no alerts");
  EXPECT_TRUE(j["warnings"].empty());
}

TEST(CliIngest, MissingVenuesExitsTwo) {
  TempDir dir;
  fs::copy_file(kData + "/incidents.csv", dir / "incidents.csv");
  fs::copy_file(kData + "/inquiries.csv", dir / "inquiries.csv");
  const auto r = lab_raw({"ingest", "--data-dir", dir.str()});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  const auto err = Json::parse(r.err);
  EXPECT_EQ(err["error"], "FileNotFound");
  EXPECT_NE(err["message"].get<std::string>().find("venues.csv"), std::string::npos);
}

TEST(CliIngest, UnknownColumnWarns) {
  TempDir dir;
  fs::copy_file(kData + "/incidents.csv", dir / "incidents.csv");
  fs::copy_file(kData + "/inquiries.csv", dir / "inquiries.csv");
  std::istringstream in(slurp(kData + "/venues.csv"));
  std::ofstream out(dir / "venues.csv");
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    out << line << (header ? ",notes" : ",x") << "\n";
    header = false;
  }
  out.close();
  const auto r = lab_raw({"ingest", "--data-dir", dir.str()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("5 years joined, 1 warning\n"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("notes"), std::string::npos);
}

TEST(CliIngest, BadEnumExitsTwo) {
  TempDir dir;
  fs::copy_file(kData + "/venues.csv", dir / "venues.csv");
  fs::copy_file(kData + "/inquiries.csv", dir / "inquiries.csv");
  std::ofstream(dir / "incidents.csv") << "year,fatalities,injuries,density_ppm2,trigger,admin_response\n"
                                       << "1954,700,2000,8,Crush,VIP prioritization\n";
  const auto r = lab_raw({"ingest", "--data-dir", dir.str()});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"], "BadEnumValue");
}

TEST(CliRegress, DefaultModel) {
  const auto r = lab({"regress"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j["coefficients"]["intercept"].get<double>(), 1516.25, 1e-9);
  EXPECT_NEAR(j["coefficients"]["density"].get<double>(), -52.75, 1e-9);
  EXPECT_NEAR(j["coefficients"]["admin_score"].get<double>(), -221.0, 1e-9);
  EXPECT_EQ(j["dof"], 2);
  EXPECT_TRUE(j["p_values"].contains("density"));
}

TEST(CliRegress, NormalizeKeepsFittedValues) {
  const auto raw = Json::parse(lab({"regress"}).out);
  const auto norm = Json::parse(lab({"regress", "--normalize"}).out);
  ASSERT_EQ(raw["fitted"].size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(raw["fitted"][i].get<double>(), norm["fitted"][i].get<double>(), 2e-6);
  }
  EXPECT_GT(std::abs(raw["coefficients"]["density"].get<double>() - norm["coefficients"]["density"].get<double>()), 1.0);
  EXPECT_NEAR(raw["r_squared"].get<double>(), norm["r_squared"].get<double>(), 1e-6);
}

TEST(CliRegress, Trend) {
  const auto r = lab({"regress", "--trend", "fatalities"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(Json::parse(r.out)["slope"].get<double>(), -9.1355, 1e-3);
}

TEST(CliRegress, CsvAndBadColumn) {
  const auto csv = lab({"regress", "--format", "csv"});
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "term,coefficient,std_error,t_stat,p_value");
  EXPECT_NE(csv.out.find("intercept,1516.250000,"), std::string::npos);
  const auto bad = lab({"regress", "--predictors", "density,temperature"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(Json::parse(bad.err)["error"], "InvalidConfig");
  const auto singular = lab({"regress", "--predictors", "density,density"});
  EXPECT_EQ(singular.code, 2);
  EXPECT_EQ(Json::parse(singular.err)["error"], "RankDeficient");
}

TEST(CliSimulate, ByteIdenticalReruns) {
  TempDir dir;
  const auto a = lab({"simulate", "--preset", "1954", "--agents", "200", "--seed", "7", "-o", dir / "a.json"});
  const auto b = lab({"simulate", "--preset", "1954", "--agents", "200", "--seed", "7", "-o", dir / "b.json", "--threads", "3"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto first = slurp(dir / "a.json");
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, slurp(dir / "b.json"));
  const auto j = Json::parse(first);
  EXPECT_EQ(j["agent_count"], 200);
  EXPECT_EQ(j["exited"].get<int>() + j["incapacitated"].get<int>() + j["active"].get<int>(), 200);
}

TEST(CliSimulate, NoVipClosureOpensMoreExits) {
  const auto closed = Json::parse(lab({"simulate", "--preset", "1954", "--agents", "10", "--duration", "1"}).out);
  const auto open =
      Json::parse(lab({"simulate", "--preset", "1954", "--agents", "10", "--duration", "1", "--no-vip-closure"}).out);
  EXPECT_GT(open["scenario"]["open_exits"].get<int>(), closed["scenario"]["open_exits"].get<int>());
  EXPECT_EQ(open["scenario"]["open_exits"], 4);
  EXPECT_EQ(closed["scenario"]["open_exits"], 2);
}

TEST(CliSimulate, ZeroAgents) {
  const auto j = Json::parse(lab({"simulate", "--preset", "1954", "--agents", "0"}).out);
  EXPECT_EQ(j["agent_count"], 0);
  EXPECT_EQ(j["exited"], 0);
  EXPECT_EQ(j["incapacitated"], 0);
  EXPECT_EQ(j["active"], 0);
  EXPECT_EQ(j["peak_density"], 0.0);
  EXPECT_TRUE(j["time_to_90pct_exit"].is_null());
  EXPECT_TRUE(j["throughput_series"].empty());
  EXPECT_TRUE(j["breach_events"].empty());
  EXPECT_EQ(j["steps"], 0);
}

TEST(CliSimulate, ScenarioFileAndTrajectory) {
  TempDir dir;
  const auto r = lab({"simulate", "--scenario", kScenarios + "/room.json", "--trajectory", dir / "traj.csv", "--stride", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["agent_count"], 30);
  EXPECT_EQ(j["exited"], 30);
  int sum = 0;
  for (const auto& v : j["throughput_series"]) sum += v.get<int>();
  EXPECT_EQ(sum, 30);

  std::istringstream traj(slurp(dir / "traj.csv"));
  std::string line;
  std::getline(traj, line);
  EXPECT_EQ(line, "t,agent_id,x,y,vx,vy,status");
  int initial = 0;
  int exits = 0;
  while (std::getline(traj, line)) {
    if (line.rfind("0.000000,", 0) == 0) ++initial;
    if (line.size() > 7 && line.substr(line.size() - 7) == ",exited") ++exits;
  }
  EXPECT_EQ(initial, 30);
  EXPECT_EQ(exits, 30);
}

TEST(CliSimulate, RitualFlag) {
  const auto r = lab({"simulate", "--scenario", kScenarios + "/room.json", "--ritual", "0:5:1.34", "--duration", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["ritual_windows"][0]["multiplier"].get<double>(), 1.34);
  EXPECT_EQ(lab({"simulate", "--preset", "1954", "--ritual", "5:1:1.5"}).code, 2);
  EXPECT_EQ(lab({"simulate", "--preset", "1954", "--ritual", "0:5:3.0"}).code, 2);
}

TEST(CliSimulate, Errors) {
  EXPECT_EQ(lab({"simulate"}).code, 2);
  EXPECT_EQ(lab({"simulate", "--preset", "1900"}).code, 2);
  const auto both = lab({"simulate", "--preset", "1954", "--scenario", kScenarios + "/room.json"});
  EXPECT_EQ(both.code, 2);
  EXPECT_EQ(Json::parse(both.err)["error"], "UsageError");
  TempDir dir;
  std::ofstream(dir / "sealed.json") << R"({"walls": [[0,0,4,0],[4,0,4,4],[4,4,0,4],[0,4,0,0]],
    "exits": [{"segment": [1,0,2,0], "open": false}], "spawn": {"x_min":1,"y_min":1,"x_max":3,"y_max":3}, "agents": 2})";
  const auto sealed = lab({"simulate", "--scenario", dir / "sealed.json"});
  EXPECT_EQ(sealed.code, 2);
  EXPECT_EQ(Json::parse(sealed.err)["error"], "NoOpenExit");
}

TEST(CliConfig, Precedence) {
  TempDir dir;
  std::ofstream(dir / "cfg.json") << R"({"simulate": {"agents": 10, "duration_s": 0.5}, "params": {"dt": 0.02}})";
  const auto agents = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"simulate", "--preset", "2013", "--config", dir / "cfg.json"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = lab(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return Json::parse(r.out);
  };
  const auto from_file = agents({});
  EXPECT_EQ(from_file["agent_count"], 10);
  EXPECT_DOUBLE_EQ(from_file["params"]["dt"].get<double>(), 0.02);
  EXPECT_EQ(from_file["steps"], 25);
  EXPECT_EQ(agents({"--set", "simulate.agents=12"})["agent_count"], 12);
  EXPECT_EQ(agents({"--set", "simulate.agents=12", "--agents", "14"})["agent_count"], 14);
  EXPECT_DOUBLE_EQ(agents({"--set", "dt=0.05"})["params"]["dt"].get<double>(), 0.05);
  EXPECT_EQ(agents({"--seed", "9"})["params"]["seed"], 9);
}

TEST(CliConfig, Rejections) {
  EXPECT_EQ(lab({"ingest", "--format", "xml"}).code, 2);
  EXPECT_EQ(lab({"regress", "--set", "nonsense=1"}).code, 2);
  EXPECT_EQ(lab({"regress", "--set", "noequals"}).code, 2);
  EXPECT_EQ(lab({"simulate", "--preset", "1954", "--set", "dt=0.5"}).code, 2);
  EXPECT_EQ(lab({"nonsense"}).code, 2);
  EXPECT_EQ(lab_raw({}).code, 2);
  TempDir dir;
  std::ofstream(dir / "bad.json") << "{not json";
  const auto r = lab({"regress", "--config", dir / "bad.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(Json::parse(r.err)["error"], "InvalidConfig");
  EXPECT_EQ(lab_raw({"--help"}).code, 0);
}

TEST(CliMine, MatchesOracleModel) {
  const auto r = lab({"mine"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto got = Json::parse(r.out);
  const auto want = Json::parse(slurp(kTestData + "/golden/mine_bundled.json"));
  EXPECT_EQ(got["model"]["n_docs"], want["n_docs"]);
  EXPECT_EQ(got["model"]["doc_freq"], want["doc_freq"]);
  ASSERT_EQ(got["model"]["weights"].size(), want["weights"].size());
  for (std::size_t i = 0; i < want["weights"].size(); ++i) {
    const auto& g = got["model"]["weights"][i];
    const auto& w = want["weights"][i];
    EXPECT_EQ(g["year"], w["year"]);
    EXPECT_EQ(g["term"], w["term"]);
    EXPECT_NEAR(g["weight"].get<double>(), w["weight"].get<double>(), 1e-6);
  }
  EXPECT_TRUE(got["recurring_phrases"]["phrases"].empty());
}

TEST(CliMine, HandCorpusDirectory) {
  TempDir dir;
  std::ofstream(dir / "2001.txt") << "unforeseen surge\n";
  std::ofstream(dir / "2002.txt") << "crowd mismanagement surge\n";
  std::ofstream(dir / "2003.txt") << "barricade collapse\n";
  const auto r = lab({"mine", "--corpus", dir.str(), "--top-k", "2", "--ngram", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  bool found = false;
  for (const auto& w : j["model"]["weights"]) {
    if (w["year"] == 2001 && w["term"] == "surg") {
      EXPECT_NEAR(w["weight"].get<double>(), 0.5 * std::log(1.5), 1e-6);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(j["top_terms"][2]["terms"][0]["term"], "barricad");
  EXPECT_EQ(j["top_terms"][2]["terms"][1]["term"], "collap");
  ASSERT_EQ(j["recurring_phrases"]["phrases"].size(), 1u);
  EXPECT_EQ(j["recurring_phrases"]["phrases"][0]["ngram"], "surg");
  EXPECT_EQ(lab({"mine", "--corpus", dir / "missing"}).code, 2);
}

TEST(CliRisk, Timeline) {
  const auto r = lab({"risk"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  ASSERT_EQ(j["timeline"].size(), 5u);
  EXPECT_EQ(j["timeline"][0]["year"], 1954);
  EXPECT_NEAR(j["timeline"][0]["cri"].get<double>(), 0.661667, 1e-6);
  EXPECT_NEAR(j["choke_fraction"]["fraction"].get<double>(), 0.4, 1e-12);
  const auto density_only = Json::parse(lab({"risk", "--weights", "1,0,0,0"}).out);
  EXPECT_NEAR(density_only["timeline"][0]["cri"].get<double>(), 8.0 / 12.0, 1e-6);
  const auto bad = lab({"risk", "--weights", "0.5,0.5,0.5,0.5"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(Json::parse(bad.err)["error"], "BadWeights");
}

TEST(CliReport, DeterministicAndComplete) {
  const std::vector<std::string> small = {"report", "--agents", "40", "--duration", "10"};
  auto serial = small;
  serial.insert(serial.end(), {"--threads", "1"});
  auto parallel = small;
  parallel.insert(parallel.end(), {"--threads", "4"});
  const auto a = lab(serial);
  const auto b = lab(serial);
  const auto c = lab(parallel);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);

  std::istringstream in(a.out);
  std::string line;
  bool in_cri = false;
  int cri_rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("## ", 0) == 0) in_cri = line == "## Crowd Risk Index";
    if (in_cri && line.rfind("| ", 0) == 0 && line.rfind("| year", 0) != 0) ++cri_rows;
  }
  EXPECT_EQ(cri_rows, 5);
  EXPECT_NE(a.out.find("no recurring phrases"), std::string::npos);
  EXPECT_NE(a.out.find("| 1954 | 0.661667 |"), std::string::npos);
  EXPECT_NE(a.out.find("| intercept | 1516.250000 |"), std::string::npos);
}

TEST(CliReport, RecurringPhrasesListed) {
  TempDir dir;
  for (const char* f : {"incidents.csv", "venues.csv"}) fs::copy_file(kData + "/" + f, dir / f);
  std::ofstream(dir / "inquiries.csv") << "year,key_phrases,effectiveness_score\n"
                                       << "1954,Unforeseen surge;crowd mismanagement,3\n"
                                       << "1986,Crowd mismanagement;medical delays,4\n"
                                       << "2003,Poor coordination,5\n"
                                       << "2013,Railway station mismanagement,6\n"
                                       << "2025,Barricade collapse,4\n";
  const auto r = lab_raw({"report", "--data-dir", dir.str(), "--agents", "5", "--duration", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.find("no recurring phrases"), std::string::npos);
  EXPECT_NE(r.out.find("- crowd mismanag: 1954, 1986"), std::string::npos);
}
