#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kTool = MASKGUARD_TOOL;
const fs::path kConfigs = MASKGUARD_CONFIG_DIR;
const fs::path kGolden = MASKGUARD_GOLDEN_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "maskguard_cli_test" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + kTool.string() + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string golden(const char* name) {
  std::string s = slurp(kGolden / name);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

void expect_same_files(const fs::path& a, const fs::path& b) {
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    if (name == "manifest.json") continue;  // records the output directory
    ASSERT_TRUE(fs::exists(b / name)) << name;
    EXPECT_EQ(slurp(e.path()), slurp(b / name)) << name;
    ++compared;
  }
  EXPECT_GT(compared, 0u);
}

}  // namespace

TEST(Cli, SimulateWritesDocumentedFiles) {
  const fs::path out = scratch("sim");
  ASSERT_EQ(run("simulate --config " + (kConfigs / "fma_ag_x10_bolted.json").string() + " --out " +
                out.string()),
            0);
  EXPECT_EQ(first_line(out / "stream.csv"), golden("stream.header"));
  EXPECT_EQ(first_line(out / "mi_trace.csv"), golden("mi_trace.header"));
  const std::string events = slurp(out / "events.jsonl");
  EXPECT_NE(events.find("\"MITrigger\""), std::string::npos);
  EXPECT_NE(slurp(out / "manifest.json").find("\"root_seed\": 1"), std::string::npos);
}

TEST(Cli, SimulateIsDeterministic) {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const std::string cfg = (kConfigs / "shunt_switch.json").string();
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 11 --out " + a.string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --seed 11 --out " + b.string()), 0);
  expect_same_files(a, b);
}

TEST(Cli, ExitCodes) {
  const fs::path out = scratch("codes");
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("simulate --out " + out.string()), 2);
  EXPECT_EQ(run("simulate --config /nonexistent.json --out " + out.string()), 2);

  fs::create_directories(out);
  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"scenario": {"duration_s": 1.0, "duraton": 2}})";
  EXPECT_EQ(run("simulate --config " + bad.string() + " --out " + (out / "a").string()), 2);

  const std::string quick = (kConfigs / "quick_experiment.json").string();
  EXPECT_EQ(run("eval --config " + quick + " --model /nonexistent/model.bin --out " +
                (out / "b").string()),
            3);
  EXPECT_EQ(run("train --config " + quick + " --dataset /nonexistent --out " + (out / "c").string()), 3);
  EXPECT_EQ(run("eval --config " + quick + " --out " + (out / "d").string()), 2);
}

TEST(Cli, ExperimentChainReplaysFromManifests) {
  const fs::path root = scratch("chain");
  const std::string quick = (kConfigs / "quick_experiment.json").string();
  const fs::path ds = root / "ds", m = root / "m", ev = root / "ev", roc = root / "roc";
  ASSERT_EQ(run("dataset --config " + quick + " --jobs 2 --out " + ds.string()), 0);
  ASSERT_EQ(run("train --config " + quick + " --dataset " + ds.string() + " --out " + m.string()), 0);
  const std::string model = " --model " + (m / "model.bin").string();
  ASSERT_EQ(run("eval --config " + quick + model + " --out " + ev.string()), 0);
  ASSERT_EQ(run("roc --config " + quick + model + " --out " + roc.string()), 0);

  EXPECT_EQ(first_line(ds / "dataset.csv"), golden("dataset.header"));
  EXPECT_EQ(first_line(m / "training_log.csv"), golden("training_log.header"));
  EXPECT_EQ(first_line(ev / "results.csv"), golden("results.header"));
  EXPECT_EQ(first_line(ev / "metrics.csv"), golden("metrics.header"));
  EXPECT_EQ(first_line(roc / "roc_mi_only.csv"), golden("roc.header"));
  EXPECT_EQ(first_line(roc / "roc_mi_zcc.csv"), golden("roc.header"));
  EXPECT_EQ(first_line(roc / "auc.csv"), golden("auc.header"));

  for (const fs::path& dir : {ds, m, ev, roc}) {
    const fs::path again = root / (dir.filename().string() + "_replay");
    const std::string sub = dir == ds ? "dataset" : dir == m ? "train" : dir == ev ? "eval" : "roc";
    ASSERT_EQ(run(sub + " --config " + (dir / "manifest.json").string() + " --out " + again.string()), 0)
        << sub;
    expect_same_files(dir, again);
  }
}
