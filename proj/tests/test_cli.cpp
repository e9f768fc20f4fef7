#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  std::string command = std::string(LDW_CLI_PATH) + " " + args + " 2>&1";
  CliRun result;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer;
  while (std::size_t got = fread(buffer.data(), 1, buffer.size(), pipe)) result.out.append(buffer.data(), got);
  int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

TEST(Cli, Help) {
  CliRun r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"bound", "rate", "stein-check", "law", "wp"}) EXPECT_NE(r.out.find(sub), std::string::npos);
}

TEST(Cli, Bound) {
  CliRun r = run("bound --model mdep --m 1 -n 8");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("beta"), std::string::npos);
  EXPECT_NE(r.out.find("functional_w2"), std::string::npos);
  EXPECT_EQ(run("bound --model ising -n 8").code, 2);
  EXPECT_EQ(run("bound --model mdep --m 9 -n 8").code, 2);
  EXPECT_EQ(run("bound --bogus").code, 2);
}

TEST(Cli, Law) {
  CliRun r = run("law four-point --beta 1/10");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("25"), std::string::npos);
  EXPECT_NE(r.out.find("13/48"), std::string::npos);
  EXPECT_EQ(run("law four-point --beta 3/2").code, 2);
  EXPECT_EQ(run("law seven-point").code, 2);
}

TEST(Cli, SteinCheck) {
  CliRun r = run("stein-check --function cube --lo -2 --hi 2 --step 0.5");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max_residual"), std::string::npos);
  EXPECT_EQ(run("stein-check --function nope").code, 2);
}

TEST(Cli, RateExitCodes) {
  auto out = std::filesystem::temp_directory_path() / "ldw_cli_rate.csv";
  CliRun ok = run("rate --model iid --grid 16,64,256 --replicates 2 --samples 20000 --output " + out.string());
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("slope"), std::string::npos);
  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "model,n,param,replicate,distance,bound,baseline,seed");
  std::filesystem::remove(out);

  // A normal base makes W exactly Gaussian: every point sits at the floor.
  CliRun floor = run("rate --model iid --base normal --grid 16,32,64 --replicates 2 --samples 200");
  EXPECT_EQ(floor.code, 3) << floor.out;
  EXPECT_EQ(run("rate --model iid --base normal --grid 16,32,64 --replicates 2 --samples 200 --no-fit").code, 0);
  EXPECT_EQ(run("rate --model iid --grid 64,16 --samples 200").code, 2);
  EXPECT_EQ(run("rate --model iid --grid 16,32 --samples 10").code, 2);

  auto config = temp_file("ldw_cli.conf", "model = mdep\nm = 1\ngrid = 16,32,64\nsamples = 200\nreplicates = 1\n");
  EXPECT_EQ(run("rate -c " + config.string() + " --no-fit").code, 0);
  EXPECT_EQ(run("rate -c " + config.string() + " --no-fit --distance tv").code, 2);
  std::filesystem::remove(config);
}

TEST(Cli, WpOnSampleFile) {
  std::string text = "# sample\n";
  for (int k = 0; k < 500; ++k) text += std::to_string(k % 2 ? 1.0 : -1.0) + "\n\n";
  auto path = temp_file("ldw_cli_sample.txt", text);
  CliRun r = run("wp " + path.string() + " --p 2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(run("wp " + path.string() + " --metric kolmogorov").code, 0);
  EXPECT_EQ(run("wp " + path.string() + " --metric zolotarev").code, 0);
  EXPECT_EQ(run("wp " + path.string() + " --against " + path.string()).code, 0);
  EXPECT_EQ(run("wp " + path.string() + " --metric tv").code, 2);
  EXPECT_EQ(run("wp /nonexistent/sample.txt").code, 2);
  auto bad = temp_file("ldw_cli_bad.txt", "1.0\nnot-a-number\n");
  EXPECT_EQ(run("wp " + bad.string()).code, 2);
  std::filesystem::remove(path);
  std::filesystem::remove(bad);
}

}  // namespace
