#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.h"
#include "system_file.h"

namespace descfact_cli {
namespace {

namespace fs = std::filesystem;

const std::string kData = DESCFACT_TEST_DATA;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("descfact_cli_" + std::to_string(::testing::UnitTest::GetInstance()
                                                 ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  const std::string ex1_ = kData + "/improper_continuous.json";
  const std::string ex2_ = kData + "/improper_discrete.json";
  fs::path dir_;
};

TEST_F(CliTest, AssignedPolesWriteVerifiableFactors) {
  const auto r = invoke({"grcf", ex1_, "--alpha", "-1", "--poles", "-1,-2,-3",
                         "-o", path("out.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json doc = read_json(path("out.json"));
  EXPECT_EQ(doc["kind"], "right");
  EXPECT_EQ(doc["region"]["mode"], "assign");
  EXPECT_EQ(doc["M_minimal"]["A"].size(), 3u);
  EXPECT_EQ(doc["log"].size(), 3u);
  const auto v = invoke({"verify", ex1_, path("out.json")});
  EXPECT_EQ(v.code, kExitOk) << v.out;
  EXPECT_NE(v.out.find("result: PASS"), std::string::npos);
}

TEST_F(CliTest, LeftAndInnerVariantsVerify) {
  for (const std::string cmd : {"glcf", "grcfid", "glcfid"}) {
    const std::string out = path(cmd + ".json");
    const auto r = invoke({cmd, ex2_, "-o", out});
    ASSERT_EQ(r.code, kExitOk) << cmd << ": " << r.err;
    const auto v = invoke({"verify", ex2_, out, "--json"});
    EXPECT_EQ(v.code, kExitOk) << cmd << ": " << v.out;
    const Json rep = Json::parse(v.out);
    EXPECT_TRUE(rep["passed"].get<bool>());
  }
}

TEST_F(CliTest, MinimalDenominatorReplacesM) {
  ASSERT_EQ(invoke({"grcfid", ex2_, "--mindeg-den", "-o", path("m.json")}).code,
            kExitOk);
  const Json doc = read_json(path("m.json"));
  EXPECT_EQ(doc["M"], doc["M_minimal"]);
  EXPECT_EQ(doc["M"]["A"].size(), 3u);
  EXPECT_EQ(invoke({"verify", ex2_, path("m.json")}).code, kExitOk);
}

TEST_F(CliTest, ContinuousImproperInnerExitsNoSolution) {
  const auto r = invoke({"grcfid", ex1_});
  EXPECT_EQ(r.code, kExitNoSolution);
  EXPECT_NE(r.err.find("no solution exists"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, PolesOfDiscreteExample) {
  const auto r = invoke({"poles", ex2_});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("poles: {0, 2, inf x2}"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("2  bad, controllable, observable"), std::string::npos);
  EXPECT_NE(r.out.find("0  good"), std::string::npos);

  const auto j = invoke({"poles", ex2_, "--json"});
  const Json doc = Json::parse(j.out);
  EXPECT_EQ(doc["infinite"], 2);
  EXPECT_EQ(doc["finite"].size(), 2u);
}

TEST_F(CliTest, CorruptedFactorsFailVerification) {
  ASSERT_EQ(invoke({"grcf", ex1_, "-o", path("f.json")}).code, kExitOk);
  Json doc = read_json(path("f.json"));
  doc["N"]["D"][0][0] = doc["N"]["D"][0][0].get<double>() + 0.5;
  write_json(doc, path("bad.json"), std::cout);
  const auto v = invoke({"verify", ex1_, path("bad.json")});
  EXPECT_EQ(v.code, kExitVerification);
  EXPECT_NE(v.out.find("result: FAIL"), std::string::npos);
}

TEST_F(CliTest, StrictGainIsNumericalFailure) {
  const auto r = invoke({"grcf", ex1_, "--gain-kappa", "1e-6", "--strict-gain"});
  EXPECT_EQ(r.code, kExitNumerical);
  const auto w = invoke({"grcf", ex1_, "--gain-kappa", "1e-6", "-o", path("w.json")});
  EXPECT_EQ(w.code, kExitOk);
  EXPECT_NE(w.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"grcf"}).code, kExitUsage);
  EXPECT_EQ(invoke({"grcf", path("missing.json")}).code, kExitUsage);
  EXPECT_EQ(invoke({"grcf", ex1_, "--poles", "-1,x"}).code, kExitUsage);
  EXPECT_EQ(invoke({"grcf", ex1_, "--poles", "1"}).code, kExitUsage);
  EXPECT_EQ(invoke({"grcfid", ex2_, "--alpha", "0.5"}).code, kExitUsage);
  EXPECT_EQ(invoke({"verify", ex1_}).code, kExitUsage);
  std::ofstream(path("bad.json")) << "{\"A\": [[1, 2]], \"B\": [[1]], \"C\": [[1]]}";
  const auto r = invoke({"poles", path("bad.json")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("A must be square"), std::string::npos);
}

TEST_F(CliTest, HelpExitsZero) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("grcfid"), std::string::npos);
}

TEST_F(CliTest, SameSeedSameBytes) {
  ASSERT_EQ(invoke({"--seed", "7", "glcf", ex2_, "-o", path("a.json")}).code, kExitOk);
  ASSERT_EQ(invoke({"--seed", "7", "glcf", ex2_, "-o", path("b.json")}).code, kExitOk);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  EXPECT_EQ(read_json(path("a.json"))["seed"], 7);
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("DESCFACT_SEED", "11", 1);
  const auto env = invoke({"grcf", ex2_});
  const auto flag = invoke({"--seed", "3", "grcf", ex2_});
  ::unsetenv("DESCFACT_SEED");
  ASSERT_EQ(env.code, kExitOk);
  EXPECT_EQ(Json::parse(env.out)["seed"], 11);
  EXPECT_EQ(Json::parse(flag.out)["seed"], 3);
}

TEST(SystemFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-300, 300);
  const size_t n = 4, m = 2, p = 3;
  auto fill = [&](size_t count) {
    std::vector<double> v(count);
    for (double& x : v) x = std::ldexp(u(rng), ex(rng) / 10) / 3.0;
    return v;
  };
  const auto A = fill(n * n), E = fill(n * n), B = fill(n * m), C = fill(p * n),
             D = fill(p * m);
  descfact_system* raw = nullptr;
  ASSERT_EQ(descfact_system_create(DESCFACT_DISCRETE, n, m, p, A.data(), E.data(),
                                   B.data(), C.data(), D.data(), &raw),
            DESCFACT_OK);
  const SystemPtr sys(raw);
  const std::string text = to_text(system_to_json(sys.get()));
  const SystemPtr back = system_from_json(Json::parse(text));
  for (auto [id, ref] : {std::pair{DESCFACT_MAT_A, &A}, {DESCFACT_MAT_E, &E},
                         {DESCFACT_MAT_B, &B}, {DESCFACT_MAT_C, &C},
                         {DESCFACT_MAT_D, &D}}) {
    std::vector<double> got(ref->size());
    ASSERT_EQ(descfact_system_matrix(back.get(), id, got.data(), got.size()),
              DESCFACT_OK);
    EXPECT_EQ(std::memcmp(got.data(), ref->data(), got.size() * sizeof(double)), 0)
        << "matrix " << id;
  }
  EXPECT_EQ(to_text(system_to_json(back.get())), text);
}

TEST(SystemFile, IdentityAndZeroDefaults) {
  const SystemPtr sys = system_from_json(
      Json::parse(R"({"domain": "continuous", "A": [[-1]], "B": [[1]], "C": [[2]]})"));
  EXPECT_EQ(descfact_system_identity_e(sys.get()), 1);
  const Json back = system_to_json(sys.get());
  EXPECT_TRUE(back["E"].is_null());
  EXPECT_EQ(back["D"][0][0], 0.0);
}

TEST(ComplexText, ParseForms) {
  EXPECT_EQ(parse_complex("-1"), std::complex<double>(-1, 0));
  EXPECT_EQ(parse_complex(" -1+2i "), std::complex<double>(-1, 2));
  EXPECT_EQ(parse_complex("-1-2.5i"), std::complex<double>(-1, -2.5));
  EXPECT_EQ(parse_complex("3i"), std::complex<double>(0, 3));
  EXPECT_EQ(parse_complex("-i"), std::complex<double>(0, -1));
  EXPECT_EQ(parse_complex("1e-3-1e+2i"), std::complex<double>(1e-3, -1e2));
  EXPECT_THROW(parse_complex("1+2j"), std::invalid_argument);
  EXPECT_THROW(parse_complex(""), std::invalid_argument);
  EXPECT_EQ(parse_complex_list("-1,-2+i,-2-i").size(), 3u);
}

TEST(ComplexText, FormatRoundTrips) {
  for (const std::complex<double> z :
       {std::complex<double>(-1, 0), {0.1, -0.2}, {1.0 / 3.0, 2.0 / 3.0}, {-0.0, -0.0}}) {
    EXPECT_EQ(parse_complex(format_complex(z)), z);
  }
  EXPECT_EQ(format_complex({-0.0, -0.0}), "0+0i");
  EXPECT_EQ(format_complex({-1.5, 2}), "-1.5+2i");
}

}  // namespace
}  // namespace descfact_cli
