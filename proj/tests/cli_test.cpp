#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "lsi_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome run(const std::string& args) {
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = std::string(LSI_BENCH_PATH) + " " + args + " 2>" + err.string();
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

std::string column(const std::string& csv, std::size_t row, const std::string& name) {
  const auto ls = lines(csv);
  const auto header = fields(ls.at(0));
  const auto values = fields(ls.at(row));
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return values.at(i);
  }
  return "<missing " + name + ">";
}

/// Generated once: 10 k clustered points.
const std::string& small_data() {
  static const std::string path = [] {
    const std::string p = (scratch_dir() / "small.csv").string();
    run("gen dataset --n 10000 --clusters 5 --seed 3 --out " + p);
    return p;
  }();
  return path;
}

}  // namespace

TEST(Cli, BuildSummary) {
  const std::string data = (scratch_dir() / "big.csv").string();
  ASSERT_EQ(run("gen dataset --n 100000 --out " + data).code, 0);
  const Outcome a = run("build --data " + data + " --index fixed --leaf-size 10000");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(column(a.out, 1, "partitions"), "10");
  EXPECT_EQ(column(a.out, 1, "points"), "100000");
  const Outcome b = run("build --data " + data + " --index fixed --leaf-size 10000");
  EXPECT_EQ(column(a.out, 1, "index_bytes"), column(b.out, 1, "index_bytes"));
}

TEST(Cli, BuildWritesIndexFile) {
  const std::string idx = (scratch_dir() / "idx.lsix").string();
  const Outcome r = run("build --data " + small_data() + " --index hilbert --out " + idx);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(idx).substr(0, 5), "LSIX1");
}

TEST(Cli, EmptyDataset) {
  const fs::path p = scratch_dir() / "empty.csv";
  std::ofstream(p) << "lat,lon\n";
  const Outcome r = run("build --data " + p.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("empty dataset"), std::string::npos);
}

TEST(Cli, IngestionErrors) {
  const fs::path p = scratch_dir() / "bad.csv";
  std::ofstream(p) << "lat,lon\n40.7,-73.9\n91.0,0.0\n";
  const Outcome r = run("build --data " + p.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  EXPECT_EQ(run("build --data /nonexistent.csv").code, 2);
}

TEST(Cli, UsageAndConfigErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("build --data " + small_data() + " --index btree").code, 1);
  EXPECT_EQ(run("build --data " + small_data() + " --leaf-size 0").code, 1);
  EXPECT_EQ(run("build --data " + small_data() + " --hilbert-order 40").code, 1);
  EXPECT_EQ(run("query --data " + small_data() + " --selectivity 2").code, 1);
  EXPECT_EQ(run("tune --data " + small_data() + " --sweep 100,10").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, QueryVerifiedAllTypesAndTechniques) {
  for (const char* type : {"range", "point", "distance", "join"}) {
    for (const char* index : {"fixed", "adaptive", "kdtree", "quadtree", "str", "hilbert"}) {
      for (const char* search : {"binary", "spline"}) {
        const Outcome r = run("query --data " + small_data() + " --index " + index + " --search " + search +
                          " --query-type " + type + " --queries 100 --selectivity 1e-3 --leaf-size 256" +
                          " --verify --repetitions 1");
        ASSERT_EQ(r.code, 0) << type << " " << index << " " << r.err;
        EXPECT_EQ(column(r.out, 1, "verified"), "yes");
        EXPECT_EQ(column(r.out, 1, "query_type"), type);
        EXPECT_EQ(column(r.out, 1, "queries"), "100");
      }
    }
  }
}

TEST(Cli, ChecksumIndependentOfTechnique) {
  std::string first;
  for (const char* index : {"fixed", "kdtree", "hilbert"}) {
    const Outcome r = run("query --data " + small_data() + " --index " + index + " --queries 50 --repetitions 1");
    ASSERT_EQ(r.code, 0) << r.err;
    if (first.empty()) first = column(r.out, 1, "checksum");
    EXPECT_EQ(column(r.out, 1, "checksum"), first);
  }
}

TEST(Cli, PointRowsHaveNoScanPhase) {
  const Outcome r = run("query --data " + small_data() + " --query-type point --queries 200 --plot-data");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::stod(column(r.out, 1, "scan_ns")), 0.0);
  EXPECT_EQ(std::stod(column(r.out, 1, "avg_partitions")), 1.0);
  EXPECT_GT(std::stod(column(r.out, 1, "refinement_ns")), 0.0);
}

TEST(Cli, WorkloadFileRoundTrip) {
  const std::string w = (scratch_dir() / "w.csv").string();
  ASSERT_EQ(run("gen workload --data " + small_data() + " --query-type distance --queries 30 --out " + w).code, 0);
  EXPECT_EQ(lines(slurp(w)).size(), 31u);
  const Outcome r = run("query --data " + small_data() + " --workload " + w + " --verify --repetitions 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(column(r.out, 1, "query_type"), "distance");
  EXPECT_EQ(column(r.out, 1, "queries"), "30");
}

TEST(Cli, JoinSkipsMalformedPolygons) {
  const fs::path p = scratch_dir() / "polys.txt";
  std::ofstream(p) << "a;40.6 -74.2,40.6 -73.8,40.9 -73.8\nbroken;40.6 -74.2,40.7 -74.0\n"
                   << "b;40.7 -74.0,40.7 -73.9,40.8 -73.9,40.8 -74.0\n";
  const Outcome r = run("query --data " + small_data() + " --polygons " + p.string() + " --verify");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(column(r.out, 1, "queries"), "2");
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST(Cli, CorruptWorkloadIsInputError) {
  const fs::path w = scratch_dir() / "bad_w.csv";
  std::ofstream(w) << "range,xl,yl,xh,yh\n1,2,3\n";
  EXPECT_EQ(run("query --data " + small_data() + " --workload " + w.string()).code, 2);
}

TEST(Cli, TuneSingleAndSweep) {
  const Outcome one = run("tune --data " + small_data() + " --sweep 128 --queries 50 --repetitions 1");
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_NE(one.err.find("best leaf size: 128"), std::string::npos);

  const Outcome r = run("tune --data " + small_data() + " --sweep 10,100,1000,10000 --queries 100 --repetitions 1");
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(lines(r.out).size(), 5u);
  for (std::size_t i = 2; i <= 4; ++i) {
    EXPECT_GE(std::stod(column(r.out, i, "avg_points_scanned")), std::stod(column(r.out, i - 1, "avg_points_scanned")));
    EXPECT_LE(std::stoul(column(r.out, i, "cells")), std::stoul(column(r.out, i - 1, "cells")));
  }
}

TEST(Cli, CompareShape) {
  const std::string out = (scratch_dir() / "cmp.csv").string();
  const Outcome r = run("compare --data " + small_data() +
                    " --techniques fixed --searches binary,spline --sweep 256,1024 --queries 50 --repetitions 1" +
                    " --verify --out " + out);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out);
  ASSERT_EQ(lines(csv).size(), 3u);
  EXPECT_EQ(column(csv, 1, "search"), "binary");
  EXPECT_EQ(column(csv, 2, "search"), "spline");
  const double ratio = std::stod(column(csv, 1, "speedup"));
  const double expected = std::stod(column(csv, 1, "mean_ns")) / std::stod(column(csv, 2, "mean_ns"));
  EXPECT_NEAR(ratio, expected, 1e-3 * expected);
}

TEST(Cli, GenDatasetDeterministic) {
  const Outcome a = run("gen dataset --n 500 --seed 9");
  const Outcome b = run("gen dataset --n 500 --seed 9");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 501u);
  EXPECT_EQ(lines(a.out)[0], "lat,lon");
  const Outcome c = run("gen dataset --n 50 --clusters 0 --domain 0,0,1,1");
  ASSERT_EQ(c.code, 0) << c.err;
  for (std::size_t i = 1; i < lines(c.out).size(); ++i) {
    const auto f = fields(lines(c.out)[i]);
    EXPECT_GE(std::stod(f[0]), 0.0);
    EXPECT_LE(std::stod(f[1]), 1.0);
  }
}
