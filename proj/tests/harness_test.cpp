// Tests for scorex/harness.h -- annotations, config, batch run and result files.

#include "scorex/harness.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "scorex/errors.h"
#include "scorex/metrics.h"
#include "test_support.h"

namespace scorex {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory per test.
class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / ("scorex_harness_" + std::string(info->name()));
    fs::remove_all(root_);
    fs::create_directories(root_ / "corpus");
  }
  void TearDown() override { fs::remove_all(root_); }

  // 12-bar piece: bars < 8 use onsets {0,4,8,12} low, later bars {2,6,10} high.
  void write_piece(const std::string& name) {
    std::vector<std::set<int>> bars;
    QuantizedScore qs;
    qs.bars.resize(12);
    for (int b = 0; b < 12; ++b) {
      const bool past = b < 8;
      for (int p : past ? std::vector<int>{0, 4, 8, 12} : std::vector<int>{2, 6, 10}) {
        qs.bars[static_cast<std::size_t>(b)].push_back({p, past ? 40 + p : 80 + p, 2, 72});
      }
    }
    write_file_bytes((root_ / "corpus" / name).string(), write_midi(dequantize(qs)));
  }

  void write_annotations(const std::string& json) { std::ofstream(root_ / "ann.json") << json; }

  ExperimentConfig config(const std::string& out = "out") const {
    ExperimentConfig c;
    c.corpus_dir = (root_ / "corpus").string();
    c.annotations = (root_ / "ann.json").string();
    c.output_dir = (root_ / out).string();
    c.gap_bars = 4;
    c.seed = 7;
    return c;
  }

  fs::path root_;
};

TEST(Annotations, SchemaExample) {
  auto m = parse_annotations(R"([{"file":"a.mid","boundary_bar":8}])");
  EXPECT_EQ(m, (std::map<std::string, int>{{"a.mid", 8}}));
}

TEST(Annotations, Errors) {
  EXPECT_THROW(parse_annotations("[]"), EmptyAnnotations);
  try {
    parse_annotations(R"([{"file":"a.mid","boundary_bar":0}])");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.key(), "[0].boundary_bar");
  }
  EXPECT_THROW(parse_annotations(R"([{"file":"a.mid"}])"), SchemaError);
  EXPECT_THROW(parse_annotations(R"([{"boundary_bar":3}])"), SchemaError);
  EXPECT_THROW(parse_annotations(R"({"file":"a.mid","boundary_bar":3})"), SchemaError);
  EXPECT_THROW(parse_annotations(R"([{"file":"a.mid","boundary_bar":3},{"file":"a.mid","boundary_bar":4}])"),
               SchemaError);
  EXPECT_THROW(parse_annotations("[{"), SchemaError);
}

TEST(PieceSeed, XorWithStableHash) {
  EXPECT_EQ(piece_seed(0, ""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(piece_seed(5, "a.mid") ^ 5, piece_seed(0, "a.mid"));
  EXPECT_NE(piece_seed(5, "a.mid"), piece_seed(5, "b.mid"));
}

TEST(ResultFiles, CsvSchemaAndSummaryArithmetic) {
  PieceResult a;
  a.piece_id = "a.mid";
  a.boundary_bar = 8;
  a.bars_in = 12;
  a.bars_out = 16;
  a.gs1 = 0.5;
  a.gs2 = 0.7;
  a.delta_gs = 0.2;
  a.rhs1 = -3.0;
  a.rhs2 = -2.5;
  a.delta_rhs = 0.5;

  std::string csv = results_csv({a});
  std::istringstream lines(csv);
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(header, kCsvHeader);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);
  EXPECT_EQ(row, "a.mid,8,12,16,0.5,0.7,0.2,-3,-2.5,0.5");

  PieceResult b = a;
  b.piece_id = "b.mid";
  b.delta_gs = -0.1;
  auto summary = nlohmann::json::parse(summary_json({a, b}));
  EXPECT_EQ(summary["count"], 2);
  EXPECT_NEAR(summary["delta_gs"]["mean"].get<double>(), 0.05, 1e-15);
  EXPECT_NEAR(summary["delta_gs"]["stddev"].get<double>(), 0.15, 1e-15);
  EXPECT_EQ(summary["delta_gs"]["positive"], 1);
  EXPECT_EQ(summary["delta_rhs"]["positive"], 2);
}

TEST(ResultFiles, EmptyResultsAreRejected) { EXPECT_THROW(emit_results({}, "/tmp/unused"), std::invalid_argument); }

TEST_F(HarnessTest, RunProducesOrderedResultsAndFiles) {
  write_piece("b.mid");
  write_piece("a.mid");
  write_annotations(R"([{"file":"b.mid","boundary_bar":8},{"file":"a.mid","boundary_bar":8}])");
  auto cfg = config();
  cfg.infiller.kind = InfillerKind::CopyFuture;
  RunReport report = run_experiment(cfg);
  ASSERT_EQ(report.results.size(), 2u);
  EXPECT_EQ(report.results[0].piece_id, "a.mid");
  EXPECT_EQ(report.results[1].piece_id, "b.mid");
  for (const auto& r : report.results) {
    ASSERT_TRUE(r.ok()) << *r.error;
    EXPECT_EQ(r.bars_in, 12);
    EXPECT_EQ(r.bars_out, 16);
    EXPECT_EQ(r.bars_out - r.bars_in, cfg.gap_bars);
    EXPECT_EQ(r.gs2, 1.0);
    EXPECT_GT(r.delta_gs, 0.0);
    EXPECT_GT(r.delta_rhs, 0.0);
    EXPECT_EQ(r.delta_gs, r.gs2 - r.gs1);
    EXPECT_EQ(r.delta_rhs, r.rhs2 - r.rhs1);
  }
  emit_results(report.results, cfg.output_dir);
  for (const char* f : {"results.csv", "results.json", "summary.json", "a_expanded.mid", "b_expanded.mid"}) {
    EXPECT_TRUE(fs::exists(fs::path(cfg.output_dir) / f)) << f;
  }
}

TEST_F(HarnessTest, ExpandedMidiKeepsContextsThroughRoundTrip) {
  write_piece("a.mid");
  write_annotations(R"([{"file":"a.mid","boundary_bar":5}])");
  auto cfg = config();
  cfg.infiller.kind = InfillerKind::Random;
  RunReport report = run_experiment(cfg);
  ASSERT_TRUE(report.results.at(0).ok());

  auto original = encode(quantize(parse_midi(read_file_bytes((root_ / "corpus" / "a.mid").string()))));
  auto expanded =
      encode(quantize(parse_midi(read_file_bytes((fs::path(cfg.output_dir) / "a_expanded.mid").string()))));
  ASSERT_EQ(bar_count(expanded), 16u);
  EXPECT_EQ(slice_bars(expanded, 0, 5), slice_bars(original, 0, 5));
  EXPECT_EQ(slice_bars(expanded, 9, 16), slice_bars(original, 5, 12));
}

TEST_F(HarnessTest, BadPiecesBecomeErrorRows) {
  write_piece("a.mid");
  write_piece("c.mid");
  std::ofstream(root_ / "corpus" / "b.mid") << "this is not a MIDI file";
  write_piece("unannotated.mid");
  write_annotations(
      R"([{"file":"a.mid","boundary_bar":8},{"file":"b.mid","boundary_bar":8},{"file":"c.mid","boundary_bar":8},)"
      R"({"file":"missing.mid","boundary_bar":2},{"file":"short.mid","boundary_bar":30}])");
  write_piece("short.mid");
  RunReport report = run_experiment(config());
  ASSERT_EQ(report.results.size(), 5u);
  EXPECT_TRUE(report.results[0].ok());
  EXPECT_FALSE(report.results[1].ok());  // b.mid: unparseable
  EXPECT_TRUE(report.results[2].ok());
  EXPECT_FALSE(report.results[3].ok());  // missing.mid
  EXPECT_FALSE(report.results[4].ok());  // boundary beyond the piece
  EXPECT_EQ(report.failures(), 3u);
  bool warned = std::any_of(report.warnings.begin(), report.warnings.end(),
                            [](const std::string& w) { return w.find("unannotated.mid") != std::string::npos; });
  EXPECT_TRUE(warned);

  std::string csv = results_csv(report.results);
  EXPECT_NE(csv.find("b.mid,8,,,,,,,,\n"), std::string::npos);
  auto json = nlohmann::json::parse(results_json(report.results));
  EXPECT_TRUE(json[1].contains("error"));
  EXPECT_FALSE(json[0].contains("error"));
}

TEST_F(HarnessTest, CsvAndJsonCarryIdenticalValues) {
  write_piece("a.mid");
  write_piece("b.mid");
  write_annotations(R"([{"file":"a.mid","boundary_bar":3},{"file":"b.mid","boundary_bar":9}])");
  auto cfg = config();
  cfg.infiller.kind = InfillerKind::Random;
  auto report = run_experiment(cfg);
  emit_results(report.results, cfg.output_dir);

  auto json = nlohmann::json::parse(slurp(fs::path(cfg.output_dir) / "results.json"));
  std::istringstream csv(slurp(fs::path(cfg.output_dir) / "results.csv"));
  std::string line;
  std::getline(csv, line);
  const std::vector<std::string> columns = {"piece_id", "boundary_bar", "bars_in", "bars_out", "gs1",
                                            "gs2",      "delta_gs",     "rhs1",    "rhs2",     "delta_rhs"};
  std::size_t row = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    ASSERT_EQ(fields.size(), columns.size());
    const auto& obj = json.at(row++);
    EXPECT_EQ(fields[0], obj["piece_id"].get<std::string>());
    for (std::size_t i = 1; i < columns.size(); ++i) {
      EXPECT_EQ(std::stod(fields[i]), obj[columns[i]].get<double>()) << columns[i];
    }
  }
  EXPECT_EQ(row, 2u);
}

TEST_F(HarnessTest, RepeatedRunsAreByteIdenticalAndJobsIndependent) {
  for (const char* name : {"a.mid", "b.mid", "c.mid", "d.mid"}) write_piece(name);
  write_annotations(
      R"([{"file":"a.mid","boundary_bar":4},{"file":"b.mid","boundary_bar":6},)"
      R"({"file":"c.mid","boundary_bar":8},{"file":"d.mid","boundary_bar":10}])");
  std::vector<std::string> outputs;
  for (int jobs : {1, 1, 3}) {
    auto cfg = config("out" + std::to_string(outputs.size()));
    cfg.infiller.kind = InfillerKind::Markov;
    cfg.jobs = jobs;
    auto report = run_experiment(cfg);
    emit_results(report.results, cfg.output_dir);
    std::string all;
    for (const char* f : {"results.csv", "results.json", "summary.json", "a_expanded.mid", "b_expanded.mid",
                          "c_expanded.mid", "d_expanded.mid"}) {
      all += slurp(fs::path(cfg.output_dir) / f);
    }
    outputs.push_back(all);
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  EXPECT_EQ(outputs[0], outputs[2]);
}

TEST_F(HarnessTest, ConfigFileResolvesRelativePaths) {
  std::ofstream(root_ / "cfg.json") << R"({"corpus_dir":"corpus","annotations":"ann.json","output_dir":"o",)"
                                    << R"("gap_bars":2,"infiller":"markov","order":3,"seed":99,"positions_per_bar":12})";
  auto c = load_config((root_ / "cfg.json").string());
  EXPECT_EQ(fs::path(c.corpus_dir), root_ / "corpus");
  EXPECT_EQ(fs::path(c.annotations), root_ / "ann.json");
  EXPECT_EQ(c.gap_bars, 2);
  EXPECT_EQ(c.infiller.kind, InfillerKind::Markov);
  EXPECT_EQ(c.infiller.order, 3);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.positions_per_bar, 12);

  std::ofstream(root_ / "bad.json") << R"({"corpus_dir":"corpus","annotations":"ann.json","output_dir":"o","gap_bars":0})";
  EXPECT_THROW(load_config((root_ / "bad.json").string()), SchemaError);
  std::ofstream(root_ / "bad2.json") << R"({"corpus_dir":"corpus","annotations":"ann.json","output_dir":"o","infiller":"vli"})";
  EXPECT_THROW(load_config((root_ / "bad2.json").string()), SchemaError);
}

TEST_F(HarnessTest, MissingInputsFailValidation) {
  auto cfg = config();
  EXPECT_THROW(run_experiment(cfg), SchemaError);  // no annotation file yet
  write_annotations(R"([{"file":"a.mid","boundary_bar":8}])");
  cfg.gap_bars = 0;
  EXPECT_THROW(run_experiment(cfg), SchemaError);
}

}  // namespace
}  // namespace scorex
