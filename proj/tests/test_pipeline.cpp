#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "pirhdy/eval/eval.h"
#include "pirhdy/grid/corpus_io.h"
#include "pirhdy/grid/vocabulary.h"
#include "pirhdy/pipeline/pipeline.h"
#include "pirhdy/util/binio.h"
#include "pirhdy/util/errors.h"
#include "support/smf_builder.h"

using namespace pirhdy;
namespace fs = std::filesystem;

namespace {

fs::path freshDir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void writeBytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// A small song in the shape the pipeline expects: quarter-note melody over a
// sustained C-E-G triad, 12 bars (three phrases, two periods) unless told
// otherwise. Distinct (octave, velocity, stride) triples keep phrase content
// pairwise distinct across songs.
std::vector<uint8_t> pipelineSong(int octaveBase, int velocity, int stride,
                                  int bars = 12) {
  static const int scale[7] = {0, 2, 4, 5, 7, 9, 11};
  testsupport::TrackBuilder meta;
  meta.timeSignature(0, 4, 2).tempo(0, 500000).keySignature(0, 0, false).endOfTrack();
  testsupport::TrackBuilder melody;
  for (int b = 0; b < bars; ++b)
    for (int k = 0; k < 4; ++k) {
      int pitch = 12 * octaveBase + scale[(b + k * stride) % 7];
      melody.noteOn(0, 0, pitch, velocity).noteOff(480, 0, pitch);
    }
  melody.endOfTrack();
  testsupport::TrackBuilder chords;
  for (int b = 0; b < bars; ++b) {
    chords.noteOn(0, 1, 24, 50).noteOn(0, 1, 28, 50).noteOn(0, 1, 31, 50);
    chords.noteOff(1920, 1, 24).noteOff(0, 1, 28).noteOff(0, 1, 31);
  }
  chords.endOfTrack();
  return testsupport::buildSmf(1, 480, {meta, melody, chords});
}

PipelineConfig tinyConfig(const fs::path& work) {
  PipelineConfig cfg;
  cfg.midiDir = (work / "midi").string();
  cfg.corpusOut = (work / "corpus").string();
  cfg.vocabOut = (work / "vocab.voc").string();
  cfg.modelOut = (work / "model.prm").string();
  cfg.reportOut = (work / "report.json").string();
  cfg.train.d = 8;
  cfg.train.epochs = 3;
  return cfg;
}

}  // namespace

TEST_CASE("pipeline config parses defaults and rejects bad input") {
  PipelineConfig cfg = parsePipelineConfig("{}");
  CHECK(cfg.train.d == TrainConfig{}.d);
  CHECK(cfg.train.fusion == FusionMode::WT);
  CHECK(cfg.limits.melodicValidMin == kMelodicValidRatioMin);
  CHECK(cfg.limits.harmonicValidMin == kHarmonicValidRatioMin);
  CHECK(cfg.limits.minPeriods == 2);
  CHECK(cfg.evalSeed == 1);
  CHECK(cfg.holdoutSongs.empty());

  cfg = parsePipelineConfig(R"({
    "d": 24, "fusion": "avg", "features": ["chroma", "ioi"],
    "midi_dir": "in", "holdout_songs": [3, 7], "eval_seed": 9,
    "melodic_valid": 0.6, "min_periods": 3
  })");
  CHECK(cfg.train.d == 24);
  CHECK(cfg.train.fusion == FusionMode::AVG);
  CHECK(cfg.train.features.chroma);
  CHECK(cfg.train.features.ioi);
  CHECK_FALSE(cfg.train.features.octave);
  CHECK_FALSE(cfg.train.features.velocity);
  CHECK_FALSE(cfg.train.features.state);
  CHECK(cfg.midiDir == "in");
  CHECK(cfg.holdoutSongs == std::vector<uint32_t>{3, 7});
  CHECK(cfg.evalSeed == 9);
  CHECK(cfg.limits.melodicValidMin == 0.6);
  CHECK(cfg.limits.minPeriods == 3);

  auto expectBad = [](const std::string& text) {
    try {
      parsePipelineConfig(text);
      FAIL_CHECK("accepted: " << text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadConfig);
    }
  };
  expectBad(R"({"frobnicate": 1})");        // unknown key
  expectBad(R"({"d": "ten"})");             // wrong type
  expectBad(R"({"d": 0})");
  expectBad(R"({"lr": 0.0})");
  expectBad(R"({"beta1": 1.0})");
  expectBad(R"({"batch_size": 0})");
  expectBad(R"({"negatives_per_positive": 0})");
  expectBad(R"({"melodic_valid": 1.5})");
  expectBad(R"({"min_periods": 0})");
  expectBad("[1, 2]");                      // not an object
}

TEST_CASE("feature list and fusion names parse strictly") {
  FeatureMask m = parseFeatureList("chroma, state");
  CHECK(m.chroma);
  CHECK(m.state);
  CHECK_FALSE(m.octave);
  CHECK_FALSE(m.ioi);
  CHECK_FALSE(m.velocity);
  FeatureMask all = parseFeatureList("velocity,ioi,octave,state,chroma");
  CHECK(all.octave);
  CHECK(all.velocity);
  try {
    parseFeatureList("chroma,pitch");
    FAIL("unknown feature accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
  }

  CHECK(parseFusionName("wt") == FusionMode::WT);
  CHECK(parseFusionName("avg") == FusionMode::AVG);
  CHECK(parseFusionName("melody") == FusionMode::MelodyOnly);
  CHECK(parseFusionName("harmony") == FusionMode::HarmonyOnly);
  try {
    parseFusionName("blend");
    FAIL("unknown fusion accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
  }
}

TEST_CASE("thread cap honors the environment variable") {
  unsetenv("PIRHDY_THREADS");
  CHECK(threadCap() >= 1);

  setenv("PIRHDY_THREADS", "3", 1);
  CHECK(threadCap() == 3);

  for (const char* bad : {"0", "-2", "abc", "4x"}) {
    setenv("PIRHDY_THREADS", bad, 1);
    try {
      threadCap();
      FAIL_CHECK("accepted PIRHDY_THREADS=" << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadConfig);
    }
  }
  unsetenv("PIRHDY_THREADS");
}

TEST_CASE("grid dumps round-trip and reject foreign bytes") {
  GridSong song;
  song.id = "roundtrip";
  song.stepsPerBar = 8;
  song.melody = {{60, 5, StepState::On}, {60, 5, StepState::Hold},
                 {-1, 0, StepState::Rest}, {62, 6, StepState::On}};
  AccompTrack low;
  low.octave = 2;
  low.cells = {{0b10010001, 4, StepState::On}, {0b10010001, 4, StepState::Hold},
               {0, 0, StepState::Rest}, {0b100, 3, StepState::On}};
  AccompTrack high;
  high.octave = 5;
  high.cells = {{0b1, 2, StepState::On}, {0, 0, StepState::Rest},
                {0b11, 7, StepState::On}, {0b11, 7, StepState::Off}};
  song.accompaniment = {low, high};

  fs::path dir = freshDir("pirhdy_grd_roundtrip");
  std::string path = (dir / "song.grd").string();
  writeGridSong(path, song);
  GridSong back = readGridSong(path);
  CHECK(back.id == song.id);
  CHECK(back.stepsPerBar == song.stepsPerBar);
  REQUIRE(back.melody.size() == song.melody.size());
  for (size_t i = 0; i < song.melody.size(); ++i) {
    CHECK(back.melody[i].pitch == song.melody[i].pitch);
    CHECK(back.melody[i].velocity == song.melody[i].velocity);
    CHECK(back.melody[i].state == song.melody[i].state);
  }
  REQUIRE(back.accompaniment.size() == 2);
  CHECK(back.accompaniment[0].octave == 2);
  CHECK(back.accompaniment[1].octave == 5);
  for (size_t t = 0; t < 2; ++t)
    for (size_t i = 0; i < 4; ++i) {
      CHECK(back.accompaniment[t].cells[i].pcMask ==
            song.accompaniment[t].cells[i].pcMask);
      CHECK(back.accompaniment[t].cells[i].state ==
            song.accompaniment[t].cells[i].state);
    }

  std::string foreign = (dir / "foreign.grd").string();
  writeBytes(foreign, {'P', 'R', 'C', '1', 0, 0, 0, 0});
  try {
    readGridSong(foreign);
    FAIL("foreign magic accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadFile);
  }

  auto size = fs::file_size(path);
  fs::resize_file(path, size - 3);
  try {
    readGridSong(path);
    FAIL("truncated grid accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadFile);
  }
}

TEST_CASE("preprocess accounts for every input file") {
  fs::path work = freshDir("pirhdy_pre_manifest");
  fs::create_directories(work / "midi");
  writeBytes(work / "midi" / "good1.mid", pipelineSong(4, 60, 1));
  writeBytes(work / "midi" / "short.mid", pipelineSong(4, 60, 1, 4));
  writeBytes(work / "midi" / "junk.mid", {'n', 'o', 't', ' ', 'm', 'i', 'd', 'i'});

  PipelineConfig cfg = tinyConfig(work);
  PreprocessResult res = cmdPreprocess(cfg);
  REQUIRE(res.entries.size() == 3);
  CHECK(res.okCount == 1);
  CHECK(res.entries[0].file == "good1.mid");
  CHECK(res.entries[0].status == "ok");
  CHECK(res.entries[1].file == "junk.mid");
  CHECK(res.entries[1].status == "error");
  CHECK_FALSE(res.entries[1].detail.empty());
  CHECK(res.entries[2].file == "short.mid");
  CHECK(res.entries[2].status == "rejected");

  nlohmann::json manifest;
  std::ifstream(work / "corpus" / "manifest.json") >> manifest;
  CHECK(manifest["counts"]["ok"] == 1);
  CHECK(manifest["counts"]["rejected"] == 1);
  CHECK(manifest["counts"]["error"] == 1);
  CHECK(manifest["inputs"].size() == 3);
  CHECK(fs::exists(work / "corpus" / "grids" / "good1.grd"));
  CHECK_FALSE(fs::exists(work / "corpus" / "grids" / "short.grd"));

  // A second pass over the same inputs rewrites the same bytes.
  uint32_t before = fnv1aFile((work / "corpus" / "manifest.json").string());
  cmdPreprocess(cfg);
  CHECK(fnv1aFile((work / "corpus" / "manifest.json").string()) == before);

  PipelineConfig missing = cfg;
  missing.midiDir = (work / "nowhere").string();
  try {
    cmdPreprocess(missing);
    FAIL("missing midi dir accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
  }
}

TEST_CASE("pipeline runs end to end with holdout, idempotency, and guards") {
  fs::path work = freshDir("pirhdy_pipe_e2e");
  fs::create_directories(work / "midi");
  // 26 songs with pairwise-distinct (octave, velocity, stride) content: the
  // melody-completion builder needs 49 distinct foreign phrases per query.
  for (int i = 0; i < 26; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "t%02d.mid", i);
    writeBytes(work / "midi" / name,
               pipelineSong(3 + i % 5, 6 + 13 * (i % 10), 1 + i % 6));
  }
  PipelineConfig cfg = tinyConfig(work);
  cfg.holdoutSongs = {0};

  PreprocessResult res = cmdPreprocess(cfg);
  CHECK(res.okCount == 26);

  cmdVocab(cfg);
  Vocabulary vocab = Vocabulary::load(cfg.vocabOut);
  CHECK(vocab.chroma.size() == 14);  // 12 pitch classes + rest + C-E-G
  CHECK(vocab.chroma.back() == "C-E-G");

  cmdCorpus(cfg);
  LocalCorpus local = readLocalCorpus(cfg.corpusOut + "/local.prc");
  // 12-bar songs: 48 on-events, minus two window edges each side, times five
  // records per group; the holdout song contributes none.
  CHECK(local.records.size() == 25 * 44 * 5);
  CHECK(local.vocabHash == vocab.fingerprint());
  PairCorpus melodic = readPairCorpus(cfg.corpusOut + "/melodic.gpc");
  CHECK(melodic.records.size() == 26 * 2);  // pairs kept for holdout songs too
  size_t holdoutPairs = 0;
  for (const auto& rec : melodic.records)
    if (rec.songIndex == 0) ++holdoutPairs;
  CHECK(holdoutPairs == 2);
  PairCorpus harmonic = readPairCorpus(cfg.corpusOut + "/harmonic.gpc");
  CHECK(harmonic.records.size() == 26 * 3);

  TrainResult pre = cmdTrain(cfg);
  CHECK(pre.epochs.size() == 4);  // baseline row + three epochs
  CHECK(fs::exists(cfg.modelOut));
  CHECK(fs::exists(cfg.modelOut + ".json"));
  CHECK(fs::exists(cfg.modelOut + ".csv"));

  // Reruns are byte-identical.
  uint32_t localHash = fnv1aFile(cfg.corpusOut + "/local.prc");
  uint32_t modelHash = fnv1aFile(cfg.modelOut);
  cmdCorpus(cfg);
  cmdTrain(cfg);
  CHECK(fnv1aFile(cfg.corpusOut + "/local.prc") == localHash);
  CHECK(fnv1aFile(cfg.modelOut) == modelHash);

  cmdFinetune(cfg, GlobalMode::GM);
  std::string gmPath = finetuneCheckpointPath(cfg, GlobalMode::GM);
  CHECK(gmPath == (work / "model_gm.prm").string());
  REQUIRE(fs::exists(gmPath));
  nlohmann::json side;
  std::ifstream(gmPath + ".json") >> side;
  CHECK(side["stage"] == "GM");

  MetricReport rep = cmdEval(cfg, "melody");
  CHECK(rep.nInstances == 2);  // the two successor pairs of holdout song 0
  CHECK(rep.map >= 0.0);
  CHECK(rep.map <= 1.0);
  CHECK(rep.hits.size() == kHitsCutoffs.size());
  nlohmann::json report;
  std::ifstream(cfg.reportOut) >> report;
  CHECK(report["task"] == "melody");
  CHECK(report["mode"] == "GM");
  CHECK(report["n_instances"] == 2);
  CHECK(report["hits"].size() == 4);
  CHECK(report.contains("corpus_hash"));

  std::string vecPath = cmdExport(cfg, GlobalMode::GM);
  std::ifstream vec(vecPath);
  std::string header;
  std::getline(vec, header);
  CHECK(header == "PIRHDY d=8 mode=GM");
  size_t lines = 0;
  for (std::string line; std::getline(vec, line);) ++lines;
  CHECK(lines == (14 + 11 + 4) + 26);  // vocabulary rows plus one per song

  // Guards: wrong stage, unknown task, double fine-tune, stale vocabulary.
  try {
    cmdEval(cfg, "melody", cfg.modelOut);
    FAIL("pretrain checkpoint accepted for evaluation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotTrained);
  }
  try {
    cmdEval(cfg, "bogus");
    FAIL("unknown task accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
  }
  try {
    cmdFinetune(cfg, GlobalMode::GM, gmPath);
    FAIL("fine-tuned checkpoint accepted for fine-tuning");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPretrained);
  }
  try {
    cmdExport(cfg, GlobalMode::GH, gmPath);
    FAIL("GM checkpoint accepted for GH export");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotTrained);
  }
  Vocabulary stale = Vocabulary::load(cfg.vocabOut);
  stale.internChroma("C-D-E-F");
  stale.save(cfg.vocabOut);
  try {
    cmdTrain(cfg);
    FAIL("stale vocabulary accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadFile);
  }
}
