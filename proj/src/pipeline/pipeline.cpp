#include "pirhdy/pipeline/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "json.hpp"
#include "pirhdy/grid/corpus_io.h"
#include "pirhdy/grid/grid.h"
#include "pirhdy/midi/smf.h"
#include "pirhdy/midi/timeline.h"
#include "pirhdy/util/binio.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pirhdy {
namespace {

constexpr const char* kConfigKeys[] = {
    "d",          "w_m",          "w_h",        "rnn_layers", "fusion",
    "features",   "lr",           "beta1",      "beta2",      "batch_size",
    "epochs",     "seed",         "negatives_per_positive",   "midi_dir",
    "corpus_out", "vocab_out",    "model_out",  "report_out", "melodic_valid",
    "harmonic_valid", "min_periods", "eval_seed", "holdout_songs"};

constexpr const char* kTrainKeys[] = {
    "d",      "w_m",    "w_h",        "rnn_layers", "fusion",
    "features", "lr",   "beta1",      "beta2",      "batch_size",
    "epochs", "seed",   "negatives_per_positive"};

template <typename T>
T getAs(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    raise(ErrorCode::BadConfig, std::string("bad value for '") + key + "'");
  }
}

const char* fusionName(FusionMode mode) {
  switch (mode) {
    case FusionMode::WT: return "wt";
    case FusionMode::AVG: return "avg";
    case FusionMode::MelodyOnly: return "melody";
    case FusionMode::HarmonyOnly: return "harmony";
  }
  return "wt";
}

json featuresToJson(const FeatureMask& f) {
  json arr = json::array();
  if (f.chroma) arr.push_back("chroma");
  if (f.octave) arr.push_back("octave");
  if (f.ioi) arr.push_back("ioi");
  if (f.state) arr.push_back("state");
  if (f.velocity) arr.push_back("velocity");
  return arr;
}

FeatureMask featuresFromNames(const std::vector<std::string>& names) {
  FeatureMask f{false, false, false, false, false};
  for (const auto& name : names) {
    if (name == "chroma") f.chroma = true;
    else if (name == "octave") f.octave = true;
    else if (name == "ioi") f.ioi = true;
    else if (name == "state") f.state = true;
    else if (name == "velocity") f.velocity = true;
    else raise(ErrorCode::BadConfig, "unknown feature: " + name);
  }
  return f;
}

json trainConfigToJson(const TrainConfig& cfg) {
  json j;
  j["d"] = cfg.d;
  j["w_m"] = cfg.wM;
  j["w_h"] = cfg.wH;
  j["rnn_layers"] = cfg.rnnLayers;
  j["fusion"] = fusionName(cfg.fusion);
  j["features"] = featuresToJson(cfg.features);
  j["lr"] = cfg.lr;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["batch_size"] = cfg.batchSize;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["negatives_per_positive"] = cfg.negativesPerPositive;
  return j;
}

TrainConfig trainConfigFromJson(const json& j, TrainConfig base) {
  base.d = getAs(j, "d", base.d);
  base.wM = getAs(j, "w_m", base.wM);
  base.wH = getAs(j, "w_h", base.wH);
  base.rnnLayers = getAs(j, "rnn_layers", base.rnnLayers);
  if (j.contains("fusion")) base.fusion = parseFusionName(getAs<std::string>(j, "fusion", ""));
  if (j.contains("features"))
    base.features = featuresFromNames(getAs<std::vector<std::string>>(j, "features", {}));
  base.lr = getAs(j, "lr", base.lr);
  base.beta1 = getAs(j, "beta1", base.beta1);
  base.beta2 = getAs(j, "beta2", base.beta2);
  base.batchSize = getAs(j, "batch_size", base.batchSize);
  base.epochs = getAs(j, "epochs", base.epochs);
  base.seed = getAs(j, "seed", base.seed);
  base.negativesPerPositive = getAs(j, "negatives_per_positive", base.negativesPerPositive);
  return base;
}

void validateConfig(const PipelineConfig& cfg) {
  const auto& t = cfg.train;
  if (t.d < 1) raise(ErrorCode::BadConfig, "d must be positive");
  if (t.wM < 1) raise(ErrorCode::BadConfig, "w_m must be at least 1");
  if (t.wH < 0) raise(ErrorCode::BadConfig, "w_h must be non-negative");
  if (t.rnnLayers < 1) raise(ErrorCode::BadConfig, "rnn_layers must be at least 1");
  if (!(t.lr > 0.0)) raise(ErrorCode::BadConfig, "lr must be positive");
  if (t.beta1 < 0.0 || t.beta1 >= 1.0 || t.beta2 < 0.0 || t.beta2 >= 1.0)
    raise(ErrorCode::BadConfig, "betas must lie in [0,1)");
  if (t.batchSize < 1) raise(ErrorCode::BadConfig, "batch_size must be at least 1");
  if (t.epochs < 0) raise(ErrorCode::BadConfig, "epochs must be non-negative");
  if (t.negativesPerPositive < 1)
    raise(ErrorCode::BadConfig, "negatives_per_positive must be at least 1");
  if (cfg.limits.melodicValidMin < 0.0 || cfg.limits.melodicValidMin > 1.0 ||
      cfg.limits.harmonicValidMin < 0.0 || cfg.limits.harmonicValidMin > 1.0)
    raise(ErrorCode::BadConfig, "valid-ratio limits must lie in [0,1]");
  if (cfg.limits.minPeriods < 1) raise(ErrorCode::BadConfig, "min_periods must be at least 1");
}

json readJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::BadFile, "cannot open: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    raise(ErrorCode::BadConfig, path + ": " + e.what());
  }
}

void writeJsonFile(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::BadFile, "cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) raise(ErrorCode::BadFile, "write failed: " + path);
}

void requirePath(const std::string& value, const char* name) {
  if (value.empty()) raise(ErrorCode::BadConfig, std::string(name) + " is not set");
}

/// Sorted .grd paths under the working directory.
std::vector<fs::path> listGrids(const PipelineConfig& cfg) {
  const fs::path dir = fs::path(cfg.corpusOut) / "grids";
  if (!fs::is_directory(dir))
    raise(ErrorCode::BadFile, "no grid dumps at " + dir.string() + " (run preprocess first)");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".grd")
      out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) raise(ErrorCode::BadFile, "no grid dumps at " + dir.string());
  return out;
}

std::string pathWithSuffix(const std::string& base, const std::string& suffix,
                           const std::string& newExt = "") {
  fs::path p(base);
  const std::string ext = newExt.empty() ? p.extension().string() : newExt;
  fs::path out = p.parent_path() / (p.stem().string() + suffix + ext);
  return out.string();
}

void writeLossCsv(const std::string& path, const TrainResult& result) {
  std::string text = "epoch,train_bce,holdout_bce\n";
  char buf[80];
  for (const auto& row : result.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", row.epoch, row.trainBce, row.holdoutBce);
    text += buf;
  }
  ByteWriter out;
  out.str(text);
  out.writeFile(path);
}

struct Sidecar {
  std::string stage;  // "pretrain" | "GM" | "GH"
  uint32_t vocabHash = 0;
  uint32_t corpusHash = 0;
  TrainConfig config;
};

void writeSidecar(const std::string& checkpointPath, const Sidecar& side,
                  const TrainResult& result) {
  json j;
  j["stage"] = side.stage;
  j["vocab_hash"] = side.vocabHash;
  j["corpus_hash"] = side.corpusHash;
  j["config"] = trainConfigToJson(side.config);
  j["epochs_run"] = result.epochs.empty() ? 0 : result.epochs.back().epoch;
  if (!result.epochs.empty()) {
    j["final_train_bce"] = result.epochs.back().trainBce;
    j["final_holdout_bce"] = result.epochs.back().holdoutBce;
  }
  writeJsonFile(checkpointPath + ".json", j);
}

Sidecar readSidecar(const std::string& checkpointPath) {
  const json j = readJsonFile(checkpointPath + ".json");
  Sidecar side;
  side.stage = getAs<std::string>(j, "stage", "");
  side.vocabHash = getAs<uint32_t>(j, "vocab_hash", 0);
  side.corpusHash = getAs<uint32_t>(j, "corpus_hash", 0);
  if (!j.contains("config"))
    raise(ErrorCode::BadConfig, checkpointPath + ".json: missing config block");
  side.config = trainConfigFromJson(j.at("config"), TrainConfig{});
  return side;
}

/// Loads a checkpoint plus sidecar and rebuilds the model around it. The
/// sidecar's architecture fields are authoritative so shapes always fit.
struct LoadedModel {
  ParamStore store;
  Sidecar side;
  int chromaCount = 0;
};

LoadedModel loadCheckpoint(const std::string& path) {
  LoadedModel loaded;
  auto [store, d] = ParamStore::load(path);
  loaded.store = std::move(store);
  loaded.side = readSidecar(path);
  if (loaded.side.config.d != d)
    raise(ErrorCode::BadConfig, path + ": sidecar d disagrees with checkpoint");
  if (!loaded.store.has("chroma_table"))
    raise(ErrorCode::NotPretrained, path + ": checkpoint lacks the token tables");
  loaded.chromaCount = loaded.store.value("chroma_table").rows();
  return loaded;
}

ManifestEntry processOneFile(const fs::path& input, const fs::path& gridsDir,
                             const SegmentLimits& limits) {
  ManifestEntry entry;
  entry.file = input.filename().string();
  try {
    const MidiSong midi = readSmfFile(input.string());
    TimedSong timed = normalizeTime(midi);
    const Key key = detectKey(timed);
    timed = transposeToC(timed, key);
    GridSong grid = gridify(timed);
    grid.id = input.stem().string();
    // A per-song vocabulary is enough to segment: survival depends only on
    // valid-step ratios and period counts, never on symbol indices.
    const Vocabulary localVocab = buildVocabulary({grid});
    segmentSong(grid, localVocab, limits);
    writeGridSong((gridsDir / (input.stem().string() + ".grd")).string(), grid);
    entry.status = "ok";
  } catch (const Error& e) {
    entry.status = e.code() == ErrorCode::SongRejected ? "rejected" : "error";
    entry.detail = e.what();
  } catch (const std::exception& e) {
    entry.status = "error";
    entry.detail = e.what();
  }
  return entry;
}

}  // namespace

PipelineConfig parsePipelineConfig(const std::string& jsonText) {
  json j;
  try {
    j = json::parse(jsonText);
  } catch (const json::exception& e) {
    raise(ErrorCode::BadConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) raise(ErrorCode::BadConfig, "config must be a JSON object");

  const std::set<std::string> allowed(std::begin(kConfigKeys), std::end(kConfigKeys));
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) raise(ErrorCode::BadConfig, "unknown config key: " + key);

  PipelineConfig cfg;
  cfg.train = trainConfigFromJson(j, cfg.train);
  cfg.midiDir = getAs<std::string>(j, "midi_dir", "");
  cfg.corpusOut = getAs<std::string>(j, "corpus_out", "");
  cfg.vocabOut = getAs<std::string>(j, "vocab_out", "");
  cfg.modelOut = getAs<std::string>(j, "model_out", "");
  cfg.reportOut = getAs<std::string>(j, "report_out", "");
  cfg.limits.melodicValidMin = getAs(j, "melodic_valid", cfg.limits.melodicValidMin);
  cfg.limits.harmonicValidMin = getAs(j, "harmonic_valid", cfg.limits.harmonicValidMin);
  cfg.limits.minPeriods = getAs(j, "min_periods", cfg.limits.minPeriods);
  cfg.evalSeed = getAs(j, "eval_seed", cfg.evalSeed);
  cfg.holdoutSongs = getAs(j, "holdout_songs", cfg.holdoutSongs);
  validateConfig(cfg);
  return cfg;
}

PipelineConfig loadPipelineConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::BadFile, "cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parsePipelineConfig(text);
}

FeatureMask parseFeatureList(const std::string& csv) {
  std::vector<std::string> names;
  std::string current;
  for (char c : csv) {
    if (c == ',') {
      if (!current.empty()) names.push_back(current);
      current.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      current += c;
    }
  }
  if (!current.empty()) names.push_back(current);
  return featuresFromNames(names);
}

FusionMode parseFusionName(const std::string& name) {
  if (name == "wt") return FusionMode::WT;
  if (name == "avg") return FusionMode::AVG;
  if (name == "melody") return FusionMode::MelodyOnly;
  if (name == "harmony") return FusionMode::HarmonyOnly;
  raise(ErrorCode::BadConfig, "unknown fusion mode: " + name);
}

int threadCap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("PIRHDY_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 1)
      raise(ErrorCode::BadConfig, "PIRHDY_THREADS must be a positive integer");
    cap = static_cast<int>(parsed);
  }
  return cap;
}

PreprocessResult cmdPreprocess(const PipelineConfig& cfg) {
  requirePath(cfg.midiDir, "midi_dir");
  requirePath(cfg.corpusOut, "corpus_out");
  if (!fs::is_directory(cfg.midiDir))
    raise(ErrorCode::BadConfig, "midi_dir is not a directory: " + cfg.midiDir);

  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(cfg.midiDir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".mid" || ext == ".midi") inputs.push_back(entry.path());
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) raise(ErrorCode::BadConfig, "no MIDI files under " + cfg.midiDir);

  const fs::path gridsDir = fs::path(cfg.corpusOut) / "grids";
  fs::create_directories(gridsDir);

  PreprocessResult result;
  result.entries.resize(inputs.size());
  std::atomic<size_t> nextIndex{0};
  const size_t nThreads =
      std::min(static_cast<size_t>(threadCap()), inputs.size());
  auto worker = [&]() {
    for (size_t i; (i = nextIndex.fetch_add(1)) < inputs.size();)
      result.entries[i] = processOneFile(inputs[i], gridsDir, cfg.limits);
  };
  std::vector<std::thread> pool;
  for (size_t t = 1; t < nThreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json manifest;
  manifest["inputs"] = json::array();
  size_t rejected = 0;
  size_t failed = 0;
  for (const auto& entry : result.entries) {
    json row;
    row["file"] = entry.file;
    row["status"] = entry.status;
    if (!entry.detail.empty()) row["detail"] = entry.detail;
    manifest["inputs"].push_back(row);
    if (entry.status == "ok") ++result.okCount;
    else if (entry.status == "rejected") ++rejected;
    else ++failed;
  }
  manifest["counts"] = {{"ok", result.okCount}, {"rejected", rejected}, {"error", failed}};
  writeJsonFile((fs::path(cfg.corpusOut) / "manifest.json").string(), manifest);
  return result;
}

void cmdVocab(const PipelineConfig& cfg) {
  requirePath(cfg.corpusOut, "corpus_out");
  requirePath(cfg.vocabOut, "vocab_out");
  std::vector<GridSong> grids;
  for (const auto& path : listGrids(cfg)) grids.push_back(readGridSong(path.string()));
  const Vocabulary vocab = buildVocabulary(grids);
  vocab.save(cfg.vocabOut);
}

void cmdCorpus(const PipelineConfig& cfg) {
  requirePath(cfg.corpusOut, "corpus_out");
  requirePath(cfg.vocabOut, "vocab_out");
  const Vocabulary vocab = Vocabulary::load(cfg.vocabOut);
  const auto gridPaths = listGrids(cfg);
  const std::set<uint32_t> holdout(cfg.holdoutSongs.begin(), cfg.holdoutSongs.end());

  RngStream rng(cfg.train.seed);
  std::vector<LocalSample> locals;
  std::vector<PairRecord> melodicPairs;
  std::vector<PairRecord> harmonicPairs;
  json songNames = json::array();

  for (uint32_t songIndex = 0; songIndex < gridPaths.size(); ++songIndex) {
    const GridSong grid = readGridSong(gridPaths[songIndex].string());
    songNames.push_back(grid.id);
    const Segmentation seg = segmentSong(grid, vocab, cfg.limits);

    if (!holdout.count(songIndex)) {
      for (const auto& positive : extractLocalSamples(grid, vocab, cfg.train.wM, cfg.train.wH)) {
        locals.push_back(positive);
        const auto negatives = negativeSamples(positive, vocab, rng);
        locals.insert(locals.end(), negatives.begin(), negatives.end());
      }
    }

    const GlobalPairs pairs = extractGlobalPairs(seg);
    for (const auto& [a, b] : pairs.melodic)
      melodicPairs.push_back({songIndex, seg.melody[a].events, seg.melody[b].events});
    for (const auto& [m, h] : pairs.harmonic)
      harmonicPairs.push_back({songIndex, seg.melody[m].events, seg.accompaniment[h].events});
  }

  const uint32_t vocabHash = vocab.fingerprint();
  const fs::path dir(cfg.corpusOut);
  writeLocalCorpus((dir / "local.prc").string(), vocabHash, locals);
  writePairCorpus((dir / "melodic.gpc").string(), vocabHash, melodicPairs);
  writePairCorpus((dir / "harmonic.gpc").string(), vocabHash, harmonicPairs);
  writeJsonFile((dir / "songs.json").string(), json{{"songs", songNames}});
}

TrainResult cmdTrain(const PipelineConfig& cfg) {
  requirePath(cfg.corpusOut, "corpus_out");
  requirePath(cfg.vocabOut, "vocab_out");
  requirePath(cfg.modelOut, "model_out");
  const Vocabulary vocab = Vocabulary::load(cfg.vocabOut);
  const std::string corpusPath = (fs::path(cfg.corpusOut) / "local.prc").string();
  const LocalCorpus corpus = readLocalCorpus(corpusPath);
  if (corpus.vocabHash != vocab.fingerprint())
    raise(ErrorCode::BadFile, "corpus was tokenized with a different vocabulary");

  ParamStore store;
  RngStream initRng(cfg.train.seed);
  ContextModel model(store, cfg.train, static_cast<int>(vocab.chroma.size()), &initRng);
  const TrainResult result = trainLocal(model, corpus, cfg.train);

  store.save(cfg.modelOut, cfg.train.d);
  Sidecar side{"pretrain", vocab.fingerprint(), fnv1aFile(corpusPath), cfg.train};
  writeSidecar(cfg.modelOut, side, result);
  writeLossCsv(cfg.modelOut + ".csv", result);
  return result;
}

std::string finetuneCheckpointPath(const PipelineConfig& cfg, GlobalMode mode) {
  requirePath(cfg.modelOut, "model_out");
  return pathWithSuffix(cfg.modelOut, mode == GlobalMode::GM ? "_gm" : "_gh");
}

TrainResult cmdFinetune(const PipelineConfig& cfg, GlobalMode mode, std::string checkpoint,
                        std::string out) {
  requirePath(cfg.corpusOut, "corpus_out");
  if (checkpoint.empty()) {
    requirePath(cfg.modelOut, "model_out");
    checkpoint = cfg.modelOut;
  }
  if (out.empty()) out = finetuneCheckpointPath(cfg, mode);

  LoadedModel loaded = loadCheckpoint(checkpoint);
  if (loaded.side.stage != "pretrain")
    raise(ErrorCode::NotPretrained,
          checkpoint + ": stage '" + loaded.side.stage + "' cannot be fine-tuned again");

  const std::string pairsPath =
      (fs::path(cfg.corpusOut) / (mode == GlobalMode::GM ? "melodic.gpc" : "harmonic.gpc"))
          .string();
  PairCorpus pairs = readPairCorpus(pairsPath);
  if (pairs.vocabHash != loaded.side.vocabHash)
    raise(ErrorCode::BadFile, "pair corpus was tokenized with a different vocabulary");

  if (!cfg.holdoutSongs.empty()) {
    const std::set<uint32_t> holdout(cfg.holdoutSongs.begin(), cfg.holdoutSongs.end());
    std::erase_if(pairs.records,
                  [&](const PairRecord& rec) { return holdout.count(rec.songIndex) > 0; });
  }

  // Architecture from the checkpoint, optimizer settings from the caller.
  TrainConfig ft = loaded.side.config;
  ft.lr = cfg.train.lr;
  ft.beta1 = cfg.train.beta1;
  ft.beta2 = cfg.train.beta2;
  ft.batchSize = cfg.train.batchSize;
  ft.epochs = cfg.train.epochs;
  ft.seed = cfg.train.seed;

  requirePretrained(loaded.store, ft, loaded.chromaCount);
  ContextModel model(loaded.store, ft, loaded.chromaCount, nullptr);
  const TrainResult result = finetuneGlobal(model, pairs, mode, ft);

  loaded.store.save(out, ft.d);
  Sidecar side{globalModeName(mode), loaded.side.vocabHash, fnv1aFile(pairsPath), ft};
  writeSidecar(out, side, result);
  writeLossCsv(out + ".csv", result);
  return result;
}

MetricReport cmdEval(const PipelineConfig& cfg, const std::string& task, std::string checkpoint) {
  requirePath(cfg.corpusOut, "corpus_out");
  requirePath(cfg.reportOut, "report_out");
  GlobalMode mode;
  std::string pairsName;
  if (task == "melody") {
    mode = GlobalMode::GM;
    pairsName = "melodic.gpc";
  } else if (task == "accompaniment") {
    mode = GlobalMode::GH;
    pairsName = "harmonic.gpc";
  } else {
    raise(ErrorCode::BadConfig, "unknown task: " + task + " (use melody or accompaniment)");
  }
  if (checkpoint.empty()) checkpoint = finetuneCheckpointPath(cfg, mode);

  LoadedModel loaded = loadCheckpoint(checkpoint);
  if (loaded.side.stage != globalModeName(mode))
    raise(ErrorCode::NotTrained, checkpoint + ": stage '" + loaded.side.stage +
                                     "' does not provide " + globalModeName(mode) +
                                     " embeddings");

  const std::string pairsPath = (fs::path(cfg.corpusOut) / pairsName).string();
  const PairCorpus pairs = readPairCorpus(pairsPath);
  if (pairs.vocabHash != loaded.side.vocabHash)
    raise(ErrorCode::BadFile, "pair corpus was tokenized with a different vocabulary");

  const ContextModel model(loaded.store, loaded.side.config, loaded.chromaCount, nullptr);
  const auto instances =
      mode == GlobalMode::GM
          ? buildMelodyCompletionSet(pairs, cfg.evalSeed, cfg.holdoutSongs)
          : buildAccompanimentSet(pairs, cfg.evalSeed, cfg.holdoutSongs);
  const MetricReport report = rankAndScore(instances, model, mode);

  json j;
  j["task"] = task;
  j["mode"] = globalModeName(mode);
  j["map"] = report.map;
  json hits;
  for (const auto& [k, v] : report.hits) hits[std::to_string(k)] = v;
  j["hits"] = hits;
  j["n_instances"] = report.nInstances;
  j["seed"] = cfg.evalSeed;
  j["corpus_hash"] = fnv1aFile(pairsPath);
  writeJsonFile(cfg.reportOut, j);
  return report;
}

std::string cmdExport(const PipelineConfig& cfg, GlobalMode mode, std::string checkpoint,
                      std::string out) {
  requirePath(cfg.vocabOut, "vocab_out");
  requirePath(cfg.corpusOut, "corpus_out");
  if (checkpoint.empty()) checkpoint = finetuneCheckpointPath(cfg, mode);
  if (out.empty()) {
    requirePath(cfg.modelOut, "model_out");
    out = pathWithSuffix(cfg.modelOut, mode == GlobalMode::GM ? "_gm" : "_gh", ".vec");
  }

  LoadedModel loaded = loadCheckpoint(checkpoint);
  if (loaded.side.stage != globalModeName(mode))
    raise(ErrorCode::NotTrained, checkpoint + ": stage '" + loaded.side.stage +
                                     "' does not provide " + globalModeName(mode) +
                                     " embeddings");

  const Vocabulary vocab = Vocabulary::load(cfg.vocabOut);
  if (vocab.fingerprint() != loaded.side.vocabHash)
    raise(ErrorCode::BadFile, "vocabulary differs from the one the checkpoint was trained on");

  const ContextModel model(loaded.store, loaded.side.config, loaded.chromaCount, nullptr);
  auto rows = vocabularyRows(loaded.store, vocab);

  for (const auto& path : listGrids(cfg)) {
    const GridSong grid = readGridSong(path.string());
    const Segmentation seg = segmentSong(grid, vocab, cfg.limits);
    std::vector<std::vector<NoteEvent>> phrases;
    phrases.reserve(seg.melody.size());
    for (const auto& phrase : seg.melody) phrases.push_back(phrase.events);
    rows.emplace_back("song:" + grid.id, songEmbedding(model, phrases));
  }

  writeVecFile(out, loaded.side.config.d, mode, rows);
  return out;
}

}  // namespace pirhdy
