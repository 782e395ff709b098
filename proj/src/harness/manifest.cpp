#include "ser/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ser/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ser::harness {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::optional<Emotion> parse_ravdess(const std::string& stem, bool* excluded) {
  // 03-01-06-01-02-01-12: modality-vocal-emotion-intensity-statement-rep-actor
  const auto fields = split_on(stem, '-');
  if (fields.size() < 3 || fields[2].size() != 2) return std::nullopt;
  const std::string& code = fields[2];
  if (code == "01") return Emotion::kNeutral;
  if (code == "02") {  // calm: dropped to match the 7-class union
    if (excluded) *excluded = true;
    return std::nullopt;
  }
  if (code == "03") return Emotion::kHappy;
  if (code == "04") return Emotion::kSad;
  if (code == "05") return Emotion::kAngry;
  if (code == "06") return Emotion::kFear;
  if (code == "07") return Emotion::kDisgust;
  if (code == "08") return Emotion::kSurprise;
  return std::nullopt;
}

std::optional<Emotion> parse_tess(const std::string& stem) {
  // OAF_back_angry / YAF_dog_ps: emotion is the final underscore field
  const auto pos = stem.rfind('_');
  if (pos == std::string::npos) return std::nullopt;
  const std::string tail = lowercase(stem.substr(pos + 1));
  if (tail == "angry" || tail == "anger") return Emotion::kAngry;
  if (tail == "disgust") return Emotion::kDisgust;
  if (tail == "fear") return Emotion::kFear;
  if (tail == "happy" || tail == "happiness") return Emotion::kHappy;
  if (tail == "neutral") return Emotion::kNeutral;
  if (tail == "sad" || tail == "sadness") return Emotion::kSad;
  if (tail == "ps" || tail == "surprise" || tail == "pleasant_surprised" ||
      tail == "pleasant_surprise")
    return Emotion::kSurprise;
  return std::nullopt;
}

std::optional<Emotion> parse_savee(const std::string& stem) {
  // DC_a01 or a01: letter code precedes the utterance number
  const auto pos = stem.rfind('_');
  const std::string part =
      lowercase(pos == std::string::npos ? stem : stem.substr(pos + 1));
  std::string code;
  for (char c : part) {
    if (std::isdigit(static_cast<unsigned char>(c))) break;
    code.push_back(c);
  }
  if (code == "a") return Emotion::kAngry;
  if (code == "d") return Emotion::kDisgust;
  if (code == "f") return Emotion::kFear;
  if (code == "h") return Emotion::kHappy;
  if (code == "n") return Emotion::kNeutral;
  if (code == "sa") return Emotion::kSad;
  if (code == "su") return Emotion::kSurprise;
  return std::nullopt;
}

std::optional<Emotion> parse_emodb(const std::string& stem, bool* excluded) {
  // 03a01Wa: speaker(2) + text(3) + emotion letter + version
  if (stem.size() < 6) return std::nullopt;
  switch (stem[5]) {
    case 'W': return Emotion::kAngry;    // Wut
    case 'E': return Emotion::kDisgust;  // Ekel
    case 'A': return Emotion::kFear;     // Angst
    case 'F': return Emotion::kHappy;    // Freude
    case 'T': return Emotion::kSad;      // Trauer
    case 'N': return Emotion::kNeutral;
    case 'L':  // Langeweile (boredom): dropped to match the 7-class union
      if (excluded) *excluded = true;
      return std::nullopt;
    default: return std::nullopt;
  }
}

std::optional<Emotion> parse_cremad(const std::string& stem) {
  // 1001_DFA_ANG_XX: emotion is the third underscore field
  const auto fields = split_on(stem, '_');
  if (fields.size() < 3) return std::nullopt;
  const std::string code = fields[2];
  if (code == "ANG") return Emotion::kAngry;
  if (code == "DIS") return Emotion::kDisgust;
  if (code == "FEA") return Emotion::kFear;
  if (code == "HAP") return Emotion::kHappy;
  if (code == "NEU") return Emotion::kNeutral;
  if (code == "SAD") return Emotion::kSad;
  return std::nullopt;
}

}  // namespace

const std::array<std::string, kNumEmotions>& emotion_names() {
  static const std::array<std::string, kNumEmotions> names = {
      "neutral", "happy", "sad", "angry", "fear", "disgust", "surprise"};
  return names;
}

std::string emotion_name(Emotion e) {
  return emotion_names()[static_cast<int>(e)];
}

std::optional<Emotion> emotion_from_name(const std::string& name) {
  const auto& names = emotion_names();
  for (int i = 0; i < kNumEmotions; ++i)
    if (names[i] == name) return static_cast<Emotion>(i);
  return std::nullopt;
}

std::string corpus_name(Corpus c) {
  switch (c) {
    case Corpus::kRavdess: return "RAVDESS";
    case Corpus::kTess: return "TESS";
    case Corpus::kSavee: return "SAVEE";
    case Corpus::kEmodb: return "EMODB";
    case Corpus::kCremad: return "CREMAD";
  }
  return "?";
}

std::optional<Corpus> corpus_from_name(const std::string& name) {
  const std::string up = [&] {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    s.erase(std::remove_if(s.begin(), s.end(),
                           [](char c) { return c == '-' || c == '_'; }),
            s.end());
    return s;
  }();
  if (up == "RAVDESS") return Corpus::kRavdess;
  if (up == "TESS") return Corpus::kTess;
  if (up == "SAVEE") return Corpus::kSavee;
  if (up == "EMODB") return Corpus::kEmodb;
  if (up == "CREMAD") return Corpus::kCremad;
  return std::nullopt;
}

std::array<std::size_t, kNumEmotions> DatasetManifest::class_counts() const {
  std::array<std::size_t, kNumEmotions> counts{};
  for (const auto& e : entries) ++counts[static_cast<int>(e.label)];
  return counts;
}

std::optional<Emotion> parse_corpus_label(Corpus corpus,
                                          const std::string& filename,
                                          bool* excluded) {
  if (excluded) *excluded = false;
  const std::string stem = fs::path(filename).stem().string();
  switch (corpus) {
    case Corpus::kRavdess: return parse_ravdess(stem, excluded);
    case Corpus::kTess: return parse_tess(stem);
    case Corpus::kSavee: return parse_savee(stem);
    case Corpus::kEmodb: return parse_emodb(stem, excluded);
    case Corpus::kCremad: return parse_cremad(stem);
  }
  return std::nullopt;
}

BuildReport build_manifest(const std::map<Corpus, std::string>& corpus_roots) {
  BuildReport report;
  for (const auto& [corpus, root] : corpus_roots) {
    if (!fs::is_directory(root))
      throw EmptyCorpus(corpus_name(corpus) + ": not a directory: " + root);

    std::vector<fs::path> files;
    for (const auto& ent : fs::recursive_directory_iterator(root)) {
      if (!ent.is_regular_file()) continue;
      if (lowercase(ent.path().extension().string()) == ".wav")
        files.push_back(ent.path());
    }
    std::sort(files.begin(), files.end());

    std::size_t parsed = 0;
    for (const auto& path : files) {
      bool excluded = false;
      const auto label =
          parse_corpus_label(corpus, path.filename().string(), &excluded);
      if (excluded) {
        ++report.excluded_count;
        continue;
      }
      if (!label) {
        report.skipped.push_back(path.string());
        continue;
      }
      ManifestEntry entry;
      entry.source_id = corpus_name(corpus) + "/" + path.stem().string();
      entry.path = path.string();
      entry.corpus = corpus;
      entry.label = *label;
      report.manifest.entries.push_back(std::move(entry));
      ++parsed;
    }
    if (parsed == 0)
      throw EmptyCorpus(corpus_name(corpus) +
                        ": no parseable WAV files under " + root);
  }
  return report;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  for (const auto& e : manifest.entries) {
    json j{{"id", e.source_id},
           {"path", e.path},
           {"corpus", corpus_name(e.corpus)},
           {"label", emotion_name(e.label)},
           {"augment", e.augment},
           {"preprocessed", e.preprocessed}};
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("failed writing manifest: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": bad manifest line: " + e.what());
    }
    ManifestEntry entry;
    entry.source_id = j.at("id").get<std::string>();
    entry.path = j.at("path").get<std::string>();
    const auto corpus = corpus_from_name(j.at("corpus").get<std::string>());
    if (!corpus)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown corpus");
    entry.corpus = *corpus;
    const auto label = emotion_from_name(j.at("label").get<std::string>());
    if (!label)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown label");
    entry.label = *label;
    entry.augment = j.value("augment", std::string());
    entry.preprocessed = j.value("preprocessed", false);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

}  // namespace ser::harness
