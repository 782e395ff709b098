#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ser::harness {

// Fixed label order shared by every corpus and the model's output layer.
enum class Emotion {
  kNeutral = 0,
  kHappy = 1,
  kSad = 2,
  kAngry = 3,
  kFear = 4,
  kDisgust = 5,
  kSurprise = 6,
};

inline constexpr int kNumEmotions = 7;

const std::array<std::string, kNumEmotions>& emotion_names();
std::string emotion_name(Emotion e);
std::optional<Emotion> emotion_from_name(const std::string& name);

enum class Corpus { kRavdess, kTess, kSavee, kEmodb, kCremad };

std::string corpus_name(Corpus c);
std::optional<Corpus> corpus_from_name(const std::string& name);

struct ManifestEntry {
  std::string source_id;
  std::string path;
  Corpus corpus = Corpus::kRavdess;
  Emotion label = Emotion::kNeutral;
  std::string augment;        // empty for original clips
  bool preprocessed = false;  // true once trimmed/resampled WAVs were written
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::array<std::size_t, kNumEmotions> class_counts() const;
};

// Parses the corpus-specific filename convention. Returns the label, or
// nullopt when the name is unparseable; *excluded is set for classes the
// pipeline drops (RAVDESS calm, EmoDB boredom).
std::optional<Emotion> parse_corpus_label(Corpus corpus,
                                          const std::string& filename,
                                          bool* excluded = nullptr);

struct BuildReport {
  DatasetManifest manifest;
  std::vector<std::string> skipped;   // unparseable files
  std::size_t excluded_count = 0;     // calm / boredom entries dropped
};

// Walks each corpus root for .wav files and parses labels from filenames.
// Unparseable files are reported, not fatal; a root with zero parseable
// files throws EmptyCorpus.
BuildReport build_manifest(const std::map<Corpus, std::string>& corpus_roots);

// JSON-lines manifest round trip.
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

}  // namespace ser::harness
