#pragma once

#include <map>
#include <string>
#include <vector>

#include "study/studies.hpp"

BNAS_NS_BEGIN

/// Where a resolved value came from; later layers win.
enum class ConfigLayer { Preset = 0, File = 1, Cli = 2 };

/// Flat key=value settings. Keys mirror the fields of SearchConfig
/// ("search.*"), TrainConfig ("train.*"), the final network ("net.*") and
/// the study budget ("study.*"), plus a few global ones (seed, dataset,
/// ablation flags). Unknown keys and malformed values are rejected.
class Config {
 public:
  /// Named presets: "paper" (the published recipe), "desk" (CPU-sized),
  /// "tiny" (seconds-scale smoke runs).
  explicit Config(const std::string& preset = "paper");

  void set(const std::string& key, const std::string& value, ConfigLayer layer = ConfigLayer::Cli);
  /// Lines of `key = value`; '#' starts a comment; blank lines are skipped.
  void load_text(const std::string& text, const std::string& origin = "<config>");
  void load_file(const std::string& path);

  const std::string& get(const std::string& key) const;
  double real_value(const std::string& key) const;
  long long int_value(const std::string& key) const;
  bool bool_value(const std::string& key) const;
  ConfigLayer layer(const std::string& key) const;
  const std::string& preset() const { return preset_; }

  /// Sorted key=value lines of every resolved setting.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  SearchConfig search() const;
  TrainConfig train() const;
  StudySpec study(StudyKind kind) const;
  SpaceFlags flags() const;

  static const std::vector<std::string>& keys();
  static const std::vector<std::string>& presets();

 private:
  struct Entry {
    std::string value;
    ConfigLayer layer = ConfigLayer::Preset;
  };
  std::string preset_;
  std::map<std::string, Entry> values_;
};

/// Loads the configured dataset (dataset, data_dir, synthetic.*) and applies
/// the train.images / test.images caps.
Dataset load_dataset(const Config& config);

BNAS_NS_END
