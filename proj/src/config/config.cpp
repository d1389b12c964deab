#include "config/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"

BNAS_NS_BEGIN

namespace {

enum class Kind { Int, Real, Bool, Text, Choice, List };

struct KeySpec {
  const char* key;
  Kind kind;
  const char* paper;  // default of the "paper" preset
  const char* choices = "";
};

// clang-format off
const KeySpec kKeys[] = {
    {"seed", Kind::Int, "0"},
    {"dataset", Kind::Choice, "cifar10", "cifar10|mnist|synthetic"},
    {"data_dir", Kind::Text, ""},
    {"synthetic.train", Kind::Int, "2048"},
    {"synthetic.test", Kind::Int, "512"},
    {"synthetic.size", Kind::Int, "32"},
    {"no_skip", Kind::Bool, "false"},
    {"no_zeroise", Kind::Bool, "false"},
    {"no_div", Kind::Bool, "false"},
    {"no_dilated", Kind::Bool, "false"},
    {"keep_sepconv", Kind::Bool, "false"},
    {"precision", Kind::Choice, "binary", "binary|float"},
    {"gamma", Kind::Real, "1.0"},
    {"search.lambda", Kind::Real, "1.0"},
    {"search.tau", Kind::Real, "7.7"},
    {"search.epochs", Kind::Int, "50"},
    {"search.batch", Kind::Int, "64"},
    {"search.lr", Kind::Real, "0.025"},
    {"search.momentum", Kind::Real, "0.9"},
    {"search.weight_decay", Kind::Real, "3e-4"},
    {"search.arch_lr", Kind::Real, "0.025"},
    {"search.arch_momentum", Kind::Real, "0"},
    {"search.cells", Kind::Int, "8"},
    {"search.channels", Kind::Int, "16"},
    {"search.nodes", Kind::Int, "4"},
    {"search.augment", Kind::Bool, "false"},
    {"search.images", Kind::Int, "0"},
    {"net.cells", Kind::Int, "8"},
    {"net.channels", Kind::Int, "16"},
    {"train.epochs", Kind::Int, "600"},
    {"train.batch", Kind::Int, "256"},
    {"train.lr", Kind::Real, "0.025"},
    {"train.momentum", Kind::Real, "0.9"},
    {"train.weight_decay", Kind::Real, "3e-6"},
    {"train.schedule", Kind::Choice, "one_cycle", "one_cycle|cosine|constant"},
    {"train.augment", Kind::Bool, "true"},
    {"train.eval_every", Kind::Int, "0"},
    {"train.log_grads", Kind::Bool, "true"},
    {"train.images", Kind::Int, "0"},
    {"test.images", Kind::Int, "0"},
    {"study.seeds", Kind::List, "0,1,2"},
    {"study.train_images", Kind::Int, "10000"},
    {"study.test_images", Kind::Int, "0"},
    {"study.epochs", Kind::Int, "20"},
    {"study.batch", Kind::Int, "64"},
    {"study.lr", Kind::Real, "0.025"},
    {"study.layers", Kind::List, "bin_conv_3x3,bin_conv_5x5,bin_dil_conv_3x3,bin_dil_conv_5x5,sep_conv_3x3,sep_conv_5x5"},
    {"study.precisions", Kind::List, "float,binary"},
    {"study.variants", Kind::List, "full,no_skip,no_zeroise,no_div"},
};

// Overrides of the paper values per preset.
const std::map<std::string, std::vector<std::pair<const char*, const char*>>> kPresets = {
    {"paper", {}},
    {"desk", {{"search.epochs", "15"}, {"search.cells", "4"}, {"search.channels", "8"}, {"search.images", "5000"},
              {"train.epochs", "60"}, {"train.batch", "64"}}},
    {"tiny", {{"search.epochs", "2"}, {"search.cells", "3"}, {"search.channels", "4"}, {"search.batch", "16"},
              {"search.images", "256"}, {"net.cells", "3"}, {"net.channels", "4"}, {"train.epochs", "2"},
              {"train.batch", "32"}, {"train.images", "512"}, {"test.images", "256"}, {"synthetic.train", "512"},
              {"synthetic.test", "256"}, {"synthetic.size", "16"}, {"study.seeds", "0"}, {"study.train_images", "256"},
              {"study.test_images", "128"}, {"study.epochs", "2"}, {"study.batch", "32"}}},
};
// clang-format on

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

void check_value(const KeySpec& k, const std::string& v) {
  auto bad = [&](const std::string& what) { throw ParseError(std::string(k.key) + ": " + what + ", got '" + v + "'"); };
  switch (k.kind) {
    case Kind::Int: {
      std::size_t pos = 0;
      try {
        (void)std::stoll(v, &pos);
      } catch (...) {
        bad("expected an integer");
      }
      if (pos != v.size()) bad("expected an integer");
      break;
    }
    case Kind::Real: {
      std::size_t pos = 0;
      double d = 0;
      try {
        d = std::stod(v, &pos);
      } catch (...) {
        bad("expected a number");
      }
      if (pos != v.size() || !std::isfinite(d)) bad("expected a finite number");
      break;
    }
    case Kind::Bool:
      if (v != "true" && v != "false" && v != "1" && v != "0") bad("expected true or false");
      break;
    case Kind::Choice: {
      std::stringstream ss(k.choices);
      std::string opt;
      bool ok = false;
      while (std::getline(ss, opt, '|')) ok |= opt == v;
      if (!ok) bad(std::string("expected one of ") + k.choices);
      break;
    }
    case Kind::Text:
    case Kind::List:
      break;
  }
}

}  // namespace

Config::Config(const std::string& preset) : preset_(preset) {
  auto it = kPresets.find(preset);
  if (it == kPresets.end()) throw UsageError("unknown preset '" + preset + "' (expected paper, desk or tiny)");
  for (const auto& k : kKeys) values_[k.key] = {k.paper, ConfigLayer::Preset};
  for (const auto& [k, v] : it->second) values_[k] = {v, ConfigLayer::Preset};
}

void Config::set(const std::string& key, const std::string& value, ConfigLayer layer) {
  const KeySpec* k = find_key(key);
  if (!k) throw ParseError("unknown config key '" + key + "'");
  const std::string v = trim(value);
  check_value(*k, v);
  Entry& e = values_[key];
  if (layer >= e.layer) e = {v, layer};
}

void Config::load_text(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1), ConfigLayer::File);
    } catch (const ParseError& e) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  load_text(ss.str(), path);
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ParseError("unknown config key '" + key + "'");
  return it->second.value;
}

double Config::real_value(const std::string& key) const { return std::stod(get(key)); }
long long Config::int_value(const std::string& key) const { return std::stoll(get(key)); }
bool Config::bool_value(const std::string& key) const {
  const auto& v = get(key);
  return v == "true" || v == "1";
}

ConfigLayer Config::layer(const std::string& key) const {
  get(key);
  return values_.at(key).layer;
}

std::string Config::canonical() const {
  std::string out = "preset=" + preset_ + "\n";
  for (const auto& [k, e] : values_) out += k + "=" + e.value + "\n";
  return out;
}

std::string Config::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 0xf];
  return s;
}

SpaceFlags Config::flags() const {
  SpaceFlags f;
  f.no_skip = bool_value("no_skip");
  f.no_zeroise = bool_value("no_zeroise");
  f.no_dilated = bool_value("no_dilated");
  f.keep_sepconv = bool_value("keep_sepconv");
  return f;
}

SearchConfig Config::search() const {
  SearchConfig c;
  c.lambda = bool_value("no_div") ? 0.0 : real_value("search.lambda");
  c.tau = real_value("search.tau");
  c.epochs = static_cast<int>(int_value("search.epochs"));
  c.batch = static_cast<int>(int_value("search.batch"));
  c.lr = real_value("search.lr");
  c.momentum = real_value("search.momentum");
  c.weight_decay = real_value("search.weight_decay");
  c.arch_lr = real_value("search.arch_lr");
  c.arch_momentum = real_value("search.arch_momentum");
  c.cells = static_cast<int>(int_value("search.cells"));
  c.channels = static_cast<int>(int_value("search.channels"));
  c.nodes = static_cast<int>(int_value("search.nodes"));
  c.seed = static_cast<std::uint64_t>(int_value("seed"));
  c.flags = flags();
  c.precision = get("precision") == "float" ? Precision::Float : Precision::Binary;
  c.augment = bool_value("search.augment");
  c.max_images = static_cast<std::size_t>(int_value("search.images"));
  return c;
}

TrainConfig Config::train() const {
  TrainConfig c;
  c.epochs = static_cast<int>(int_value("train.epochs"));
  c.batch = static_cast<int>(int_value("train.batch"));
  c.lr = real_value("train.lr");
  c.momentum = real_value("train.momentum");
  c.weight_decay = real_value("train.weight_decay");
  c.schedule = parse_schedule(get("train.schedule"));
  c.augment = bool_value("train.augment");
  c.seed = static_cast<std::uint64_t>(int_value("seed"));
  c.log_grads = bool_value("train.log_grads");
  c.eval_every = static_cast<int>(int_value("train.eval_every"));
  return c;
}

StudySpec Config::study(StudyKind kind) const {
  StudySpec s;
  s.kind = kind;
  s.seeds.clear();
  for (const auto& v : split_list(get("study.seeds"))) {
    try {
      s.seeds.push_back(std::stoull(v));
    } catch (...) {
      throw ParseError("study.seeds: '" + v + "' is not a seed");
    }
  }
  s.train_images = static_cast<std::size_t>(int_value("study.train_images"));
  s.test_images = static_cast<std::size_t>(int_value("study.test_images"));
  s.epochs = static_cast<int>(int_value("study.epochs"));
  s.batch = static_cast<int>(int_value("study.batch"));
  s.lr = real_value("study.lr");
  s.augment = bool_value("train.augment");
  s.layers.clear();
  for (const auto& v : split_list(get("study.layers"))) s.layers.push_back(parse_layer(v));
  s.precisions.clear();
  for (const auto& v : split_list(get("study.precisions"))) {
    if (v == "float") s.precisions.push_back(Precision::Float);
    else if (v == "binary") s.precisions.push_back(Precision::Binary);
    else throw ParseError("study.precisions: unknown precision '" + v + "'");
  }
  s.variants = split_list(get("study.variants"));
  s.search = search();
  s.cells = static_cast<int>(int_value("net.cells"));
  s.channels = static_cast<int>(int_value("net.channels"));
  s.gamma = real_value("gamma");
  return s;
}

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> v;
    for (const auto& k : kKeys) v.push_back(k.key);
    return v;
  }();
  return out;
}

const std::vector<std::string>& Config::presets() {
  static const std::vector<std::string> out{"paper", "desk", "tiny"};
  return out;
}

Dataset load_dataset(const Config& config) {
  const std::string& kind = config.get("dataset");
  const std::string& dir = config.get("data_dir");
  const auto seed = static_cast<std::uint64_t>(config.int_value("seed"));
  Dataset d;
  if (kind == "synthetic") {
    d = synthetic_dataset(static_cast<std::size_t>(config.int_value("synthetic.train")),
                          static_cast<std::size_t>(config.int_value("synthetic.test")), seed, 10,
                          static_cast<int>(config.int_value("synthetic.size")));
  } else {
    if (dir.empty()) throw UsageError("dataset '" + kind + "' needs data_dir (--data-dir)");
    d = kind == "mnist" ? load_mnist(dir) : load_cifar10(dir);
  }
  return subset(d, static_cast<std::size_t>(config.int_value("train.images")),
                static_cast<std::size_t>(config.int_value("test.images")), seed);
}

BNAS_NS_END
