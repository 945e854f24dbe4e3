#include "slump/cli.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "slump/checkpoint.hpp"
#include "slump/kernels/kernels.hpp"
#include "slump/pipeline.hpp"
#include "slump/synthgen.hpp"
#include "slump/train.hpp"
#include "slump/verify.hpp"

namespace slump::cli {

namespace {

namespace fs = std::filesystem;

struct Key {
  std::string name;
  std::string def;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
  std::string positional;  // key that may also be given positionally
};

const std::vector<Key>& global_keys() {
  static const std::vector<Key> keys{
      {"run_dir", "slump-run", "directory holding every artifact this command writes"},
      {"threads", "1", "gemm worker threads; 1 guarantees byte-identical reruns"},
  };
  return keys;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds{
      {"synth",
       "generate synthetic clips and a manifest",
       {{"n", "", "number of clips; empty uses the preset's count"},
        {"seed", "1", "master seed"},
        {"preset", "desk", "clip geometry: desk or paper-shape"},
        {"ratios", "auto",
         "train:val:test split, 'preset', or 'auto' (preset ratios at the preset's clip count, 185:35:35 "
         "otherwise)"},
        {"slump_min", "40", "lowest slump in cm"},
        {"slump_max", "190", "highest slump in cm"},
        {"out", "data", "output directory inside the run directory"}},
       ""},
      {"train",
       "train a model on a manifest and keep the best-validation checkpoint",
       {{"model", "C", "model id: A, B or C"},
        {"manifest", "data/manifest.csv", "manifest path, relative to the run directory unless absolute"},
        {"preset", "desk", "pipeline preset: desk or paper-shape"},
        {"epochs", "50", "training epochs"},
        {"batch_size", "16", "mini-batch size"},
        {"lr", "1e-4", "AdamW learning rate"},
        {"weight_decay", "1e-4", "decoupled weight decay on kernels and dense weights"},
        {"seed", "0", "first seed (weights and shuffle order)"},
        {"seeds", "1", "independent runs with seeds seed..seed+k-1, each in run_dir/seed_<s>"},
        {"n", "0", "use only the first n train and val samples; 0 uses all"},
        {"eval_every", "1", "validate every k epochs (and after the last)"},
        {"output_init", "standardize", "output tie-in before step 1: zero, label-mean or standardize"},
        {"deterministic", "true", "write 0 for wall time so logs are byte-identical"},
        {"cache", "true", "cache prepared windows under run_dir/cache"}},
       ""},
      {"eval",
       "evaluate checkpoints on one split and write metrics.csv",
       {{"checkpoint", "checkpoint.ckpt",
         "checkpoint path relative to the run directory; with --seeds > 1 the default reads "
         "seed_<s>/checkpoint.ckpt and '{seed}' in a custom path is replaced"},
        {"manifest", "data/manifest.csv", "manifest path, relative to the run directory unless absolute"},
        {"preset", "desk", "pipeline preset: desk or paper-shape"},
        {"split", "test", "train, val or test"},
        {"seed", "0", "first seed"},
        {"seeds", "1", "number of per-seed checkpoints to evaluate"},
        {"n", "0", "evaluate only the first n samples of the split; 0 uses all"},
        {"out", "metrics.csv", "metrics file inside the run directory"}},
       ""},
      {"gradcheck",
       "finite-difference gradient check of a model or of every layer primitive",
       {{"model", "all", "A, B, C, all, or primitives"},
        {"scale", "reduced", "input scale: reduced (4x8x8x3) or small (4x16x16x3)"},
        {"seed", "0", "seed for weights, inputs and sampled coordinates"},
        {"coords", "12", "coordinates checked per tensor; 0 checks all"},
        {"tolerance", "1e-4", "maximum allowed relative error"}},
       "model"},
      {"params",
       "per-layer trainable parameter table",
       {{"model", "all", "A, B, C or all"}},
       "model"},
      {"curves",
       "convert a train_log.csv into long-format series,epoch,value rows",
       {{"log", "train_log.csv", "train log, relative to the run directory unless absolute"},
        {"out", "curves.csv", "output file inside the run directory"}},
       "log"},
  };
  return cmds;
}

std::string dashed(std::string s) {
  for (char& c : s)
    if (c == '_') c = '-';
  return s;
}

std::string env_name(const std::string& key) {
  std::string s = "SLUMP_";
  for (char c : key) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  for (const auto& k : global_keys())
    if (k.name == key) return true;
  for (const auto& c : commands())
    for (const auto& k : c.keys)
      if (k.name == key) return true;
  return false;
}

// `key = value` per line; '#' starts a comment.
std::map<std::string, std::string> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::kConfig, path.string() + ":" + std::to_string(no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    for (char& c : key)
      if (c == '-') c = '_';
    if (!known_key(key))
      throw Error(ErrorCode::kConfig, path.string() + ":" + std::to_string(no) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

class Settings {
 public:
  void set(const std::string& key, std::string value, std::string source) {
    values_[key] = {std::move(value), std::move(source)};
  }
  const std::string& str(const std::string& key) const { return values_.at(key).first; }
  const std::map<std::string, std::pair<std::string, std::string>>& all() const { return values_; }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
      throw bad(key, "a finite number");
    return v;
  }
  std::uint64_t u64(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw bad(key, "a non-negative integer");
    return v;
  }
  std::uint64_t count(const std::string& key, std::uint64_t min) const {
    const auto v = u64(key);
    if (v < min) throw bad(key, "an integer >= " + std::to_string(min));
    return v;
  }
  bool flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw bad(key, "true or false");
  }

 private:
  Error bad(const std::string& key, const std::string& want) const {
    return Error(ErrorCode::kConfig, "'" + key + "' must be " + want + ", got '" + str(key) + "'");
  }
  std::map<std::string, std::pair<std::string, std::string>> values_;
};

// Writes each line to the console stream and to run_dir/run.log.
class RunLog {
 public:
  RunLog(const fs::path& path, std::ostream& out) : file_(path, std::ios::app), out_(out) {
    if (!file_) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  void say(const std::string& line) {
    out_ << line << '\n';
    note(line);
  }
  void note(const std::string& line) { file_ << line << '\n' << std::flush; }

 private:
  std::ofstream file_;
  std::ostream& out_;
};

struct Context {
  Settings s;
  fs::path run_dir;
  RunLog* log;
  std::ostream& out;
  std::ostream& err;
};

std::string shortest(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string with_commas(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

fs::path input_path(const Context& c, const std::string& key) {
  const fs::path p(c.s.str(key));
  return p.is_absolute() ? p : c.run_dir / p;
}

// Outputs must stay inside the run directory.
fs::path output_path(const Context& c, const std::string& key) {
  const fs::path p(c.s.str(key));
  if (p.empty() || p.is_absolute())
    throw Error(ErrorCode::kConfig, "'" + key + "' must be a relative path inside the run directory");
  for (const auto& part : p)
    if (part == "..") throw Error(ErrorCode::kConfig, "'" + key + "' may not leave the run directory");
  return c.run_dir / p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<ModelId> model_list(const std::string& text) {
  if (text == "all") return {ModelId::kA, ModelId::kB, ModelId::kC};
  try {
    return {parse_model_id(text)};
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
}

SplitRatios parse_ratios(const std::string& text, const SynthPreset& preset, std::size_t n) {
  if (text == "preset") return preset.ratios;
  if (text == "auto") return n == preset.clips ? preset.ratios : SplitRatios{};
  std::array<double, 3> p{};
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  double total = 0.0;
  while (std::getline(ss, part, ':')) {
    double v = -1.0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), v);
    if (i >= 3 || r.ec != std::errc() || r.ptr != part.data() + part.size() || !(v >= 0.0))
      throw Error(ErrorCode::kConfig, "ratios must look like 185:35:35, got '" + text + "'");
    p[i++] = v;
    total += v;
  }
  if (i != 3 || !(total > 0.0)) throw Error(ErrorCode::kConfig, "ratios must look like 185:35:35, got '" + text + "'");
  return {p[0] / total, p[1] / total, 1.0 - p[0] / total - p[1] / total};
}

OutputInit parse_output_init(const std::string& text) {
  if (text == "zero") return OutputInit::kZero;
  if (text == "label-mean") return OutputInit::kLabelMean;
  if (text == "standardize") return OutputInit::kStandardize;
  throw Error(ErrorCode::kConfig, "output_init must be zero, label-mean or standardize, got '" + text + "'");
}

Split parse_split_key(const std::string& text) {
  try {
    return parse_split(text);
  } catch (const Error&) {
    throw Error(ErrorCode::kConfig, "split must be train, val or test, got '" + text + "'");
  }
}

int cmd_synth(Context& c) {
  const auto preset = SynthPreset::by_name(c.s.str("preset"));
  const std::size_t n = c.s.str("n").empty() ? preset.clips : c.s.count("n", 3);
  const auto ratios = parse_ratios(c.s.str("ratios"), preset, n);
  const auto records = generate_dataset(n, c.s.real("slump_min"), c.s.real("slump_max"), c.s.u64("seed"), ratios);
  const fs::path dir = output_path(c, "out");
  fs::create_directories(dir);
  std::vector<ManifestRow> rows;
  std::array<std::size_t, 3> counts{};
  for (const auto& rec : records) {
    char name[32];
    std::snprintf(name, sizeof name, "clip_%04zu.cwv", rec.index);
    cwv::write(dir / name, generate_clip(preset.params_for(rec)));
    rows.push_back({name, rec.slump_cm, rec.split, rec.seed});
    ++counts[static_cast<std::size_t>(rec.split)];
  }
  const fs::path manifest = dir / "manifest.csv";
  write_manifest(manifest, rows);
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(fnv1a(read_text(manifest))));
  c.log->say("wrote " + std::to_string(n) + " " + preset.name + " clips to " + dir.string());
  c.log->say("splits: train " + std::to_string(counts[0]) + ", val " + std::to_string(counts[1]) + ", test " +
             std::to_string(counts[2]));
  c.log->say("manifest " + manifest.string() + " fnv1a64 " + sum);
  return kExitOk;
}

void report_skips(Context& c, const PreparedData& data) {
  for (const auto& s : data.skipped) c.log->say("skipped " + s.path + ": " + s.reason);
  c.log->say("clips " + std::to_string(data.clips) + " (skipped " + std::to_string(data.skipped.size()) +
             "); windows train " + std::to_string(data.train.size()) + ", val " + std::to_string(data.val.size()) +
             ", test " + std::to_string(data.test.size()));
}

Dataset first_n(const Dataset& d, std::size_t n) {
  if (n == 0 || n >= d.size()) return d;
  Dataset out;
  out.samples.assign(d.samples.begin(), d.samples.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

fs::path seed_dir(const Context& c, std::uint64_t seed, std::uint64_t seeds) {
  return seeds == 1 ? c.run_dir : c.run_dir / ("seed_" + std::to_string(seed));
}

int cmd_train(Context& c) {
  const auto ids = model_list(c.s.str("model"));
  if (ids.size() != 1) throw Error(ErrorCode::kConfig, "train needs a single model id");
  const ModelId id = ids.front();
  const auto cfg = PipelineConfig::by_name(c.s.str("preset"));
  TrainConfig tc;
  tc.epochs = static_cast<int>(c.s.count("epochs", 1));
  tc.batch_size = c.s.count("batch_size", 1);
  tc.eval_every = static_cast<int>(c.s.count("eval_every", 1));
  tc.optim.lr = c.s.real("lr");
  tc.optim.weight_decay = c.s.real("weight_decay");
  tc.output_init = parse_output_init(c.s.str("output_init"));
  tc.deterministic = c.s.flag("deterministic");
  const auto seeds = c.s.count("seeds", 1);
  const auto seed0 = c.s.u64("seed");
  const auto limit = c.s.u64("n");

  const auto data = build_dataset(input_path(c, "manifest"), cfg,
                                  c.s.flag("cache") ? std::optional<fs::path>(c.run_dir / "cache") : std::nullopt);
  report_skips(c, data);
  const Dataset train_set = first_n(data.train, limit), val_set = first_n(data.val, limit);

  for (std::uint64_t k = 0; k < seeds; ++k) {
    const std::uint64_t seed = seed0 + k;
    const fs::path dir = seed_dir(c, seed, seeds);
    fs::create_directories(dir);
    auto model = build_model<float>(id, RngStream(seed), cfg.input_shape());
    tc.seed = seed;
    tc.on_epoch = [&](const EpochRecord& r) {
      c.log->say("seed " + std::to_string(seed) + " epoch " + std::to_string(r.epoch) + " train_loss " +
                 fixed(r.train_loss, 4) + " val_mae " + fixed(r.val_mae, 4) + " (" + fixed(r.seconds, 1) + " s)");
    };
    const auto res = train(model, train_set, val_set, tc);
    res.best.save(dir / "checkpoint.ckpt");
    write_text(dir / "train_log.csv", res.log.to_csv());
    c.log->say("seed " + std::to_string(seed) + " best epoch " + std::to_string(res.best_epoch) + " val_mae " +
               fixed(res.best_val_mae, 4) + " -> " + (dir / "checkpoint.ckpt").string());
  }
  return kExitOk;
}

std::string split_word(Split s) {
  switch (s) {
    case Split::kTrain: return "training";
    case Split::kVal: return "validation";
    case Split::kTest: return "testing";
  }
  return "";
}

void check_input_shape(const Checkpoint& ck, const InputShape& want, const fs::path& path) {
  const auto meta = ck.metadata();
  const std::pair<const char*, std::int64_t> dims[] = {{"input_frames", want.frames},
                                                       {"input_height", want.height},
                                                       {"input_width", want.width},
                                                       {"input_channels", want.channels}};
  for (const auto& [key, value] : dims) {
    const auto it = meta.find(key);
    if (it != meta.end() && it->second != static_cast<double>(value))
      throw Error(ErrorCode::kShapeMismatch, path.string() + " was trained with " + key + " " +
                                                 shortest(it->second) + ", data has " + std::to_string(value));
  }
}

int cmd_eval(Context& c) {
  const auto cfg = PipelineConfig::by_name(c.s.str("preset"));
  const Split split = parse_split_key(c.s.str("split"));
  const auto seeds = c.s.count("seeds", 1);
  const auto seed0 = c.s.u64("seed");
  const fs::path metrics_path = output_path(c, "out");

  // Checkpoints are loaded and shape-checked before any clip is decoded.
  const std::string ck_key = c.s.str("checkpoint");
  const bool default_ck = c.s.all().at("checkpoint").second == "default";
  std::vector<std::pair<fs::path, Checkpoint>> checkpoints;
  for (std::uint64_t k = 0; k < seeds; ++k) {
    const std::uint64_t seed = seed0 + k;
    fs::path path;
    if (seeds > 1 && default_ck) {
      path = seed_dir(c, seed, seeds) / "checkpoint.ckpt";
    } else {
      std::string p = ck_key;
      if (const auto at = p.find("{seed}"); at != std::string::npos) p.replace(at, 6, std::to_string(seed));
      path = fs::path(p).is_absolute() ? fs::path(p) : c.run_dir / p;
    }
    auto ck = Checkpoint::load(path);
    check_input_shape(ck, cfg.input_shape(), path);
    checkpoints.emplace_back(path, std::move(ck));
  }

  const auto data = build_dataset(input_path(c, "manifest"), cfg, c.run_dir / "cache");
  report_skips(c, data);
  const Dataset d = first_n(data.split(split), c.s.u64("n"));
  if (d.empty()) throw Error(ErrorCode::kInvalidParams, "split " + std::string(to_string(split)) + " is empty");

  std::string metrics = "seed,split,samples,mae_cm\n";
  std::string residuals = "seed,sample,clip,window,label_cm,prediction_cm,residual_cm\n";
  std::vector<double> maes;
  char letter = '?';
  for (std::uint64_t k = 0; k < seeds; ++k) {
    const std::uint64_t seed = seed0 + k;
    const auto& [path, ck] = checkpoints[k];
    auto model = build_model<float>(ck.model, RngStream(0), cfg.input_shape());
    ck.apply_to(model);
    letter = model_letter(ck.model);
    const auto res = evaluate(model, d);
    maes.push_back(res.mae);
    metrics += std::to_string(seed) + "," + std::string(to_string(split)) + "," + std::to_string(d.size()) + "," +
               shortest(res.mae) + "\n";
    for (std::size_t i = 0; i < d.size(); ++i)
      residuals += std::to_string(seed) + "," + std::to_string(i) + "," + std::to_string(d.samples[i].clip) + "," +
                   std::to_string(d.samples[i].window) + "," + shortest(d.samples[i].label) + "," +
                   shortest(res.predictions[i]) + "," + shortest(res.residuals[i]) + "\n";
    c.log->say("seed " + std::to_string(seed) + "  " + path.string() + "  MAE " + fixed(res.mae, 2) + "cm");
  }
  double mean = 0.0;
  for (double m : maes) mean += m / static_cast<double>(maes.size());
  double var = 0.0;
  for (double m : maes) var += (m - mean) * (m - mean);
  const double sd = maes.size() > 1 ? std::sqrt(var / static_cast<double>(maes.size() - 1)) : 0.0;
  metrics += "mean," + std::string(to_string(split)) + "," + std::to_string(d.size()) + "," + shortest(mean) + "\n";
  metrics += "std," + std::string(to_string(split)) + "," + std::to_string(d.size()) + "," + shortest(sd) + "\n";
  write_text(metrics_path, metrics);
  fs::path res_path = metrics_path;
  res_path.replace_filename("residuals.csv");
  write_text(res_path, residuals);

  c.log->say("");
  c.log->say("MAE results on " + std::to_string(d.size()) + " " + split_word(split) + " video clips.");
  c.log->say("Model      MAE");
  c.log->say(std::string("Model-") + letter + "    " + format_mean_std(mean, sd));
  c.log->say("(" + std::to_string(maes.size()) + " seeds; metrics in " + metrics_path.string() + ")");
  return kExitOk;
}

InputShape gradcheck_shape(const std::string& scale) {
  if (scale == "reduced") return {4, 8, 8, 3};
  if (scale == "small") return InputShape::reduced();
  throw Error(ErrorCode::kConfig, "scale must be reduced or small, got '" + scale + "'");
}

int cmd_gradcheck(Context& c) {
  const double tol = c.s.real("tolerance");
  const auto coords = c.s.u64("coords");
  const auto seed = c.s.u64("seed");
  const std::string which = c.s.str("model");
  std::vector<std::pair<std::string, std::vector<GradCheckRow>>> groups;
  if (which == "primitives") {
    groups.emplace_back("primitives", primitive_grad_checks());
  } else {
    const InputShape shape = gradcheck_shape(c.s.str("scale"));
    for (ModelId id : model_list(which))
      groups.emplace_back(std::string("model ") + model_letter(id), model_grad_check(id, shape, 2, seed, coords));
  }
  std::optional<std::string> failure;
  for (const auto& [title, rows] : groups) {
    c.log->say(title);
    for (const auto& r : rows) {
      const bool ok = r.max_rel_error < tol;
      char line[160];
      std::snprintf(line, sizeof line, "  %-28s max_rel_error %.3e  coords %5zu  %s", r.name.c_str(), r.max_rel_error,
                    r.coords, ok ? "PASS" : "FAIL");
      c.log->say(line);
      if (!ok && !failure) failure = title + " layer " + r.name + " max relative error " + shortest(r.max_rel_error);
    }
  }
  if (failure) {
    c.err << "gradcheck failed: " << *failure << " >= " << shortest(tol) << "\n";
    c.log->note("gradcheck failed: " + *failure);
    return kExitVerify;
  }
  c.log->say("all gradients within " + shortest(tol));
  return kExitOk;
}

int cmd_params(Context& c) {
  for (ModelId id : model_list(c.s.str("model"))) {
    const auto model = build_model<float>(id, RngStream(0));
    c.log->say(std::string("Model-") + model_letter(id));
    for (const auto& [name, count] : model.layer_param_counts()) {
      char line[96];
      std::snprintf(line, sizeof line, "  %-20s %10s", name.c_str(), with_commas(count).c_str());
      c.log->say(line);
    }
    const auto total = model.param_count();
    const auto want = expected_param_count(id);
    char line[128];
    std::snprintf(line, sizeof line, "  %-20s %10s  (%zuK)  expected %s: %s", "total", with_commas(total).c_str(),
                  static_cast<std::size_t>(std::lround(static_cast<double>(total) / 1000.0)),
                  with_commas(want).c_str(), total == want ? "match" : "MISMATCH");
    c.log->say(line);
  }
  return kExitOk;
}

int cmd_curves(Context& c) {
  const auto log = TrainLog::from_csv(read_text(input_path(c, "log")));
  std::string csv = "series,epoch,value\n";
  for (const auto& r : log.records) csv += "train," + std::to_string(r.epoch) + "," + shortest(r.train_loss) + "\n";
  for (const auto& r : log.records)
    if (!std::isnan(r.val_mae)) csv += "val," + std::to_string(r.epoch) + "," + shortest(r.val_mae) + "\n";
  const fs::path out = output_path(c, "out");
  write_text(out, csv);
  c.out << csv;
  c.log->note("wrote " + out.string());
  return kExitOk;
}

int dispatch(const std::string& name, Context& c) {
  if (name == "synth") return cmd_synth(c);
  if (name == "train") return cmd_train(c);
  if (name == "eval") return cmd_eval(c);
  if (name == "gradcheck") return cmd_gradcheck(c);
  if (name == "params") return cmd_params(c);
  return cmd_curves(c);
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::kNumericFailure ? kExitNumeric : kExitInput; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"slump: video-based concrete slump regression toolkit", "slump"};
  app.require_subcommand(1);
  app.footer(
      "Every key can be set by --flag, by the environment variable SLUMP_<KEY> (upper case), or by a "
      "'key = value' line in the --config file, in that order of precedence.");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> global_opts;
  std::string config_flag;
  app.add_option("--config", config_flag, "config file of 'key = value' lines (env SLUMP_CONFIG)");
  for (const auto& k : global_keys())
    global_opts[k.name] = app.add_option("--" + dashed(k.name), flag_values[k.name], k.help + "  [env " + env_name(k.name) + "]")
                              ->default_str(k.def);

  std::map<std::string, std::map<std::string, CLI::Option*>> cmd_opts;
  std::map<std::string, std::map<std::string, std::string>> cmd_values;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->fallthrough();
    for (const auto& k : cmd.keys) {
      const std::string names = k.name == cmd.positional ? k.name + ",--" + dashed(k.name) : "--" + dashed(k.name);
      auto* opt = sub->add_option(names, cmd_values[cmd.name][k.name], k.help + "  [env " + env_name(k.name) + "]");
      opt->default_str(k.def.empty() ? "\"\"" : k.def);
      cmd_opts[cmd.name][k.name] = opt;
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help("", CLI::AppFormatMode::All) : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "slump: " << e.what() << "\n";
    return kExitInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const Command* cmd = nullptr;
  for (const auto& cc : commands())
    if (cc.name == name) cmd = &cc;

  std::unique_ptr<RunLog> log;
  try {
    std::map<std::string, std::string> file_values;
    std::string config_path = config_flag;
    if (config_path.empty())
      if (const char* e = std::getenv("SLUMP_CONFIG")) config_path = e;
    if (!config_path.empty()) file_values = read_config(config_path);

    Settings s;
    auto resolve = [&](const Key& k, CLI::Option* opt, const std::string& flag_value) {
      if (opt->count() > 0) return s.set(k.name, flag_value, "flag");
      if (const char* e = std::getenv(env_name(k.name).c_str())) return s.set(k.name, e, "env");
      if (const auto it = file_values.find(k.name); it != file_values.end())
        return s.set(k.name, it->second, "config");
      s.set(k.name, k.def, "default");
    };
    for (const auto& k : global_keys()) resolve(k, global_opts[k.name], flag_values[k.name]);
    for (const auto& k : cmd->keys) resolve(k, cmd_opts[name][k.name], cmd_values[name][k.name]);

    const auto threads = s.count("threads", 1);
    kernels::set_num_threads(static_cast<unsigned>(threads));
    const fs::path run_dir = s.str("run_dir");
    if (run_dir.empty()) throw Error(ErrorCode::kConfig, "run_dir must not be empty");
    std::error_code ec;
    fs::create_directories(run_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create run directory " + run_dir.string() + ": " + ec.message());
    log = std::make_unique<RunLog>(run_dir / "run.log", out);
    log->note("# slump " + name);
    if (!config_path.empty()) log->note("# config file " + config_path);
    for (const auto& [key, vs] : s.all()) log->note(key + " = " + vs.first + "  # " + vs.second);

    Context ctx{std::move(s), run_dir, log.get(), out, err};
    return dispatch(name, ctx);
  } catch (const Error& e) {
    err << "slump " << name << ": " << e.what() << "\n";
    if (log) log->note(std::string("error: ") + e.what());
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "slump " << name << ": io: " << e.what() << "\n";
    if (log) log->note(std::string("error: ") + e.what());
    return kExitInput;
  }
}

}  // namespace slump::cli
