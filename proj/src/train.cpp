#include "slump/train.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "slump/autograd.hpp"

namespace slump {

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorCode::kFormat, "not a number: '" + s + "'");
  return v;
}

}  // namespace

std::string TrainLog::to_csv() const {
  std::string out = "epoch,train_loss,val_mae,seconds\n";
  for (const auto& r : records)
    out += std::to_string(r.epoch) + "," + fmt_double(r.train_loss) + "," + fmt_double(r.val_mae) + "," +
           fmt_double(r.seconds) + "\n";
  return out;
}

TrainLog TrainLog::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_mae,seconds")
    throw Error(ErrorCode::kFormat, "train log header must be 'epoch,train_loss,val_mae,seconds'");
  TrainLog log;
  int prev = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw Error(ErrorCode::kFormat, "train log row needs 4 fields: '" + line + "'");
    EpochRecord r;
    const double e = parse_double(cells[0]);
    r.epoch = static_cast<int>(e);
    if (r.epoch != e || r.epoch <= prev) throw Error(ErrorCode::kFormat, "epoch index must increase: '" + line + "'");
    prev = r.epoch;
    r.train_loss = parse_double(cells[1]);
    r.val_mae = parse_double(cells[2]);
    r.seconds = parse_double(cells[3]);
    log.records.push_back(r);
  }
  return log;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  RngStream rng(seed, 0x5348554646ULL + static_cast<std::uint64_t>(epoch));
  return permutation(n, rng);
}

EvalResult evaluate(Model<float>& model, const Dataset& data, std::size_t batch_size) {
  if (data.empty()) throw Error(ErrorCode::kInvalidParams, "cannot evaluate an empty dataset");
  data.check_shape(model.spec().input);
  NoGradGuard no_grad;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  EvalResult res;
  double acc = 0.0;
  for (std::size_t b = 0; b < idx.size(); b += batch_size) {
    const std::size_t e = std::min(idx.size(), b + batch_size);
    auto [x, y] = make_batch<float>(data, idx, b, e);
    const auto pred = model.forward(x, Mode::kInfer);
    for (std::size_t i = 0; i < e - b; ++i) {
      const double p = pred[i];
      const double r = p - data.samples[b + i].label;
      res.predictions.push_back(p);
      res.residuals.push_back(r);
      acc += std::abs(r);
    }
  }
  res.mae = acc / static_cast<double>(idx.size());
  return res;
}

TrainResult train(Model<float>& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config) {
  if (train_set.empty() || val_set.empty()) throw Error(ErrorCode::kInvalidParams, "train and val sets must be non-empty");
  if (config.batch_size < 1 || config.epochs < 1 || config.eval_every < 1)
    throw Error(ErrorCode::kInvalidParams, "batch size, epochs and eval_every must be >= 1");
  train_set.check_shape(model.spec().input);
  val_set.check_shape(model.spec().input);

  switch (config.output_init) {
    case OutputInit::kZero:
      break;
    case OutputInit::kLabelMean: {
      auto b = model.head().bias.mutable_data();
      std::fill(b.begin(), b.end(), static_cast<float>(train_set.label_mean()));
      break;
    }
    case OutputInit::kStandardize: {
      const double mu = train_set.label_mean();
      double sq = 0.0;
      for (const auto& s : train_set.samples) sq += (s.label - mu) * (s.label - mu);
      const double sd = std::sqrt(sq / static_cast<double>(train_set.size()));
      model.set_output_affine(mu, sd > 0.0 ? sd : 1.0);
      break;
    }
  }

  AdamW<float> opt(model.parameters(), config.optim);
  TrainResult result;
  result.best_val_mae = std::numeric_limits<double>::infinity();
  const std::size_t n = train_set.size();
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = epoch_order(n, config.seed, epoch);
    double loss_acc = 0.0;
    for (std::size_t b = 0; b < n; b += config.batch_size) {
      const std::size_t e = std::min(n, b + config.batch_size);
      auto [x, y] = make_batch<float>(train_set, order, b, e);
      const auto pred = model.forward(x, Mode::kTrain);
      const auto loss = mae_loss(pred, y);
      const double lv = loss.item();
      if (!std::isfinite(lv))
        throw Error(ErrorCode::kNumericFailure,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting at " + std::to_string(b));
      loss_acc += lv * static_cast<double>(e - b);
      opt.zero_grad();
      backward(loss);
      opt.step();
    }
    opt.zero_grad();
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_acc / static_cast<double>(n);
    rec.val_mae = std::numeric_limits<double>::quiet_NaN();
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      rec.val_mae = evaluate(model, val_set, config.batch_size).mae;
      if (rec.val_mae < result.best_val_mae) {
        result.best_val_mae = rec.val_mae;
        result.best_epoch = epoch;
        const auto& in = model.spec().input;
        result.best = Checkpoint::from_model(model, {{"epoch", epoch},
                                                     {"val_mae", rec.val_mae},
                                                     {"seed", static_cast<double>(config.seed)},
                                                     {"input_frames", static_cast<double>(in.frames)},
                                                     {"input_height", static_cast<double>(in.height)},
                                                     {"input_width", static_cast<double>(in.width)},
                                                     {"input_channels", static_cast<double>(in.channels)}});
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.seconds = config.deterministic ? 0.0 : secs;
    result.log.records.push_back(rec);
    if (config.on_epoch) {
      EpochRecord shown = rec;
      shown.seconds = secs;
      config.on_epoch(shown);
    }
  }
  return result;
}

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1fcm ±%.1fcm", mean, std);
  return buf;
}

}  // namespace slump
