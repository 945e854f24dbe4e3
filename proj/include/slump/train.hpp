#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slump/checkpoint.hpp"
#include "slump/dataset.hpp"
#include "slump/optim.hpp"

namespace slump {

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;

  // Header `epoch,train_loss,val_mae,seconds`; doubles in shortest
  // round-trip form so parsing reproduces them bit for bit.
  std::string to_csv() const;
  static TrainLog from_csv(const std::string& text);
};

// How the regression output is tied to the training labels before step 1.
//   kZero:        untouched head, raw cm outputs from a zero bias
//   kLabelMean:   head bias starts at the training-label mean
//   kStandardize: output affine set to (label mean, label std), so the
//                 network works in standardized units while loss and
//                 predictions stay in cm
enum class OutputInit { kZero, kLabelMean, kStandardize };

struct TrainConfig {
  std::size_t batch_size = 16;
  int epochs = 50;
  std::uint64_t seed = 0;
  int eval_every = 1;
  AdamWConfig optim{};
  OutputInit output_init = OutputInit::kStandardize;
  // Wall time is kept out of the log so repeated runs are byte-identical.
  bool deterministic = true;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  Checkpoint best;
  TrainLog log;
  int best_epoch = 0;
  double best_val_mae = 0.0;
};

// Epoch shuffle order; a pure function of (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

TrainResult train(Model<float>& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config);

struct EvalResult {
  double mae = 0.0;
  std::vector<double> predictions;
  std::vector<double> residuals;  // prediction - label
};

// Inference-mode evaluation; throws on an empty dataset.
EvalResult evaluate(Model<float>& model, const Dataset& data, std::size_t batch_size = 16);

// "10.8cm ±3.3cm"
std::string format_mean_std(double mean, double std);

}  // namespace slump
