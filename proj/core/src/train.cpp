#include "neurokinect/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "neurokinect/adam.hpp"
#include "neurokinect/errors.hpp"
#include "neurokinect/rng.hpp"

namespace nk {

TrainReport train_model(ModelParams& params, const LaggedDataset& train_ds,
                        const LaggedDataset& val_ds, const TrainOptions& options) {
  if (train_ds.n_samples() < 2 || val_ds.n_samples() < 2) {
    throw Error(ErrorKind::EmptyInput, "train/val splits need at least 2 samples");
  }
  if (options.epochs < 1) {
    throw Error(ErrorKind::InvalidConfig, "epochs must be >= 1");
  }
  const auto t0 = std::chrono::steady_clock::now();

  AdamState adam;
  adam.lr = options.learning_rate;
  Rng dropout_rng(Rng::derive(options.seed, rng_stream::kDropout));

  CheckpointPolicy policy;
  policy.rho_tolerance = options.checkpoint_rho_tolerance;

  TrainReport report;
  report.checkpoint_path = options.checkpoint_path;

  Tape tape;
  std::vector<std::pair<Tensor*, Tape::ValueId>> param_ids;
  bool adam_ready = false;

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto batches = make_batches(train_ds.n_samples(), options.batch_size,
                                      /*shuffle=*/true, options.seed, epoch);
    LossValue epoch_loss;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      auto [inputs, targets] = gather_batch(train_ds, batches[bi]);
      tape.reset();
      param_ids.clear();
      const auto pred = model_forward(tape, params, inputs, /*train=*/true,
                                      &dropout_rng, &param_ids);
      LossValue batch_loss;
      const auto loss = tape.stat_loss(pred, targets, &batch_loss);
      if (!std::isfinite(batch_loss.total)) {
        throw Error(ErrorKind::NonFiniteLoss,
                    "epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(bi) + ": loss = " +
                        std::to_string(batch_loss.total));
      }
      epoch_loss += batch_loss;
      tape.backward(loss);

      std::vector<Tensor*> ps;
      std::vector<const Tensor*> gs;
      ps.reserve(param_ids.size());
      gs.reserve(param_ids.size());
      for (auto& [p, id] : param_ids) {
        ps.push_back(p);
        gs.push_back(&tape.grad(id));
      }
      if (!adam_ready) {
        adam.init(ps);
        adam_ready = true;
      }
      adam_step(ps, gs, adam);
    }
    const double inv_batches = 1.0 / static_cast<double>(batches.size());
    epoch_loss.total *= inv_batches;
    epoch_loss.term1 *= inv_batches;
    epoch_loss.term2 *= inv_batches;
    epoch_loss.term3 *= inv_batches;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss;
    rec.val = evaluate_split(params, val_ds);
    rec.checkpoint_taken = policy.should_save(rec.val);
    if (rec.checkpoint_taken) {
      policy.record_save(rec.val);
      report.best_val = rec.val;
      if (!options.checkpoint_path.empty()) {
        save_checkpoint(options.checkpoint_path, params);
      }
    }
    if (options.verbose) {
      std::printf("epoch %2d  loss %.5f (rho %.5f, err %.5f, var %.5f)  val rho_3d %.4f mse_3d %.5f%s\n",
                  epoch, epoch_loss.total, epoch_loss.term1, epoch_loss.term2,
                  epoch_loss.term3, rec.val.rho_3d, rec.val.mse_3d,
                  rec.checkpoint_taken ? "  *" : "");
      std::fflush(stdout);
    }
    report.epochs.push_back(rec);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

MetricsReport evaluate_split(ModelParams& params, const LaggedDataset& ds,
                             Tensor* predictions_out, int batch_size) {
  if (ds.n_samples() < 2) {
    throw Error(ErrorKind::EmptyInput, "split needs at least 2 samples");
  }
  Tensor pred({static_cast<int>(ds.n_samples()), 3});
  const auto batches =
      make_batches(ds.n_samples(), batch_size, /*shuffle=*/false, 0, 0);
  Tape tape;
  long row = 0;
  for (const auto& idx : batches) {
    auto [inputs, targets] = gather_batch(ds, idx);
    tape.reset();
    const auto out = model_forward(tape, params, inputs, /*train=*/false);
    const Tensor& v = tape.value(out);
    std::copy(v.data.begin(), v.data.end(), pred.ptr() + row * 3);
    row += static_cast<long>(idx.size());
  }
  const MetricsReport report = metrics_3d(pred, ds.targets);
  if (predictions_out) *predictions_out = std::move(pred);
  return report;
}

}  // namespace nk
