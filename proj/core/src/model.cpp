#include "neurokinect/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "neurokinect/errors.hpp"
#include "neurokinect/rng.hpp"

namespace nk {

using nlohmann::json;

std::string to_string(Act act) {
  switch (act) {
    case Act::Relu: return "relu";
    case Act::Elu: return "elu";
    case Act::Selu: return "selu";
    case Act::LeakyRelu: return "leaky_relu";
    case Act::Sigmoid: return "sigmoid";
    case Act::Tanh: return "tanh";
  }
  return "relu";
}

Act act_from_string(const std::string& name) {
  if (name == "relu") return Act::Relu;
  if (name == "elu") return Act::Elu;
  if (name == "selu") return Act::Selu;
  if (name == "leaky_relu") return Act::LeakyRelu;
  if (name == "sigmoid") return Act::Sigmoid;
  if (name == "tanh") return Act::Tanh;
  throw Error(ErrorKind::InvalidConfig, "unknown activation '" + name + "'");
}

namespace {

void validate(const ModelConfig& cfg) {
  if (cfg.n_channels < 1 || cfg.window_steps < 1) {
    throw Error(ErrorKind::InvalidConfig, "n_channels and window_steps must be >= 1");
  }
  if (cfg.conv_branches.empty()) {
    throw Error(ErrorKind::InvalidConfig, "need at least one conv branch");
  }
  for (const auto& b : cfg.conv_branches) {
    if (b.width < 1) throw Error(ErrorKind::InvalidConfig, "conv branch width must be >= 1");
  }
  if (cfg.lstm_hidden < 1) {
    throw Error(ErrorKind::InvalidConfig, "lstm_hidden must be >= 1");
  }
  for (int w : cfg.dense_widths) {
    if (w < 1) throw Error(ErrorKind::InvalidConfig, "dense width must be >= 1");
  }
  if (cfg.output_dim != 3) {
    throw Error(ErrorKind::InvalidConfig, "output_dim must be 3");
  }
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0) {
    throw Error(ErrorKind::InvalidConfig, "dropout_rate must be in [0, 1)");
  }
}

Tensor glorot_uniform(int fan_in, int fan_out, std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.data) v = rng.uniform(-a, a);
  return t;
}

}  // namespace

void ModelParams::for_each_param(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (std::size_t k = 0; k < conv.size(); ++k) {
    fn("conv" + std::to_string(k) + ".w", conv[k].first);
    fn("conv" + std::to_string(k) + ".b", conv[k].second);
  }
  fn("lstm.fwd.wx", forward_dir.wx);
  fn("lstm.fwd.wh", forward_dir.wh);
  fn("lstm.fwd.b", forward_dir.bias);
  fn("lstm.bwd.wx", backward_dir.wx);
  fn("lstm.bwd.wh", backward_dir.wh);
  fn("lstm.bwd.b", backward_dir.bias);
  for (std::size_t k = 0; k < dense.size(); ++k) {
    const std::string p = "dense" + std::to_string(k);
    fn(p + ".w", dense[k].weight);
    fn(p + ".b", dense[k].bias);
    fn(p + ".gamma", dense[k].gamma);
    fn(p + ".beta", dense[k].beta);
  }
  fn("head.w", head_weight);
  fn("head.b", head_bias);
}

void ModelParams::for_each_state(const std::function<void(const std::string&, Tensor&)>& fn) {
  for (std::size_t k = 0; k < dense.size(); ++k) {
    const std::string p = "dense" + std::to_string(k);
    fn(p + ".running_mean", dense[k].bn.running_mean);
    fn(p + ".running_var", dense[k].bn.running_var);
  }
}

long ModelParams::param_count() {
  long n = 0;
  for_each_param([&n](const std::string&, Tensor& t) { n += t.numel(); });
  return n;
}

ModelParams init_model(const ModelConfig& cfg) {
  validate(cfg);
  Rng rng(Rng::derive(cfg.seed, rng_stream::kModelInit));
  ModelParams p;
  p.config = cfg;
  const int n = cfg.n_channels;
  for (const auto& branch : cfg.conv_branches) {
    p.conv.emplace_back(glorot_uniform(n, branch.width, {n, branch.width}, rng),
                        Tensor({branch.width}));
  }
  const int f = cfg.conv_features();
  const int h = cfg.lstm_hidden;
  for (LstmDirection* dir : {&p.forward_dir, &p.backward_dir}) {
    dir->wx = glorot_uniform(f, 4 * h, {f, 4 * h}, rng);
    dir->wh = glorot_uniform(h, 4 * h, {h, 4 * h}, rng);
    dir->bias = Tensor({4 * h});
  }
  int in = 2 * h;
  for (int w : cfg.dense_widths) {
    DenseLayer layer;
    layer.weight = glorot_uniform(in, w, {in, w}, rng);
    layer.bias = Tensor({w});
    layer.gamma = Tensor({w});
    std::fill(layer.gamma.data.begin(), layer.gamma.data.end(), 1.0);
    layer.beta = Tensor({w});
    layer.bn.running_mean = Tensor({w});
    layer.bn.running_var = Tensor({w});
    std::fill(layer.bn.running_var.data.begin(), layer.bn.running_var.data.end(), 1.0);
    p.dense.push_back(std::move(layer));
    in = w;
  }
  p.head_weight = glorot_uniform(in, cfg.output_dim, {in, cfg.output_dim}, rng);
  p.head_bias = Tensor({cfg.output_dim});
  return p;
}

long count_params(const ModelConfig& cfg) {
  validate(cfg);
  long n = 0;
  for (const auto& b : cfg.conv_branches) {
    n += static_cast<long>(cfg.n_channels) * b.width + b.width;
  }
  const long f = cfg.conv_features();
  const long h = cfg.lstm_hidden;
  n += 2 * (f * 4 * h + h * 4 * h + 4 * h);
  long in = 2 * h;
  for (int w : cfg.dense_widths) {
    n += in * w + w + 2 * w;  // affine + gamma/beta
    in = w;
  }
  n += in * cfg.output_dim + cfg.output_dim;
  return n;
}

Tape::ValueId model_forward(Tape& tape, ModelParams& params, const Tensor& batch,
                            bool train, Rng* dropout_rng,
                            std::vector<std::pair<Tensor*, Tape::ValueId>>* param_ids) {
  const ModelConfig& cfg = params.config;
  if (batch.shape.size() != 3 || batch.shape[1] != cfg.window_steps ||
      batch.shape[2] != cfg.n_channels) {
    throw Error(ErrorKind::ShapeMismatch,
                "batch " + batch.shape_str() + " does not match window_steps=" +
                    std::to_string(cfg.window_steps) + ", n_channels=" +
                    std::to_string(cfg.n_channels));
  }
  if (train && cfg.dropout_rate > 0.0 && dropout_rng == nullptr) {
    throw Error(ErrorKind::InvalidConfig, "train-mode forward needs a dropout rng");
  }
  const int b = batch.shape[0];
  const int steps = cfg.window_steps;
  const int n = cfg.n_channels;

  auto reg = [&](Tensor& t) {
    const Tape::ValueId id = tape.leaf(t);
    if (param_ids) param_ids->emplace_back(&t, id);
    return id;
  };

  // Step-major input layout so each time step is a contiguous row block.
  Tensor tm({steps * b, n});
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < steps; ++j) {
      const double* src = batch.ptr() + (static_cast<std::size_t>(i) * steps + j) * n;
      double* dst = tm.ptr() + (static_cast<std::size_t>(j) * b + i) * n;
      std::copy(src, src + n, dst);
    }
  }
  const Tape::ValueId x = tape.leaf(std::move(tm));

  // Pointwise branches, shared across time steps.
  std::vector<Tape::ValueId> branch_outs;
  for (std::size_t k = 0; k < params.conv.size(); ++k) {
    const Tape::ValueId w = reg(params.conv[k].first);
    const Tape::ValueId bias = reg(params.conv[k].second);
    Tape::ValueId y = tape.matmul(x, w);
    y = tape.add(y, bias);
    branch_outs.push_back(tape.activation(cfg.conv_branches[k].activation, y));
  }
  Tape::ValueId features = branch_outs.size() == 1 ? branch_outs[0]
                                                   : tape.concat_cols(branch_outs);
  features = tape.softmax_rows(features);

  // Bidirectional LSTM over the step sequence; keeps each direction's final
  // hidden state.
  const int h = cfg.lstm_hidden;
  auto run_direction = [&](LstmDirection& dir, bool reverse) {
    const Tape::ValueId wx = reg(dir.wx);
    const Tape::ValueId wh = reg(dir.wh);
    const Tape::ValueId bias = reg(dir.bias);
    Tape::ValueId h_prev = tape.leaf(Tensor({b, h}));
    Tape::ValueId c_prev = tape.leaf(Tensor({b, h}));
    for (int step = 0; step < steps; ++step) {
      const int j = reverse ? steps - 1 - step : step;
      const Tape::ValueId x_t = tape.slice_rows(features, j * b, (j + 1) * b);
      Tape::ValueId z = tape.matmul(x_t, wx);
      z = tape.add(z, tape.matmul(h_prev, wh));
      z = tape.add(z, bias);
      const Tape::ValueId gate_in = tape.activation(Act::Sigmoid, tape.slice_cols(z, 0, h));
      const Tape::ValueId gate_forget =
          tape.activation(Act::Sigmoid, tape.slice_cols(z, h, 2 * h));
      const Tape::ValueId cand = tape.activation(Act::Tanh, tape.slice_cols(z, 2 * h, 3 * h));
      const Tape::ValueId gate_out =
          tape.activation(Act::Sigmoid, tape.slice_cols(z, 3 * h, 4 * h));
      c_prev = tape.add(tape.mul(gate_forget, c_prev), tape.mul(gate_in, cand));
      h_prev = tape.mul(gate_out, tape.activation(Act::Tanh, c_prev));
    }
    return h_prev;
  };
  const Tape::ValueId h_fwd = run_direction(params.forward_dir, false);
  const Tape::ValueId h_bwd = run_direction(params.backward_dir, true);
  Tape::ValueId state = tape.concat_cols({h_fwd, h_bwd});
  state = tape.softmax_rows(state);

  // Dense stack: affine -> batch norm -> activation -> dropout.
  for (auto& layer : params.dense) {
    const Tape::ValueId w = reg(layer.weight);
    const Tape::ValueId bias = reg(layer.bias);
    const Tape::ValueId gamma = reg(layer.gamma);
    const Tape::ValueId beta = reg(layer.beta);
    state = tape.add(tape.matmul(state, w), bias);
    state = tape.batch_norm(state, gamma, beta, &layer.bn, train);
    state = tape.activation(cfg.dense_activation, state);
    state = tape.dropout(state, cfg.dropout_rate, train, dropout_rng);
  }
  const Tape::ValueId hw = reg(params.head_weight);
  const Tape::ValueId hb = reg(params.head_bias);
  Tape::ValueId out = tape.add(tape.matmul(state, hw), hb);
  if (cfg.output_activation == OutputActivation::Sigmoid) {
    out = tape.activation(Act::Sigmoid, out);
  }
  return out;
}

Tensor predict(ModelParams& params, const Tensor& batch) {
  Tape tape;
  const auto out = model_forward(tape, params, batch, /*train=*/false);
  return tape.value(out);
}

namespace {

json config_to_json(const ModelConfig& cfg) {
  json branches = json::array();
  for (const auto& b : cfg.conv_branches) {
    branches.push_back({{"width", b.width}, {"activation", to_string(b.activation)}});
  }
  return json{{"n_channels", cfg.n_channels},
              {"window_steps", cfg.window_steps},
              {"conv_branches", branches},
              {"lstm_hidden", cfg.lstm_hidden},
              {"dense_widths", cfg.dense_widths},
              {"dense_activation", to_string(cfg.dense_activation)},
              {"dropout_rate", cfg.dropout_rate},
              {"output_dim", cfg.output_dim},
              {"output_activation",
               cfg.output_activation == OutputActivation::Sigmoid ? "sigmoid" : "linear"},
              {"seed", cfg.seed}};
}

ModelConfig config_from_json(const json& doc) {
  ModelConfig cfg;
  cfg.n_channels = doc.at("n_channels").get<int>();
  cfg.window_steps = doc.at("window_steps").get<int>();
  cfg.conv_branches.clear();
  for (const auto& b : doc.at("conv_branches")) {
    cfg.conv_branches.push_back(
        {b.at("width").get<int>(), act_from_string(b.at("activation").get<std::string>())});
  }
  cfg.lstm_hidden = doc.at("lstm_hidden").get<int>();
  cfg.dense_widths = doc.at("dense_widths").get<std::vector<int>>();
  cfg.dense_activation = act_from_string(doc.at("dense_activation").get<std::string>());
  cfg.dropout_rate = doc.at("dropout_rate").get<double>();
  cfg.output_dim = doc.at("output_dim").get<int>();
  cfg.output_activation = doc.at("output_activation").get<std::string>() == "sigmoid"
                              ? OutputActivation::Sigmoid
                              : OutputActivation::Linear;
  cfg.seed = doc.at("seed").get<std::uint64_t>();
  return cfg;
}

constexpr char kCheckpointMagic[8] = {'N', 'K', 'C', 'K', '0', '0', '0', '1'};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::string cfg = config_to_json(params.config).dump();
  const auto cfg_len = static_cast<std::uint32_t>(cfg.size());
  out.write(reinterpret_cast<const char*>(&cfg_len), sizeof(cfg_len));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));

  std::vector<std::pair<std::string, Tensor*>> tensors;
  params.for_each_param([&](const std::string& name, Tensor& t) {
    tensors.emplace_back(name, &t);
  });
  params.for_each_state([&](const std::string& name, Tensor& t) {
    tensors.emplace_back(name, &t);
  });
  const auto count = static_cast<std::uint32_t>(tensors.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [name, t] : tensors) {
    const auto name_len = static_cast<std::uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    const auto ndim = static_cast<std::uint32_t>(t->shape.size());
    out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
    for (int d : t->shape) {
      const auto dim = static_cast<std::int64_t>(d);
      out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    }
    out.write(reinterpret_cast<const char*>(t->data.data()),
              static_cast<std::streamsize>(t->data.size() * sizeof(double)));
  }
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::CorruptData, path.string() + " is not a checkpoint");
  }
  std::uint32_t cfg_len = 0;
  in.read(reinterpret_cast<char*>(&cfg_len), sizeof(cfg_len));
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));
  ModelConfig cfg;
  try {
    cfg = config_from_json(json::parse(cfg_text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CorruptData, "checkpoint config: " + std::string(e.what()));
  }
  ModelParams params = init_model(cfg);

  std::map<std::string, Tensor*> by_name;
  params.for_each_param([&](const std::string& name, Tensor& t) { by_name[name] = &t; });
  params.for_each_state([&](const std::string& name, Tensor& t) { by_name[name] = &t; });

  std::uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  std::size_t filled = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    std::uint32_t ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
    std::vector<int> shape(ndim);
    for (auto& d : shape) {
      std::int64_t dim = 0;
      in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
      d = static_cast<int>(dim);
    }
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw Error(ErrorKind::CorruptData, "checkpoint has unknown tensor '" + name + "'");
    }
    if (it->second->shape != shape) {
      throw Error(ErrorKind::CorruptData, "checkpoint tensor '" + name + "' shape mismatch");
    }
    in.read(reinterpret_cast<char*>(it->second->data.data()),
            static_cast<std::streamsize>(it->second->data.size() * sizeof(double)));
    ++filled;
  }
  if (!in || filled != by_name.size()) {
    throw Error(ErrorKind::CorruptData, path.string() + " is incomplete");
  }
  return params;
}

}  // namespace nk
