// Copyright (c) 2026 The smokegrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "smokegrid/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "smokegrid/error.hpp"
#include "smokegrid/textio.hpp"

namespace smokegrid {

// ---------------------------------------------------------------------------
// Spec

NetworkSpec NetworkSpec::defaults(std::size_t in_channels) {
  NetworkSpec s;
  s.in_channels = in_channels;
  for (std::size_t k : {11, 7, 5, 3, 3}) s.backbone.push_back({k, 16, Activation::relu});
  for (auto& h : s.heads) h = {{3, 16, Activation::relu}, {3, 1, Activation::none}};
  return s;
}

void NetworkSpec::validate() const {
  require(in_channels >= 1, ErrorCode::invalid_argument, "network needs at least one input channel");
  auto check = [](const LayerSpec& l, const std::string& where) {
    require(l.kernel >= 1 && l.kernel % 2 == 1, ErrorCode::invalid_argument, where + ": kernel size must be odd and >= 1");
    require(l.filters >= 1, ErrorCode::invalid_argument, where + ": filter count must be >= 1");
  };
  for (std::size_t i = 0; i < backbone.size(); ++i) {
    check(backbone[i], "backbone layer " + std::to_string(i));
    require(backbone[i].activation == Activation::relu, ErrorCode::invalid_argument, "backbone layers must use relu");
  }
  for (std::size_t h = 0; h < 3; ++h) {
    const auto& head = heads[h];
    const std::string name = std::string("head ") + kHeadNames[h];
    require(!head.empty(), ErrorCode::invalid_argument, name + " has no layers");
    for (std::size_t i = 0; i < head.size(); ++i) {
      check(head[i], name + " layer " + std::to_string(i));
      const bool last = i + 1 == head.size();
      require(last ? head[i].activation == Activation::none : head[i].activation == Activation::relu,
              ErrorCode::invalid_argument, name + ": only the final layer may skip the activation");
    }
    require(head.back().filters == 1, ErrorCode::invalid_argument, name + ": final layer must have one filter");
  }
}

std::size_t NetworkSpec::layer_count() const {
  return backbone.size() + heads[0].size() + heads[1].size() + heads[2].size();
}

std::string NetworkSpec::layer_name(std::size_t layer) const {
  if (layer < backbone.size()) return "backbone." + std::to_string(layer);
  layer -= backbone.size();
  for (std::size_t h = 0; h < 3; ++h) {
    if (layer < heads[h].size()) return std::string("head.") + kHeadNames[h] + "." + std::to_string(layer);
    layer -= heads[h].size();
  }
  return "layer?";
}

std::vector<LayerSpec> parse_layers(const std::string& text) {
  std::vector<LayerSpec> out;
  if (trim(text).empty()) return out;
  for (const auto& entry : split(text, ',')) {
    const auto parts = split(entry, ':');
    const auto dims = split(parts[0], 'x');
    require(dims.size() == 2 && parts.size() <= 2, ErrorCode::parse, "layer must look like 3x16[:relu|none], got '" + entry + "'");
    LayerSpec l;
    l.kernel = static_cast<std::size_t>(parse_integer(dims[0]));
    l.filters = static_cast<std::size_t>(parse_integer(dims[1]));
    if (parts.size() == 2) {
      require(parts[1] == "relu" || parts[1] == "none", ErrorCode::parse, "unknown activation '" + parts[1] + "'");
      l.activation = parts[1] == "relu" ? Activation::relu : Activation::none;
    }
    out.push_back(l);
  }
  return out;
}

std::string format_layers(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (const auto& l : layers) {
    if (!out.empty()) out += ',';
    out += std::to_string(l.kernel) + "x" + std::to_string(l.filters) +
           (l.activation == Activation::relu ? ":relu" : ":none");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

struct LayerRef {
  const LayerSpec* spec;
  std::size_t in_channels;
};

std::vector<LayerRef> layer_refs(const NetworkSpec& spec) {
  std::vector<LayerRef> out;
  std::size_t c = spec.in_channels;
  for (const auto& l : spec.backbone) {
    out.push_back({&l, c});
    c = l.filters;
  }
  const std::size_t shared = c;
  for (const auto& head : spec.heads) {
    c = shared;
    for (const auto& l : head) {
      out.push_back({&l, c});
      c = l.filters;
    }
  }
  return out;
}

}  // namespace

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& t : tensors) t.zero_grad();
}

template <typename T>
ParamStore<T> ParamStore<T>::clone() const {
  ParamStore<T> out;
  for (const auto& t : tensors) {
    Tensor<T> c(t.shape(), std::vector<T>(t.data().begin(), t.data().end()));
    c.set_requires_grad(true);
    out.tensors.push_back(std::move(c));
  }
  out.first_moment = first_moment;
  out.second_moment = second_moment;
  out.step = step;
  return out;
}

template <typename T>
ParamStore<T> init_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ParamStore<T> p;
  for (const LayerRef& ref : layer_refs(spec)) {
    const std::size_t k = ref.spec->kernel, f = ref.spec->filters;
    const double bound = std::sqrt(1.0 / static_cast<double>(k * k * ref.in_channels));
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<T> w(k * k * ref.in_channels * f);
    for (T& v : w) v = static_cast<T>(dist(rng));
    p.tensors.emplace_back(Shape{k, k, ref.in_channels, f}, std::move(w));
    p.tensors.emplace_back(Shape{f}, T(0));
  }
  for (auto& t : p.tensors) {
    t.set_requires_grad(true);
    p.first_moment.emplace_back(t.size(), T(0));
    p.second_moment.emplace_back(t.size(), T(0));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Forward and loss

template <typename T>
ForwardResult<T> forward(Tape<T>& tape, const ParamStore<T>& params, const NetworkSpec& spec, const Tensor<T>& input,
                         const MaskGrid& input_mask, T eps) {
  require(input.rank() == 3, ErrorCode::shape_mismatch, "network input must be H x W x C");
  require(input.extent(2) == spec.in_channels, ErrorCode::shape_mismatch,
          "input has " + std::to_string(input.extent(2)) + " channels, network expects " +
              std::to_string(spec.in_channels));
  require(input_mask.is_binary(), ErrorCode::invalid_argument, "network input mask must be binary");
  require(params.tensors.size() == 2 * spec.layer_count(), ErrorCode::shape_mismatch,
          "parameter store does not match the network spec");

  std::size_t layer = 0;
  auto apply = [&](const LayerSpec& l, Tensor<T> x, MaskGrid& m) {
    Tensor<T> y;
    try {
      y = conv2d_sparse(tape, x, m, params.kernel(layer), params.bias(layer), eps);
      if (l.activation == Activation::relu) y = relu(tape, y);
    } catch (const Error& e) {
      fail(e.code(), "layer " + spec.layer_name(layer) + ": " + e.what());
    }
    m = avgpool_mask(m, l.kernel);
    ++layer;
    return y;
  };

  Tensor<T> features = input;
  MaskGrid mask = input_mask;
  for (const auto& l : spec.backbone) features = apply(l, features, mask);

  ForwardResult<T> out;
  for (std::size_t h = 0; h < 3; ++h) {
    Tensor<T> x = features;
    MaskGrid m = mask;
    for (const auto& l : spec.heads[h]) x = apply(l, x, m);
    out.heads[h] = x;
    if (h == static_cast<std::size_t>(HeadId::pm25)) out.final_mask = std::move(m);
  }
  return out;
}

template <typename T>
Tensor<T> total_loss(Tape<T>& tape, const std::array<Tensor<T>, 3>& outputs, const Targets<T>& targets,
                     const MaskGrid& label_mask, const Gammas& gammas, Reduction reduction) {
  require(gammas.fw >= 0 && gammas.bscan >= 0 && gammas.pm25 >= 0, ErrorCode::invalid_argument,
          "loss weights must be non-negative");
  require(gammas.fw > 0 || gammas.bscan > 0 || gammas.pm25 > 0, ErrorCode::invalid_argument,
          "at least one loss weight must be positive");
  std::optional<Tensor<T>> sum;
  auto accumulate = [&](const Tensor<T>& term, double gamma) {
    Tensor<T> weighted = scale(tape, term, static_cast<T>(gamma));
    sum = sum ? add(tape, *sum, weighted) : weighted;
  };
  if (gammas.fw > 0) {
    require(targets.fw.size() > 0, ErrorCode::invalid_argument, "fw loss weight set but no fw target available");
    accumulate(l1_loss(tape, outputs[0], targets.fw, reduction), gammas.fw);
  }
  if (gammas.bscan > 0) {
    require(targets.bscan.size() > 0, ErrorCode::invalid_argument, "bscan loss weight set but no bscan target available");
    accumulate(l1_loss(tape, outputs[1], targets.bscan, reduction), gammas.bscan);
  }
  if (gammas.pm25 > 0) accumulate(masked_l1_loss(tape, outputs[2], targets.pm25, label_mask, reduction), gammas.pm25);
  return *sum;
}

template <typename T>
void adam_step(ParamStore<T>& params, const AdamConfig& config) {
  const bool any = std::any_of(params.tensors.begin(), params.tensors.end(),
                               [](const Tensor<T>& t) { return t.has_grad(); });
  require(any, ErrorCode::state, "adam_step called before any backward pass");
  require(params.first_moment.size() == params.tensors.size() && params.second_moment.size() == params.tensors.size(),
          ErrorCode::state, "optimizer state does not match parameters");
  ++params.step;
  const double t = static_cast<double>(params.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    Tensor<T>& p = params.tensors[i];
    auto theta = p.mutable_data();
    auto grad = p.grad();
    const bool has = p.has_grad();
    auto& m = params.first_moment[i];
    auto& v = params.second_moment[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double g = has ? static_cast<double>(grad[j]) : 0.0;
      const double mj = config.beta1 * static_cast<double>(m[j]) + (1.0 - config.beta1) * g;
      const double vj = config.beta2 * static_cast<double>(v[j]) + (1.0 - config.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = config.lr * (mj / bc1) / (std::sqrt(vj / bc2) + config.eps);
      theta[j] = static_cast<T>(static_cast<double>(theta[j]) - update);
    }
  }
}

// ---------------------------------------------------------------------------
// Examples and training

MaskGrid input_mask_for(const SampleFrame& frame, InputMaskPolicy policy) {
  if (policy == InputMaskPolicy::stations) return frame.mask;
  const Volume& in = frame.input;
  MaskGrid m = MaskGrid::zeros(in.rows, in.cols);
  for (std::size_t p = 0; p < in.rows * in.cols; ++p)
    for (std::size_t c = 0; c < in.channels; ++c)
      if (in.values[p * in.channels + c] != kSentinel) {
        m.values[p] = 1.0;
        break;
      }
  return m;
}

namespace {

template <typename T>
Tensor<T> plane_tensor(const Plane& p) {
  return Tensor<T>({p.rows, p.cols, 1}, std::vector<T>(p.values.begin(), p.values.end()));
}

}  // namespace

template <typename T>
Example<T> make_example(const SampleFrame& frame, const ChannelRegistry& registry, InputMaskPolicy policy) {
  require(frame.input.channels == registry.size(), ErrorCode::shape_mismatch,
          "frame channel count differs from the channel registry");
  Example<T> ex;
  ex.time = frame.time;
  ex.input = Tensor<T>({frame.input.rows, frame.input.cols, frame.input.channels},
                       std::vector<T>(frame.input.values.begin(), frame.input.values.end()));
  ex.input_mask = input_mask_for(frame, policy);
  if (auto i = registry.index_of("firework_pm25")) ex.targets.fw = plane_tensor<T>(frame.input.channel(*i));
  if (auto i = registry.index_of("bluesky_pm25")) ex.targets.bscan = plane_tensor<T>(frame.input.channel(*i));
  ex.targets.pm25 = plane_tensor<T>(frame.label);
  ex.label_mask = frame.mask;
  return ex;
}

template <typename T>
double evaluate_loss(const ParamStore<T>& params, const NetworkSpec& spec, const Example<T>& ex,
                     const TrainConfig& config) {
  Tape<T> tape;
  tape.set_recording(false);
  auto out = forward(tape, params, spec, ex.input, ex.input_mask, static_cast<T>(config.conv_eps));
  return static_cast<double>(
      total_loss(tape, out.heads, ex.targets, ex.label_mask, config.gammas, config.reduction).item());
}

template <typename T>
TrainResult<T> train(const std::vector<Example<T>>& train_set, const std::vector<Example<T>>& val_set,
                     const NetworkSpec& spec, const TrainConfig& config, std::optional<ParamStore<T>> initial,
                     const EpochCallback& on_epoch) {
  require(!train_set.empty(), ErrorCode::invalid_argument, "training set is empty");
  spec.validate();
  TrainResult<T> result;
  result.params = initial ? initial->clone() : init_network<T>(spec, config.seed);
  result.best = result.params.clone();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  double best_score = 0.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t step = 0; step < order.size(); ++step) {
      const Example<T>& ex = train_set[order[step]];
      try {
        Tape<T> tape;
        result.params.zero_grad();
        auto out = forward(tape, result.params, spec, ex.input, ex.input_mask, static_cast<T>(config.conv_eps));
        Tensor<T> loss = total_loss(tape, out.heads, ex.targets, ex.label_mask, config.gammas, config.reduction);
        tape.backward(loss);
        adam_step(result.params, config.adam);
        total += static_cast<double>(loss.item());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::numerical) throw;
        fail(ErrorCode::numerical, "training diverged (epoch " + std::to_string(epoch) + ", sample " +
                                       format_timestamp(ex.time) + "): " + e.what());
      }
    }
    EpochStats stats{epoch, total / static_cast<double>(order.size()), 0.0, result.params.step};
    if (!val_set.empty()) {
      double v = 0.0;
      for (const auto& ex : val_set) v += evaluate_loss(result.params, spec, ex, config);
      stats.val_loss = v / static_cast<double>(val_set.size());
    }
    result.history.push_back(stats);
    const double score = val_set.empty() ? stats.train_loss : stats.val_loss;
    if (epoch == 1 || score < best_score) {
      best_score = score;
      result.best = result.params.clone();
      result.best_epoch = epoch;
      if (!config.checkpoint.empty()) save_checkpoint(config.checkpoint, spec, result.best);
    }
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

template <typename T>
Plane predict(const ParamStore<T>& params, const NetworkSpec& spec, const Example<T>& ex, T eps) {
  Tape<T> tape;
  tape.set_recording(false);
  auto out = forward(tape, params, spec, ex.input, ex.input_mask, eps);
  const Tensor<T>& y = out.heads[static_cast<std::size_t>(HeadId::pm25)];
  Plane p(y.extent(0), y.extent(1));
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = inverse_log_transform(static_cast<double>(y.data()[i]));
  return p;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointMagic = "WFCKPT1";
constexpr const char* kHeaderEnd = "---";

template <typename T>
constexpr DType dtype_of() {
  return sizeof(T) == 4 ? DType::float32 : DType::float64;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  require(static_cast<bool>(is), ErrorCode::io, "truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

template <typename T>
void put_record(std::ostream& os, const Shape& shape, std::span<const T> values) {
  std::ostringstream buf(std::ios::binary);
  if constexpr (sizeof(T) == 4)
    write_wft(buf, shape, values);
  else
    write_wft(buf, shape, values, DType::float64);
  const std::string bytes = buf.str();
  put_u64(os, bytes.size());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

WftTensor get_record(std::istream& is) {
  const std::uint64_t n = get_u64(is);
  require(n < (std::uint64_t{1} << 40), ErrorCode::parse, "implausible checkpoint record length");
  std::string bytes(n, '\0');
  is.read(bytes.data(), static_cast<std::streamsize>(n));
  require(static_cast<bool>(is), ErrorCode::io, "truncated checkpoint record");
  std::istringstream rs(bytes, std::ios::binary);
  WftTensor t = read_wft(rs);
  require(wft_size(t.shape, t.dtype) == n, ErrorCode::parse, "checkpoint record length mismatch");
  return t;
}

struct Header {
  CheckpointInfo info;
  std::uint64_t step = 0;
  std::size_t tensors = 0;
  bool moments = false;
};

Header read_header(std::istream& is, const std::string& source) {
  std::string magic;
  std::getline(is, magic);
  require(trim(magic) == kCheckpointMagic, ErrorCode::parse, source + ": not a WFCKPT1 checkpoint");
  std::map<std::string, std::string> kv;
  for (auto& e : read_key_values(is, source, kHeaderEnd)) kv[e.key] = e.value;
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    require(it != kv.end(), ErrorCode::parse, source + ": checkpoint header missing '" + key + "'");
    return it->second;
  };
  Header h;
  const std::string& dt = get("dtype");
  require(dt == "float32" || dt == "float64", ErrorCode::parse, "unknown checkpoint dtype '" + dt + "'");
  h.info.dtype = dt == "float32" ? DType::float32 : DType::float64;
  h.info.spec.in_channels = static_cast<std::size_t>(parse_integer(get("in_channels")));
  h.info.spec.backbone = parse_layers(get("backbone"));
  for (std::size_t i = 0; i < 3; ++i) h.info.spec.heads[i] = parse_layers(get(std::string("head.") + kHeadNames[i]));
  h.info.spec.validate();
  h.step = static_cast<std::uint64_t>(parse_integer(get("step")));
  h.tensors = static_cast<std::size_t>(parse_integer(get("tensors")));
  h.moments = get("moments") == "1";
  require(h.tensors == 2 * h.info.spec.layer_count(), ErrorCode::parse, "checkpoint tensor count does not match spec");
  return h;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const ParamStore<T>& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    require(static_cast<bool>(os), ErrorCode::io, "cannot write checkpoint " + path.string());
    os << kCheckpointMagic << '\n'
       << "dtype = " << (sizeof(T) == 4 ? "float32" : "float64") << '\n'
       << "in_channels = " << spec.in_channels << '\n'
       << "backbone = " << format_layers(spec.backbone) << '\n';
    for (std::size_t i = 0; i < 3; ++i) os << "head." << kHeadNames[i] << " = " << format_layers(spec.heads[i]) << '\n';
    os << "step = " << params.step << '\n'
       << "tensors = " << params.tensors.size() << '\n'
       << "moments = 1\n"
       << kHeaderEnd << '\n';
    for (const auto& t : params.tensors) put_record<T>(os, t.shape(), t.data());
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
      put_record<T>(os, params.tensors[i].shape(), std::span<const T>(params.first_moment[i]));
      put_record<T>(os, params.tensors[i].shape(), std::span<const T>(params.second_moment[i]));
    }
    require(static_cast<bool>(os), ErrorCode::io, "failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open checkpoint " + path.string());
  return read_header(is, path.string()).info;
}

template <typename T>
ParamStore<T> load_checkpoint(const std::filesystem::path& path, NetworkSpec& spec) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::io, "cannot open checkpoint " + path.string());
  const Header h = read_header(is, path.string());
  spec = h.info.spec;
  ParamStore<T> p;
  p.step = h.step;
  const auto refs = layer_refs(spec);
  for (std::size_t i = 0; i < h.tensors; ++i) {
    const LayerRef& ref = refs[i / 2];
    const Shape expected = i % 2 == 0 ? Shape{ref.spec->kernel, ref.spec->kernel, ref.in_channels, ref.spec->filters}
                                      : Shape{ref.spec->filters};
    WftTensor w = get_record(is);
    require(w.shape == expected, ErrorCode::parse, "checkpoint tensor " + std::to_string(i) + " has unexpected shape");
    Tensor<T> t = to_tensor<T>(w);
    t.set_requires_grad(true);
    p.tensors.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < h.tensors; ++i) {
    if (h.moments) {
      WftTensor m = get_record(is);
      WftTensor v = get_record(is);
      require(m.shape == p.tensors[i].shape() && v.shape == p.tensors[i].shape(), ErrorCode::parse,
              "optimizer state shape mismatch in checkpoint");
      p.first_moment.emplace_back(m.values.begin(), m.values.end());
      p.second_moment.emplace_back(v.values.begin(), v.values.end());
    } else {
      p.first_moment.emplace_back(p.tensors[i].size(), T(0));
      p.second_moment.emplace_back(p.tensors[i].size(), T(0));
    }
  }
  return p;
}

#define SMOKEGRID_INSTANTIATE(T)                                                                                   \
  template struct ParamStore<T>;                                                                                   \
  template ParamStore<T> init_network<T>(const NetworkSpec&, std::uint64_t);                                       \
  template ForwardResult<T> forward<T>(Tape<T>&, const ParamStore<T>&, const NetworkSpec&, const Tensor<T>&,       \
                                       const MaskGrid&, T);                                                        \
  template Tensor<T> total_loss<T>(Tape<T>&, const std::array<Tensor<T>, 3>&, const Targets<T>&, const MaskGrid&,  \
                                   const Gammas&, Reduction);                                                      \
  template void adam_step<T>(ParamStore<T>&, const AdamConfig&);                                                   \
  template Example<T> make_example<T>(const SampleFrame&, const ChannelRegistry&, InputMaskPolicy);                \
  template double evaluate_loss<T>(const ParamStore<T>&, const NetworkSpec&, const Example<T>&, const TrainConfig&); \
  template TrainResult<T> train<T>(const std::vector<Example<T>>&, const std::vector<Example<T>>&,                 \
                                   const NetworkSpec&, const TrainConfig&, std::optional<ParamStore<T>>,           \
                                   const EpochCallback&);                                                          \
  template Plane predict<T>(const ParamStore<T>&, const NetworkSpec&, const Example<T>&, T);                       \
  template void save_checkpoint<T>(const std::filesystem::path&, const NetworkSpec&, const ParamStore<T>&);        \
  template ParamStore<T> load_checkpoint<T>(const std::filesystem::path&, NetworkSpec&);

SMOKEGRID_INSTANTIATE(float)
SMOKEGRID_INSTANTIATE(double)

#undef SMOKEGRID_INSTANTIATE

}  // namespace smokegrid
