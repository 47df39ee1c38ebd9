#include <r2rl/agent.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace r2rl {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

// Pre-activation and post-activation values of every layer for one input.
struct ForwardTrace {
    std::vector<Vector> activations;  // activations[0] = input, activations[L] = output
    std::vector<Vector> pre;          // pre[l] = W_l a_l + b_l
};

ForwardTrace trace_forward(const std::vector<DenseLayer>& layers, std::span<const double> input) {
    ForwardTrace tr;
    tr.activations.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const DenseLayer& layer = layers[l];
        const Vector& a = tr.activations.back();
        Vector z(layer.rows);
        for (std::size_t r = 0; r < layer.rows; ++r) {
            double s = layer.biases[r];
            const double* row = &layer.weights[r * layer.cols];
            for (std::size_t c = 0; c < layer.cols; ++c) s += row[c] * a[c];
            z[r] = s;
        }
        Vector out = z;
        if (l + 1 < layers.size())
            for (double& v : out) v = v > 0.0 ? v : 0.0;
        tr.pre.push_back(std::move(z));
        tr.activations.push_back(std::move(out));
    }
    return tr;
}

class Writer {
  public:
    template <typename T>
    void put(T v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out_.append(buf, sizeof(T));
    }
    void put_bytes(std::string_view s) { out_.append(s); }
    std::string take() { return std::move(out_); }

  private:
    std::string out_;
};

class Reader {
  public:
    explicit Reader(std::string_view data) : data_(data) {}

    template <typename T>
    T get(std::string_view what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view get_bytes(std::size_t n, std::string_view what) {
        need(n, what);
        std::string_view s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    [[noreturn]] void fail(std::string_view what) const {
        throw IoError(fmt::format("checkpoint: {} at byte offset {}", what, pos_));
    }

  private:
    void need(std::size_t n, std::string_view what) const {
        if (data_.size() - pos_ < n)
            throw IoError(fmt::format("checkpoint: truncated while reading {} at byte offset {} (need {} bytes, have {})",
                                      what, pos_, n, data_.size() - pos_));
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace

// --- network ------------------------------------------------------------------

QNetwork::QNetwork(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw InvalidArgument("QNetwork needs at least input and output widths");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.cols = widths[l];
        layer.rows = widths[l + 1];
        layer.weights.assign(layer.rows * layer.cols, 0.0);
        layer.biases.assign(layer.rows, 0.0);
        layers_.push_back(std::move(layer));
    }
}

QNetwork::QNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& layer = layers_[l];
        if (layer.weights.size() != layer.rows * layer.cols || layer.biases.size() != layer.rows)
            throw InvalidArgument(fmt::format("QNetwork: layer {} storage does not match its shape", l));
        if (l > 0 && layer.cols != layers_[l - 1].rows)
            throw InvalidArgument(fmt::format("QNetwork: layer {} input width does not match layer {}", l, l - 1));
    }
}

QNetwork QNetwork::glorot(const std::vector<std::size_t>& widths, Rng& rng) {
    QNetwork net(widths);
    for (DenseLayer& layer : net.layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.rows + layer.cols));
        for (double& w : layer.weights) w = uniform(rng, -limit, limit);
    }
    return net;
}

std::vector<std::size_t> QNetwork::widths_for(const RunConfig& cfg) {
    std::vector<std::size_t> widths{static_cast<std::size_t>(RunConfig::n_states)};
    for (int l = 0; l < cfg.hidden_layers; ++l) widths.push_back(static_cast<std::size_t>(cfg.hidden_nodes));
    widths.push_back(static_cast<std::size_t>(RunConfig::n_action));
    return widths;
}

Vector QNetwork::forward(std::span<const double> state) const {
    if (layers_.empty()) throw InvalidArgument("QNetwork::forward on an empty network");
    if (state.size() != input_size())
        throw InvalidArgument(fmt::format("QNetwork::forward: expected {} inputs, got {}", input_size(), state.size()));
    return trace_forward(layers_, state).activations.back();
}

std::vector<std::size_t> QNetwork::widths() const {
    std::vector<std::size_t> out;
    if (layers_.empty()) return out;
    out.push_back(layers_.front().cols);
    for (const DenseLayer& layer : layers_) out.push_back(layer.rows);
    return out;
}

bool QNetwork::all_finite() const {
    for (const DenseLayer& layer : layers_) {
        if (!std::all_of(layer.weights.begin(), layer.weights.end(), [](double v) { return std::isfinite(v); }))
            return false;
        if (!std::all_of(layer.biases.begin(), layer.biases.end(), [](double v) { return std::isfinite(v); }))
            return false;
    }
    return true;
}

// --- replay -------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidArgument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
        return;
    }
    items_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
    if (i >= items_.size()) throw InvalidArgument("ReplayBuffer::at: index out of range");
    return items_[(head_ + i) % items_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
    if (items_.size() < k)
        throw InvalidArgument(fmt::format("ReplayBuffer::sample: need {} transitions, have {}", k, items_.size()));
    std::vector<Transition> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(items_[uniform_index(rng, items_.size())]);
    return out;
}

// --- policy and targets -------------------------------------------------------

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw InvalidArgument("argmax of an empty span");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

OperatorId select_action(std::span<const double> q_values, double epsilon, Rng& rng) {
    if (q_values.size() != kOperatorCount)
        throw InvalidArgument(fmt::format("select_action: expected {} q-values", kOperatorCount));
    if (uniform01(rng) < epsilon) return random_select(rng);
    return static_cast<OperatorId>(argmax(q_values));
}

double epsilon_schedule(int game_index, const RunConfig& cfg) {
    const double remaining = static_cast<double>(cfg.n_game - game_index) / cfg.n_game;
    return std::pow(remaining, cfg.power_p) * (cfg.eps_initial - cfg.eps_final) + cfg.eps_final;
}

double ddqn_target(const Transition& t, const QNetwork& main, const QNetwork& target, double gamma) {
    if (t.terminal) return t.r;
    const std::size_t a_star = argmax(main.forward(t.s_next));
    return t.r + gamma * target.forward(t.s_next)[a_star];
}

double batch_loss(const QNetwork& net, const std::vector<Transition>& batch, std::span<const double> targets) {
    if (batch.empty() || batch.size() != targets.size()) throw InvalidArgument("batch_loss: batch/target mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double diff = net.forward(batch[i].s)[static_cast<std::size_t>(batch[i].a)] - targets[i];
        total += diff * diff;
    }
    return total / static_cast<double>(batch.size());
}

std::vector<DenseLayer> batch_loss_gradient(const QNetwork& net, const std::vector<Transition>& batch,
                                            std::span<const double> targets) {
    if (batch.empty() || batch.size() != targets.size())
        throw InvalidArgument("batch_loss_gradient: batch/target mismatch");
    const auto& layers = net.layers();
    std::vector<DenseLayer> grad = layers;
    for (DenseLayer& g : grad) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.biases.begin(), g.biases.end(), 0.0);
    }
    const double scale = 2.0 / static_cast<double>(batch.size());

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const ForwardTrace tr = trace_forward(layers, batch[i].s);
        const auto action = static_cast<std::size_t>(batch[i].a);
        Vector delta(layers.back().rows, 0.0);
        delta[action] = scale * (tr.activations.back()[action] - targets[i]);

        for (std::size_t l = layers.size(); l-- > 0;) {
            const DenseLayer& layer = layers[l];
            const Vector& input = tr.activations[l];
            DenseLayer& g = grad[l];
            for (std::size_t r = 0; r < layer.rows; ++r) {
                if (delta[r] == 0.0) continue;
                g.biases[r] += delta[r];
                double* grow = &g.weights[r * layer.cols];
                for (std::size_t c = 0; c < layer.cols; ++c) grow[c] += delta[r] * input[c];
            }
            if (l == 0) break;
            Vector prev(layer.cols, 0.0);
            for (std::size_t r = 0; r < layer.rows; ++r) {
                if (delta[r] == 0.0) continue;
                const double* row = &layer.weights[r * layer.cols];
                for (std::size_t c = 0; c < layer.cols; ++c) prev[c] += row[c] * delta[r];
            }
            const Vector& pre = tr.pre[l - 1];
            for (std::size_t c = 0; c < layer.cols; ++c)
                if (pre[c] <= 0.0) prev[c] = 0.0;
            delta = std::move(prev);
        }
    }
    return grad;
}

double train_on_batch(QNetwork& main, const QNetwork& target, const std::vector<Transition>& batch, double gamma,
                      double learning_rate) {
    Vector targets(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) targets[i] = ddqn_target(batch[i], main, target, gamma);
    const double loss = batch_loss(main, batch, targets);
    const std::vector<DenseLayer> grad = batch_loss_gradient(main, batch, targets);
    auto& layers = main.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t k = 0; k < layers[l].weights.size(); ++k)
            layers[l].weights[k] -= learning_rate * grad[l].weights[k];
        for (std::size_t k = 0; k < layers[l].biases.size(); ++k)
            layers[l].biases[k] -= learning_rate * grad[l].biases[k];
    }
    if (!main.all_finite()) throw NumericalError("train_on_batch: network parameters became non-finite");
    return loss;
}

double train_step(QNetwork& main, const QNetwork& target, const ReplayBuffer& buffer, std::size_t batch_size,
                  double gamma, double learning_rate, Rng& rng) {
    if (buffer.size() < batch_size)
        throw InvalidArgument(
            fmt::format("train_step: buffer holds {} transitions, batch needs {}", buffer.size(), batch_size));
    return train_on_batch(main, target, buffer.sample(batch_size, rng), gamma, learning_rate);
}

bool sync_target(const QNetwork& main, QNetwork& target, int& step_counter, int target_sync) {
    if (step_counter < target_sync) return false;
    target = main;
    step_counter = 0;
    return true;
}

// --- agent ----------------------------------------------------------------------

DdqnAgent::DdqnAgent(const RunConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      main_(QNetwork::glorot(QNetwork::widths_for(cfg), init_rng)),
      target_(main_),
      buffer_(static_cast<std::size_t>(cfg.replay_size)) {}

OperatorId DdqnAgent::act(std::span<const double> state, double epsilon, Rng& rng) const {
    return select_action(main_.forward(state), epsilon, rng);
}

double DdqnAgent::observe(Transition t, Rng& rng) {
    buffer_.push(std::move(t));
    const auto batch = static_cast<std::size_t>(cfg_.batch_size);
    if (buffer_.size() < batch) return -1.0;
    const double loss = train_step(main_, target_, buffer_, batch, cfg_.gamma, cfg_.learning_rate, rng);
    ++updates_;
    ++sync_counter_;
    sync_target(main_, target_, sync_counter_, cfg_.target_sync);
    return loss;
}

// --- checkpoint -------------------------------------------------------------------

std::string encode_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    w.put_bytes(kCheckpointMagic);
    w.put<std::uint32_t>(kCheckpointVersion);
    const auto& layers = ckpt.network.layers();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(layers.size()));
    for (const DenseLayer& layer : layers) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.rows));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(layer.cols));
        for (double v : layer.weights) w.put<double>(v);
        for (double v : layer.biases) w.put<double>(v);
    }
    nlohmann::ordered_json meta;
    meta["seed"] = ckpt.meta.seed;
    meta["game_index"] = ckpt.meta.game_index;
    meta["games_played"] = ckpt.meta.games_played;
    meta["cumulative_reward"] = ckpt.meta.cumulative_reward;
    meta["config_hash"] = ckpt.meta.config_hash;
    meta["problem"] = ckpt.meta.problem;
    const std::string text = meta.dump();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
    w.put_bytes(text);
    return w.take();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    Reader r(bytes);
    if (r.get_bytes(kCheckpointMagic.size(), "magic") != kCheckpointMagic) {
        throw IoError("checkpoint: bad magic at byte offset 0");
    }
    const std::size_t version_offset = r.offset();
    const auto version = r.get<std::uint32_t>("format version");
    if (version != kCheckpointVersion)
        throw IoError(fmt::format("checkpoint: unsupported format version {} at byte offset {}", version, version_offset));
    const auto layer_count = r.get<std::uint32_t>("layer count");
    if (layer_count == 0 || layer_count > 64) r.fail(fmt::format("implausible layer count {}", layer_count));

    std::vector<DenseLayer> layers;
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        DenseLayer layer;
        layer.rows = r.get<std::uint32_t>("layer rows");
        layer.cols = r.get<std::uint32_t>("layer cols");
        if (layer.rows == 0 || layer.cols == 0) r.fail(fmt::format("empty shape for layer {}", l));
        if (!layers.empty() && layer.cols != layers.back().rows)
            r.fail(fmt::format("layer {} input width {} does not match previous output {}", l, layer.cols,
                               layers.back().rows));
        if (layer.rows * layer.cols > r.remaining() / sizeof(double))
            r.fail(fmt::format("layer {} shape {}x{} exceeds remaining data", l, layer.rows, layer.cols));
        layer.weights.resize(layer.rows * layer.cols);
        for (double& v : layer.weights) v = r.get<double>("weights");
        layer.biases.resize(layer.rows);
        for (double& v : layer.biases) v = r.get<double>("biases");
        layers.push_back(std::move(layer));
    }

    const auto meta_len = r.get<std::uint32_t>("metadata length");
    const std::size_t meta_offset = r.offset();
    const std::string_view text = r.get_bytes(meta_len, "metadata");
    if (r.remaining() != 0) r.fail("trailing bytes after metadata");

    Checkpoint ckpt{QNetwork(std::move(layers)), {}};
    try {
        const auto meta = nlohmann::json::parse(text);
        ckpt.meta.seed = meta.at("seed").get<std::uint64_t>();
        ckpt.meta.game_index = meta.at("game_index").get<long long>();
        ckpt.meta.games_played = meta.at("games_played").get<long long>();
        ckpt.meta.cumulative_reward = meta.at("cumulative_reward").get<double>();
        ckpt.meta.config_hash = meta.at("config_hash").get<std::string>();
        ckpt.meta.problem = meta.value("problem", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw IoError(fmt::format("checkpoint: malformed metadata at byte offset {}: {}", meta_offset, e.what()));
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path));
    const std::string bytes = encode_checkpoint(ckpt);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("failed writing {}", path));
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open checkpoint {}", path));
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_checkpoint(bytes);
    } catch (const IoError& e) {
        throw IoError(fmt::format("{}: {}", path, e.what()));
    }
}

}  // namespace r2rl
