#pragma once

#include <r2rl/core.hpp>
#include <r2rl/operators.hpp>

#include <string>

namespace r2rl {

/// Fully connected layer; weights are row-major with one row per output unit.
struct DenseLayer {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vector weights;
    Vector biases;

    double& w(std::size_t r, std::size_t c) { return weights[r * cols + c]; }
    double w(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }

    bool operator==(const DenseLayer&) const = default;
};

/// Dense Q-network: rectifier on hidden layers, identity on the output layer.
class QNetwork {
  public:
    QNetwork() = default;
    /// Zero-initialized network with the given layer widths (input first).
    explicit QNetwork(const std::vector<std::size_t>& widths);
    explicit QNetwork(std::vector<DenseLayer> layers);

    /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static QNetwork glorot(const std::vector<std::size_t>& widths, Rng& rng);

    /// Widths for the agent: n_states, hidden_nodes x hidden_layers, n_action.
    static std::vector<std::size_t> widths_for(const RunConfig& cfg);

    Vector forward(std::span<const double> state) const;

    std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().cols; }
    std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().rows; }
    std::vector<std::size_t> widths() const;

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    bool all_finite() const;
    bool operator==(const QNetwork&) const = default;

  private:
    std::vector<DenseLayer> layers_;
};

using StateVector = Vector;

struct Transition {
    StateVector s;
    OperatorId a = OperatorId::EO;
    double r = 0.0;
    StateVector s_next;
    bool terminal = false;
};

/// Fixed-capacity ring of transitions; the oldest entry is evicted first.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    /// Uniform sample with replacement. Throws InvalidArgument when size() < k.
    std::vector<Transition> sample(std::size_t k, Rng& rng) const;

    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    /// i-th stored transition, oldest first.
    const Transition& at(std::size_t i) const;

  private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> items_;
};

/// Greedy with probability 1 - epsilon (ties to the lowest index), else uniform.
OperatorId select_action(std::span<const double> q_values, double epsilon, Rng& rng);

std::size_t argmax(std::span<const double> values);

/// Exploration rate for a game index: cubic decay from eps_initial to eps_final.
double epsilon_schedule(int game_index, const RunConfig& cfg);

/// Double-DQN target: r + gamma * Q_target(s', argmax_a Q_main(s', a)), or r when terminal.
double ddqn_target(const Transition& t, const QNetwork& main, const QNetwork& target, double gamma);

/// Mean over the batch of (Q_main(s, a) - y)^2 with targets held fixed.
double batch_loss(const QNetwork& net, const std::vector<Transition>& batch, std::span<const double> targets);

/// Gradient of batch_loss with respect to every weight and bias, laid out like the network.
std::vector<DenseLayer> batch_loss_gradient(const QNetwork& net, const std::vector<Transition>& batch,
                                            std::span<const double> targets);

/// One SGD step on `main` over a given batch. Returns the loss before the step.
double train_on_batch(QNetwork& main, const QNetwork& target, const std::vector<Transition>& batch, double gamma,
                      double learning_rate);

/// Samples a batch and applies train_on_batch. Throws InvalidArgument on an underfull buffer.
double train_step(QNetwork& main, const QNetwork& target, const ReplayBuffer& buffer, std::size_t batch_size,
                  double gamma, double learning_rate, Rng& rng);

/// Copies main into target once the counter reaches target_sync, then resets the counter.
/// Returns true when a copy happened.
bool sync_target(const QNetwork& main, QNetwork& target, int& step_counter, int target_sync);

/// Main/target networks, replay memory and update bookkeeping for one learner.
class DdqnAgent {
  public:
    DdqnAgent(const RunConfig& cfg, Rng& init_rng);

    Vector q_values(std::span<const double> state) const { return main_.forward(state); }
    OperatorId act(std::span<const double> state, double epsilon, Rng& rng) const;

    /// Stores a transition and, once warm, runs one update and the sync check.
    /// Returns the loss of the update or a negative value when no update ran.
    double observe(Transition t, Rng& rng);

    const QNetwork& main() const { return main_; }
    const QNetwork& target() const { return target_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    long long updates() const { return updates_; }

  private:
    RunConfig cfg_;
    QNetwork main_;
    QNetwork target_;
    ReplayBuffer buffer_;
    int sync_counter_ = 0;
    long long updates_ = 0;
};

// --- checkpoint format -------------------------------------------------------
//
// "R2RLQNET" magic, u32 version, u32 layer count, then per layer u32 rows,
// u32 cols, rows*cols f64 weights (row-major), rows f64 biases; finally a u32
// byte length and that many bytes of UTF-8 JSON metadata. Little-endian.

inline constexpr std::string_view kCheckpointMagic = "R2RLQNET";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint64_t seed = 0;
    long long game_index = 0;
    long long games_played = 0;
    double cumulative_reward = 0.0;
    std::string config_hash;
    std::string problem;

    bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
    QNetwork network;
    CheckpointMeta meta;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws IoError naming the byte offset of the first malformed field.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace r2rl
