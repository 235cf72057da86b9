#pragma once

// Sequence classifier trained from scratch: stacked LSTM layers with a
// dense layer and 10-way softmax head, masked weighted cross-entropy,
// exact backpropagation through time, Adam with decoupled weight decay,
// reduce-on-plateau scheduling, gradient accumulation and early stopping.
// Everything runs in 64-bit floats and is bit-reproducible under a seed.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "linkcast/features.hpp"

namespace linkcast::nn {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AllMasked : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySplit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NormalizationMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptCheckpoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major matrix.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const {
        return a[static_cast<size_t>(r) * cols + c];
    }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }
    bool operator==(const Mat&) const = default;
};

// C (+)= A * B. Each output element is accumulated serially by one thread,
// so results do not depend on the thread count.
void gemm(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
// C (+)= A^T * B
void gemm_tn(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);
// C (+)= A * B^T
void gemm_nt(const Mat& A, const Mat& B, Mat& C, bool accumulate = false);

struct LstmConfig {
    int input_dim = kFeatureDim;
    int hidden = 128;
    int layers = 4;
    int dense = 128;
    int classes = kNumClasses;

    bool operator==(const LstmConfig&) const = default;
};

// Gate rows in W/U/b are stacked input, forget, cell, output.
struct LayerParams {
    Mat W;                  // 4H x in
    Mat U;                  // 4H x H
    std::vector<double> b;  // 4H
    bool operator==(const LayerParams&) const = default;
};

// Shared shape for parameters, gradients and Adam moments.
struct ParamBlock {
    std::vector<LayerParams> layers;
    Mat dense_w;                  // dense x H
    std::vector<double> dense_b;  // dense
    Mat head_w;                   // classes x dense
    std::vector<double> head_b;   // classes

    static ParamBlock zeros(const LstmConfig& cfg);
    // Flat views over every tensor, in a fixed order.
    std::vector<std::span<double>> tensors();
    std::vector<std::span<const double>> tensors() const;
    bool operator==(const ParamBlock&) const = default;
};

struct LstmParams {
    LstmConfig cfg;
    ParamBlock block;

    // Uniform +-1/sqrt(fan_in) weights, zero biases.
    static LstmParams init(const LstmConfig& cfg, std::uint64_t seed);
    bool operator==(const LstmParams&) const = default;
};

// Padded mini-batch. inputs[t] is (input_dim x B), labels[t] (classes x B);
// mask[t][b] = 1 iff t < lengths[b]; padded positions hold zeros.
struct Batch {
    int batch = 0;
    int t_max = 0;
    int input_dim = 0;
    int classes = kNumClasses;
    std::vector<Mat> inputs;
    std::vector<Mat> labels;
    std::vector<std::vector<char>> mask;
    std::vector<int> lengths;

    static Batch from_sequences(std::span<const FlightSequence* const> seqs);
};

enum class Mode { Train, Eval };

// Activations cached by forward for the exact backward pass.
struct ForwardCache {
    // [layer][t]
    std::vector<std::vector<Mat>> gates;  // activated i,f,g,o stacked (4H x B)
    std::vector<std::vector<Mat>> cells;  // c_t (H x B)
    std::vector<std::vector<Mat>> hidden; // h_t (H x B)
    std::vector<Mat> dropout_mask;        // [t] (H x B), scale or 0
    std::vector<Mat> dropped;             // [t] top hidden after dropout
    std::vector<Mat> dense_out;           // [t] (dense x B) after tanh
    std::vector<Mat> probs;               // [t] (classes x B)
};

// Per-timestep class probabilities, (classes x B) per t. Dropout (inverted,
// over the top LSTM output) is applied in Train mode only and consumes rng.
std::vector<Mat> forward(const LstmParams& params, const Batch& batch,
                         Mode mode, double dropout_rate = 0.0,
                         std::mt19937_64* rng = nullptr,
                         ForwardCache* cache = nullptr);

// w_c = N_total / (classes * n_c) over all timesteps; absent classes get
// the largest weight among present ones.
std::array<double, kNumClasses> class_weights(
    const std::vector<FlightSequence>& train);

// Masked, class-weighted mean cross-entropy:
//   sum mask * w_y * (-log p_y) / sum mask * w_y.
double masked_weighted_ce(const std::vector<Mat>& probs, const Batch& batch,
                          const std::array<double, kNumClasses>& weights);

struct Gradients {
    ParamBlock block;
    std::vector<Mat> input_grads;  // [t] (input_dim x B)
    void add(const Gradients& other);
};

// Exact gradients of masked_weighted_ce via BPTT; requires the cache from a
// Train/Eval forward pass over the same batch.
Gradients backward(const LstmParams& params, const Batch& batch,
                   const ForwardCache& cache,
                   const std::array<double, kNumClasses>& weights);

struct TrainConfig {
    double lr = 0.001;
    double weight_decay = 0.0001;
    int batch_size = 128;
    int accumulation_steps = 4;
    int plateau_patience = 5;
    double plateau_factor = 0.9;
    int early_stop_patience = 15;
    double dropout_rate = 0.2;
    int max_epochs = 100;
    std::uint64_t seed = 1;
    bool weighted_loss = true;
    double min_improvement = 1e-6;

    bool operator==(const TrainConfig&) const = default;
};

struct AdamState {
    ParamBlock m, v;
    long long t = 0;

    static AdamState zeros(const LstmConfig& cfg);
};

// Decoupled weight decay:
//   theta -= lr * (m_hat / (sqrt(v_hat) + 1e-8) + weight_decay * theta)
void adam_step(LstmParams& params, const Gradients& grads, AdamState& state,
               double lr, double weight_decay);

struct EpochLog {
    int epoch;
    double train_loss;
    double val_loss;
    double lr;
};

struct TrainResult {
    LstmParams best;
    std::array<double, kNumClasses> weights;
    std::vector<EpochLog> log;
    double best_val = 0.0;
    int best_epoch = 0;
};

TrainResult train(const LstmConfig& cfg, const TrainConfig& train_cfg,
                  const std::vector<FlightSequence>& train_split,
                  const std::vector<FlightSequence>& val_split);

void write_train_log(const std::vector<EpochLog>& log, const std::string& path);

struct Checkpoint {
    LstmParams params;
    TrainConfig train_cfg;
    std::array<double, kNumClasses> class_weights{};
    NormalizationStats norm;
    VocabSet vocab;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct Prediction {
    // per flight, per timestep
    std::vector<std::vector<std::array<double, kNumClasses>>> probs;
    std::vector<std::vector<int>> scores;  // argmax + 1
};

// Eval-mode batched inference. Sequences must already be normalized with
// the checkpoint's stats.
Prediction predict(const Checkpoint& ckpt,
                   const std::vector<FlightSequence>& sequences,
                   int batch_size = 128);

}  // namespace linkcast::nn
