#include "linkcast/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "json.hpp"

using nlohmann::json;

namespace linkcast::nn {

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kProbFloor = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

namespace {

// row-major kernel C[i][j] (+)= sum_p A[i][p] * B[p][j]; the j loop is
// contiguous and independent, which keeps it vectorizable without any
// floating-point reassociation
void matmul_kernel(const double* A, const double* B, double* C, int m, int k,
                   int n) {
#pragma omp parallel for schedule(static) if (m * n > 2048)
    for (int i = 0; i < m; ++i) {
        double* __restrict ci = C + static_cast<size_t>(i) * n;
        const double* __restrict ai = A + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* __restrict bp = B + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

std::vector<double> transposed(const Mat& m) {
    std::vector<double> t(m.a.size());
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            t[static_cast<size_t>(c) * m.rows + r] = m(r, c);
    return t;
}

}  // namespace

void gemm(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
    if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols)
        throw ShapeMismatch("gemm: incompatible shapes");
    if (!accumulate) C.zero();
    matmul_kernel(A.a.data(), B.a.data(), C.a.data(), A.rows, A.cols, B.cols);
}

void gemm_tn(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
    if (A.rows != B.rows || C.rows != A.cols || C.cols != B.cols)
        throw ShapeMismatch("gemm_tn: incompatible shapes");
    if (!accumulate) C.zero();
    const std::vector<double> at = transposed(A);
    matmul_kernel(at.data(), B.a.data(), C.a.data(), A.cols, A.rows, B.cols);
}

void gemm_nt(const Mat& A, const Mat& B, Mat& C, bool accumulate) {
    if (A.cols != B.cols || C.rows != A.rows || C.cols != B.rows)
        throw ShapeMismatch("gemm_nt: incompatible shapes");
    if (!accumulate) C.zero();
    const std::vector<double> bt = transposed(B);
    matmul_kernel(A.a.data(), bt.data(), C.a.data(), A.rows, A.cols, B.rows);
}

ParamBlock ParamBlock::zeros(const LstmConfig& cfg) {
    ParamBlock b;
    b.layers.resize(cfg.layers);
    for (int l = 0; l < cfg.layers; ++l) {
        const int in = l == 0 ? cfg.input_dim : cfg.hidden;
        b.layers[l].W = Mat(4 * cfg.hidden, in);
        b.layers[l].U = Mat(4 * cfg.hidden, cfg.hidden);
        b.layers[l].b.assign(static_cast<size_t>(4) * cfg.hidden, 0.0);
    }
    b.dense_w = Mat(cfg.dense, cfg.hidden);
    b.dense_b.assign(cfg.dense, 0.0);
    b.head_w = Mat(cfg.classes, cfg.dense);
    b.head_b.assign(cfg.classes, 0.0);
    return b;
}

std::vector<std::span<double>> ParamBlock::tensors() {
    std::vector<std::span<double>> out;
    for (auto& l : layers) {
        out.emplace_back(l.W.a);
        out.emplace_back(l.U.a);
        out.emplace_back(l.b);
    }
    out.emplace_back(dense_w.a);
    out.emplace_back(dense_b);
    out.emplace_back(head_w.a);
    out.emplace_back(head_b);
    return out;
}

std::vector<std::span<const double>> ParamBlock::tensors() const {
    std::vector<std::span<const double>> out;
    for (const auto& l : layers) {
        out.emplace_back(l.W.a);
        out.emplace_back(l.U.a);
        out.emplace_back(l.b);
    }
    out.emplace_back(dense_w.a);
    out.emplace_back(dense_b);
    out.emplace_back(head_w.a);
    out.emplace_back(head_b);
    return out;
}

LstmParams LstmParams::init(const LstmConfig& cfg, std::uint64_t seed) {
    LstmParams p;
    p.cfg = cfg;
    p.block = ParamBlock::zeros(cfg);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](Mat& m, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : m.a) v = dist(rng);
    };
    for (int l = 0; l < cfg.layers; ++l) {
        const int in = l == 0 ? cfg.input_dim : cfg.hidden;
        fill(p.block.layers[l].W, in);
        fill(p.block.layers[l].U, cfg.hidden);
    }
    fill(p.block.dense_w, cfg.hidden);
    fill(p.block.head_w, cfg.dense);
    return p;
}

Batch Batch::from_sequences(std::span<const FlightSequence* const> seqs) {
    Batch b;
    b.batch = static_cast<int>(seqs.size());
    b.input_dim = kFeatureDim;
    b.classes = kNumClasses;
    for (const auto* s : seqs)
        b.t_max = std::max(b.t_max, static_cast<int>(s->length()));
    b.lengths.resize(b.batch);
    b.inputs.assign(b.t_max, Mat(b.input_dim, b.batch));
    b.labels.assign(b.t_max, Mat(b.classes, b.batch));
    b.mask.assign(b.t_max, std::vector<char>(b.batch, 0));
    for (int j = 0; j < b.batch; ++j) {
        const FlightSequence& s = *seqs[j];
        b.lengths[j] = static_cast<int>(s.length());
        for (int t = 0; t < b.lengths[j]; ++t) {
            for (int f = 0; f < b.input_dim; ++f)
                b.inputs[t](f, j) = s.inputs[t][f];
            b.labels[t](s.scores[t] - 1, j) = 1.0;
            b.mask[t][j] = 1;
        }
    }
    return b;
}

namespace {

// One LSTM layer over the whole padded sequence. Writes h_t per t into
// `hidden_out` and optionally fills the cache.
void run_layer(const LayerParams& lp, const std::vector<Mat>* layer_in,
               const std::vector<Mat>& batch_in, int layer, int T, int B,
               int H, std::vector<Mat>& hidden_out, ForwardCache* cache) {
    Mat h_prev(H, B), c_prev(H, B);
    Mat gates(4 * H, B);
    for (int t = 0; t < T; ++t) {
        const Mat& x = layer_in ? (*layer_in)[t] : batch_in[t];
        // gates = b (broadcast) + W x + U h_prev
        for (int r = 0; r < 4 * H; ++r) {
            double* row = &gates.a[static_cast<size_t>(r) * B];
            std::fill(row, row + B, lp.b[r]);
        }
        gemm(lp.W, x, gates, true);
        gemm(lp.U, h_prev, gates, true);

        Mat c(H, B), h(H, B);
#pragma omp parallel for schedule(static) if (H * B > 4096)
        for (int r = 0; r < H; ++r) {
            double* __restrict gi = &gates.a[static_cast<size_t>(r) * B];
            double* __restrict gf = &gates.a[static_cast<size_t>(H + r) * B];
            double* __restrict gg =
                &gates.a[static_cast<size_t>(2 * H + r) * B];
            double* __restrict go =
                &gates.a[static_cast<size_t>(3 * H + r) * B];
            const double* __restrict cp =
                &c_prev.a[static_cast<size_t>(r) * B];
            double* __restrict cr = &c.a[static_cast<size_t>(r) * B];
            double* __restrict hr = &h.a[static_cast<size_t>(r) * B];
            for (int j = 0; j < B; ++j) {
                const double i_g = sigmoid(gi[j]);
                const double f_g = sigmoid(gf[j]);
                const double g_g = std::tanh(gg[j]);
                const double o_g = sigmoid(go[j]);
                gi[j] = i_g;
                gf[j] = f_g;
                gg[j] = g_g;
                go[j] = o_g;
                const double c_t = f_g * cp[j] + i_g * g_g;
                cr[j] = c_t;
                hr[j] = o_g * std::tanh(c_t);
            }
        }
        if (cache) {
            cache->gates[layer][t] = gates;
            cache->cells[layer][t] = c;
            cache->hidden[layer][t] = h;
        }
        hidden_out[t] = h;
        h_prev = std::move(h);
        c_prev = std::move(c);
    }
}

void softmax_columns(Mat& m) {
    for (int j = 0; j < m.cols; ++j) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < m.rows; ++r) mx = std::max(mx, m(r, j));
        double sum = 0.0;
        for (int r = 0; r < m.rows; ++r) {
            const double e = std::exp(m(r, j) - mx);
            m(r, j) = e;
            sum += e;
        }
        for (int r = 0; r < m.rows; ++r) m(r, j) /= sum;
    }
}

}  // namespace

std::vector<Mat> forward(const LstmParams& params, const Batch& batch,
                         Mode mode, double dropout_rate, std::mt19937_64* rng,
                         ForwardCache* cache) {
    const LstmConfig& cfg = params.cfg;
    if (batch.input_dim != cfg.input_dim)
        throw ShapeMismatch("forward: batch input width " +
                            std::to_string(batch.input_dim) + " != " +
                            std::to_string(cfg.input_dim));
    if (mode == Mode::Train && dropout_rate > 0.0 && rng == nullptr)
        throw std::invalid_argument("forward: train-mode dropout needs an rng");

    const int T = batch.t_max, B = batch.batch, H = cfg.hidden;
    const int L = cfg.layers;

    if (cache) {
        cache->gates.assign(L, std::vector<Mat>(T));
        cache->cells.assign(L, std::vector<Mat>(T));
        cache->hidden.assign(L, std::vector<Mat>(T));
        cache->dropout_mask.clear();
        cache->dropped.assign(T, Mat());
        cache->dense_out.assign(T, Mat());
        cache->probs.assign(T, Mat());
    }

    const bool use_dropout = mode == Mode::Train && dropout_rate > 0.0;
    std::vector<Mat> drop_mask;
    if (use_dropout) {
        // drawn serially up front so threading cannot perturb the stream
        const double scale = 1.0 / (1.0 - dropout_rate);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        drop_mask.assign(T, Mat(H, B));
        for (int t = 0; t < T; ++t)
            for (auto& v : drop_mask[t].a)
                v = uni(*rng) < dropout_rate ? 0.0 : scale;
        if (cache) cache->dropout_mask = drop_mask;
    }

    std::vector<Mat> prev(T), cur(T);
    for (int l = 0; l < L; ++l) {
        run_layer(params.block.layers[l], l == 0 ? nullptr : &prev,
                  batch.inputs, l, T, B, H, cur, cache);
        std::swap(prev, cur);
    }
    // prev now holds the top layer's hidden states

    std::vector<Mat> probs(T);
    for (int t = 0; t < T; ++t) {
        Mat top = prev[t];
        if (use_dropout)
            for (size_t i = 0; i < top.a.size(); ++i)
                top.a[i] *= drop_mask[t].a[i];
        if (cache) cache->dropped[t] = top;

        Mat pre(cfg.dense, B);
        for (int r = 0; r < cfg.dense; ++r) {
            double* row = &pre.a[static_cast<size_t>(r) * B];
            std::fill(row, row + B, params.block.dense_b[r]);
        }
        gemm(params.block.dense_w, top, pre, true);
        Mat act = pre;
        for (auto& v : act.a) v = std::tanh(v);
        if (cache) cache->dense_out[t] = act;

        Mat logits(cfg.classes, B);
        for (int r = 0; r < cfg.classes; ++r) {
            double* row = &logits.a[static_cast<size_t>(r) * B];
            std::fill(row, row + B, params.block.head_b[r]);
        }
        gemm(params.block.head_w, act, logits, true);
        softmax_columns(logits);
        if (cache) cache->probs[t] = logits;
        probs[t] = std::move(logits);
    }
    return probs;
}

std::array<double, kNumClasses> class_weights(
    const std::vector<FlightSequence>& train) {
    std::array<long long, kNumClasses> counts{};
    long long total = 0;
    for (const auto& s : train)
        for (int score : s.scores) {
            ++counts[static_cast<size_t>(score - 1)];
            ++total;
        }
    std::array<double, kNumClasses> w{};
    double max_present = 0.0;
    for (int c = 0; c < kNumClasses; ++c)
        if (counts[c] > 0) {
            w[c] = static_cast<double>(total) /
                   (static_cast<double>(kNumClasses) *
                    static_cast<double>(counts[c]));
            max_present = std::max(max_present, w[c]);
        }
    if (max_present == 0.0) max_present = 1.0;
    for (int c = 0; c < kNumClasses; ++c)
        if (counts[c] == 0) w[c] = max_present;
    return w;
}

namespace {

struct LossParts {
    double num = 0.0;
    double den = 0.0;
};

LossParts loss_parts(const std::vector<Mat>& probs, const Batch& batch,
                     const std::array<double, kNumClasses>& weights) {
    LossParts parts;
    for (int t = 0; t < batch.t_max; ++t) {
        for (int j = 0; j < batch.batch; ++j) {
            if (!batch.mask[t][j]) continue;
            for (int c = 0; c < batch.classes; ++c) {
                if (batch.labels[t](c, j) != 1.0) continue;
                const double p = std::max(probs[t](c, j), kProbFloor);
                parts.num += weights[c] * -std::log(p);
                parts.den += weights[c];
                break;
            }
        }
    }
    return parts;
}

}  // namespace

double masked_weighted_ce(const std::vector<Mat>& probs, const Batch& batch,
                          const std::array<double, kNumClasses>& weights) {
    if (static_cast<int>(probs.size()) != batch.t_max)
        throw ShapeMismatch("masked_weighted_ce: probs length != t_max");
    const LossParts parts = loss_parts(probs, batch, weights);
    if (parts.den == 0.0)
        throw AllMasked("masked_weighted_ce: all positions masked");
    return parts.num / parts.den;
}

void Gradients::add(const Gradients& other) {
    auto mine = block.tensors();
    auto theirs = other.block.tensors();
    for (size_t i = 0; i < mine.size(); ++i)
        for (size_t k = 0; k < mine[i].size(); ++k)
            mine[i][k] += theirs[i][k];
}

Gradients backward(const LstmParams& params, const Batch& batch,
                   const ForwardCache& cache,
                   const std::array<double, kNumClasses>& weights) {
    const LstmConfig& cfg = params.cfg;
    const int T = batch.t_max, B = batch.batch, H = cfg.hidden;
    const int L = cfg.layers;

    Gradients g;
    g.block = ParamBlock::zeros(cfg);
    g.input_grads.assign(T, Mat(cfg.input_dim, B));

    double den = 0.0;
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < B; ++j)
            if (batch.mask[t][j])
                for (int c = 0; c < cfg.classes; ++c)
                    if (batch.labels[t](c, j) == 1.0) {
                        den += weights[c];
                        break;
                    }
    if (den == 0.0) return g;  // fully padded batch: exact zero gradients

    const bool has_dropout = !cache.dropout_mask.empty();

    // head and dense backward; produces dH for the top LSTM layer per t
    std::vector<Mat> d_top(T, Mat(H, B));
    for (int t = 0; t < T; ++t) {
        Mat dlogits(cfg.classes, B);
        for (int j = 0; j < B; ++j) {
            if (!batch.mask[t][j]) continue;  // padded columns stay zero
            double wy = 0.0;
            for (int c = 0; c < cfg.classes; ++c)
                if (batch.labels[t](c, j) == 1.0) {
                    wy = weights[c];
                    break;
                }
            const double scale = wy / den;
            for (int c = 0; c < cfg.classes; ++c)
                dlogits(c, j) =
                    scale * (cache.probs[t](c, j) - batch.labels[t](c, j));
        }
        gemm_nt(dlogits, cache.dense_out[t], g.block.head_w, true);
        for (int r = 0; r < cfg.classes; ++r)
            for (int j = 0; j < B; ++j) g.block.head_b[r] += dlogits(r, j);

        Mat d_act(cfg.dense, B);
        gemm_tn(params.block.head_w, dlogits, d_act);
        for (int r = 0; r < cfg.dense; ++r)
            for (int j = 0; j < B; ++j) {
                const double a = cache.dense_out[t](r, j);
                d_act(r, j) *= 1.0 - a * a;
            }

        gemm_nt(d_act, cache.dropped[t], g.block.dense_w, true);
        for (int r = 0; r < cfg.dense; ++r)
            for (int j = 0; j < B; ++j) g.block.dense_b[r] += d_act(r, j);

        Mat d_drop(H, B);
        gemm_tn(params.block.dense_w, d_act, d_drop);
        if (has_dropout)
            for (size_t i = 0; i < d_drop.a.size(); ++i)
                d_drop.a[i] *= cache.dropout_mask[t].a[i];
        d_top[t] = std::move(d_drop);
    }

    // BPTT, top layer down
    std::vector<Mat> d_in = std::move(d_top);  // dH arriving at current layer
    for (int l = L - 1; l >= 0; --l) {
        const LayerParams& lp = params.block.layers[l];
        LayerParams& lg = g.block.layers[l];
        std::vector<Mat> d_below(
            T, Mat(l == 0 ? cfg.input_dim : H, B));  // dX per t

        Mat dh_rec(H, B), dc_next(H, B);
        Mat dgates(4 * H, B);
        // W^T and U^T are reused at every timestep
        Mat wt(lp.W.cols, lp.W.rows), ut(lp.U.cols, lp.U.rows);
        wt.a = transposed(lp.W);
        ut.a = transposed(lp.U);
        for (int t = T - 1; t >= 0; --t) {
            const Mat& gates = cache.gates[l][t];
            const Mat& c_t = cache.cells[l][t];
            const Mat* c_prev = t > 0 ? &cache.cells[l][t - 1] : nullptr;

#pragma omp parallel for schedule(static) if (H * B > 4096)
            for (int r = 0; r < H; ++r) {
                const double* __restrict gi = &gates.a[static_cast<size_t>(r) * B];
                const double* __restrict gf =
                    &gates.a[static_cast<size_t>(H + r) * B];
                const double* __restrict gg =
                    &gates.a[static_cast<size_t>(2 * H + r) * B];
                const double* __restrict go =
                    &gates.a[static_cast<size_t>(3 * H + r) * B];
                const double* __restrict ct = &c_t.a[static_cast<size_t>(r) * B];
                const double* cp =
                    c_prev ? &c_prev->a[static_cast<size_t>(r) * B] : nullptr;
                const double* __restrict din =
                    &d_in[t].a[static_cast<size_t>(r) * B];
                double* __restrict dhr = &dh_rec.a[static_cast<size_t>(r) * B];
                double* __restrict dcn = &dc_next.a[static_cast<size_t>(r) * B];
                double* __restrict dgi = &dgates.a[static_cast<size_t>(r) * B];
                double* __restrict dgf =
                    &dgates.a[static_cast<size_t>(H + r) * B];
                double* __restrict dgg =
                    &dgates.a[static_cast<size_t>(2 * H + r) * B];
                double* __restrict dgo =
                    &dgates.a[static_cast<size_t>(3 * H + r) * B];
                for (int j = 0; j < B; ++j) {
                    const double dh = din[j] + dhr[j];
                    const double i_g = gi[j];
                    const double f_g = gf[j];
                    const double g_g = gg[j];
                    const double o_g = go[j];
                    const double tc = std::tanh(ct[j]);
                    const double dc = dh * o_g * (1.0 - tc * tc) + dcn[j];
                    const double df = cp ? dc * cp[j] : 0.0;
                    dgi[j] = dc * g_g * i_g * (1.0 - i_g);
                    dgf[j] = df * f_g * (1.0 - f_g);
                    dgg[j] = dc * i_g * (1.0 - g_g * g_g);
                    dgo[j] = dh * tc * o_g * (1.0 - o_g);
                    dcn[j] = dc * f_g;
                }
            }

            const Mat& x_t = l == 0 ? batch.inputs[t] : cache.hidden[l - 1][t];
            gemm_nt(dgates, x_t, lg.W, true);
            if (t > 0) gemm_nt(dgates, cache.hidden[l][t - 1], lg.U, true);
            for (int r = 0; r < 4 * H; ++r) {
                const double* __restrict dg = &dgates.a[static_cast<size_t>(r) * B];
                double acc = 0.0;
                for (int j = 0; j < B; ++j) acc += dg[j];
                lg.b[r] += acc;
            }

            gemm(wt, dgates, d_below[t]);
            gemm(ut, dgates, dh_rec);
        }
        if (l == 0)
            g.input_grads = std::move(d_below);
        else
            d_in = std::move(d_below);
    }
    return g;
}

AdamState AdamState::zeros(const LstmConfig& cfg) {
    AdamState s;
    s.m = ParamBlock::zeros(cfg);
    s.v = ParamBlock::zeros(cfg);
    return s;
}

void adam_step(LstmParams& params, const Gradients& grads, AdamState& state,
               double lr, double weight_decay) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
    auto theta = params.block.tensors();
    auto grad = grads.block.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (size_t i = 0; i < theta.size(); ++i) {
        for (size_t k = 0; k < theta[i].size(); ++k) {
            const double gk = grad[i][k];
            m[i][k] = kBeta1 * m[i][k] + (1.0 - kBeta1) * gk;
            v[i][k] = kBeta2 * v[i][k] + (1.0 - kBeta2) * gk * gk;
            const double m_hat = m[i][k] / bc1;
            const double v_hat = v[i][k] / bc2;
            theta[i][k] -= lr * (m_hat / (std::sqrt(v_hat) + kAdamEps) +
                                 weight_decay * theta[i][k]);
        }
    }
}

namespace {

LossParts dataset_loss_parts(const LstmParams& params,
                             const std::vector<FlightSequence>& seqs,
                             const std::array<double, kNumClasses>& weights,
                             int batch_size) {
    // length-sorted batches; the summation order is fixed, so repeated
    // evaluations are bit-identical
    std::vector<const FlightSequence*> order;
    order.reserve(seqs.size());
    for (const auto& s : seqs) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(),
                     [](const FlightSequence* a, const FlightSequence* b) {
                         return a->length() > b->length();
                     });
    LossParts total;
    std::vector<const FlightSequence*> chunk;
    for (size_t i = 0; i < order.size(); i += batch_size) {
        chunk.clear();
        for (size_t j = i; j < std::min(order.size(), i + batch_size); ++j)
            chunk.push_back(order[j]);
        const Batch batch = Batch::from_sequences(chunk);
        const auto probs = forward(params, batch, Mode::Eval);
        const LossParts parts = loss_parts(probs, batch, weights);
        total.num += parts.num;
        total.den += parts.den;
    }
    return total;
}

}  // namespace

TrainResult train(const LstmConfig& cfg, const TrainConfig& train_cfg,
                  const std::vector<FlightSequence>& train_split,
                  const std::vector<FlightSequence>& val_split) {
    if (train_split.empty() || val_split.empty())
        throw EmptySplit("train: empty train or validation split");

    TrainResult result;
    result.weights.fill(1.0);
    if (train_cfg.weighted_loss) result.weights = class_weights(train_split);

    LstmParams params = LstmParams::init(cfg, train_cfg.seed);
    AdamState state = AdamState::zeros(cfg);
    std::mt19937_64 shuffle_rng(train_cfg.seed ^ 0x5851f42d4c957f2dULL);
    std::mt19937_64 dropout_rng(train_cfg.seed ^ 0x14057b7ef767814fULL);

    double lr = train_cfg.lr;
    double best_val = std::numeric_limits<double>::infinity();
    int plateau_count = 0, stall_count = 0;

    std::vector<size_t> order(train_split.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
        for (size_t i = order.size() - 1; i > 0; --i) {
            std::uniform_int_distribution<size_t> dist(0, i);
            std::swap(order[i], order[dist(shuffle_rng)]);
        }

        LossParts epoch_parts;
        std::vector<const FlightSequence*> chunk;
        size_t pos = 0;
        while (pos < order.size()) {
            // one optimizer step: gradients summed over up to
            // accumulation_steps mini-batches
            Gradients accum;
            bool have_grads = false;
            for (int a = 0; a < train_cfg.accumulation_steps && pos < order.size();
                 ++a) {
                chunk.clear();
                const size_t end = std::min(
                    order.size(), pos + static_cast<size_t>(train_cfg.batch_size));
                for (size_t j = pos; j < end; ++j)
                    chunk.push_back(&train_split[order[j]]);
                pos = end;

                const Batch batch = Batch::from_sequences(chunk);
                ForwardCache cache;
                const auto probs =
                    forward(params, batch, Mode::Train, train_cfg.dropout_rate,
                            &dropout_rng, &cache);
                const LossParts parts = loss_parts(probs, batch, result.weights);
                epoch_parts.num += parts.num;
                epoch_parts.den += parts.den;
                Gradients grads = backward(params, batch, cache, result.weights);
                if (!have_grads) {
                    accum = std::move(grads);
                    have_grads = true;
                } else {
                    accum.add(grads);
                }
            }
            if (have_grads)
                adam_step(params, accum, state, lr, train_cfg.weight_decay);
        }

        const LossParts val_parts = dataset_loss_parts(
            params, val_split, result.weights, train_cfg.batch_size);
        const double train_loss =
            epoch_parts.den > 0.0 ? epoch_parts.num / epoch_parts.den : 0.0;
        const double val_loss =
            val_parts.den > 0.0 ? val_parts.num / val_parts.den : 0.0;
        result.log.push_back({epoch, train_loss, val_loss, lr});

        if (val_loss < best_val - train_cfg.min_improvement) {
            best_val = val_loss;
            result.best = params;
            result.best_val = val_loss;
            result.best_epoch = epoch;
            plateau_count = 0;
            stall_count = 0;
        } else {
            ++plateau_count;
            ++stall_count;
            if (plateau_count >= train_cfg.plateau_patience) {
                lr *= train_cfg.plateau_factor;
                plateau_count = 0;
            }
            if (stall_count >= train_cfg.early_stop_patience) break;
        }
    }
    if (result.log.empty())
        throw EmptySplit("train: no epochs executed");
    if (!std::isfinite(best_val)) {
        result.best = params;
        result.best_val = result.log.back().val_loss;
        result.best_epoch = result.log.back().epoch;
    }
    return result;
}

void write_train_log(const std::vector<EpochLog>& log,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "epoch,train_loss,val_loss,lr\n";
    out.precision(17);
    for (const auto& e : log)
        out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ','
            << e.lr << '\n';
}

namespace {

json mat_to_json(const Mat& m) {
    return json{{"shape", {m.rows, m.cols}}, {"data", m.a}};
}

Mat mat_from_json(const json& j) {
    Mat m(j.at("shape").at(0).get<int>(), j.at("shape").at(1).get<int>());
    const auto& data = j.at("data");
    if (static_cast<int>(data.size()) != m.rows * m.cols)
        throw CorruptCheckpoint("weight tensor size mismatch");
    for (size_t i = 0; i < m.a.size(); ++i) m.a[i] = data[i].get<double>();
    return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json root;
    root["version"] = "1";
    root["config"] = {{"input_dim", ckpt.params.cfg.input_dim},
                      {"hidden", ckpt.params.cfg.hidden},
                      {"layers", ckpt.params.cfg.layers},
                      {"dense", ckpt.params.cfg.dense},
                      {"classes", ckpt.params.cfg.classes}};
    root["train_config"] = {{"lr", ckpt.train_cfg.lr},
                            {"weight_decay", ckpt.train_cfg.weight_decay},
                            {"batch_size", ckpt.train_cfg.batch_size},
                            {"accumulation_steps", ckpt.train_cfg.accumulation_steps},
                            {"plateau_patience", ckpt.train_cfg.plateau_patience},
                            {"plateau_factor", ckpt.train_cfg.plateau_factor},
                            {"early_stop_patience", ckpt.train_cfg.early_stop_patience},
                            {"dropout_rate", ckpt.train_cfg.dropout_rate},
                            {"max_epochs", ckpt.train_cfg.max_epochs},
                            {"seed", ckpt.train_cfg.seed},
                            {"weighted_loss", ckpt.train_cfg.weighted_loss},
                            {"min_improvement", ckpt.train_cfg.min_improvement}};
    json layers = json::array();
    for (const auto& l : ckpt.params.block.layers)
        layers.push_back({{"W", mat_to_json(l.W)},
                          {"U", mat_to_json(l.U)},
                          {"b", l.b}});
    root["weights"] = {{"layers", layers},
                       {"dense_w", mat_to_json(ckpt.params.block.dense_w)},
                       {"dense_b", ckpt.params.block.dense_b},
                       {"head_w", mat_to_json(ckpt.params.block.head_w)},
                       {"head_b", ckpt.params.block.head_b}};
    root["class_weights"] = ckpt.class_weights;
    root["normalization"] = {{"min", ckpt.norm.min}, {"max", ckpt.norm.max}};
    root["vocab"] = {{"tail", ckpt.vocab.tail.ordered},
                     {"airport", ckpt.vocab.airport.ordered},
                     {"satellite", ckpt.vocab.satellite.ordered},
                     {"beam", ckpt.vocab.beam.ordered}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorruptCheckpoint("cannot open checkpoint: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw CorruptCheckpoint(std::string("checkpoint parse error: ") +
                                e.what());
    }
    try {
        if (root.at("version").get<std::string>() != "1")
            throw VersionMismatch("unsupported checkpoint version: " +
                                  root.at("version").get<std::string>());
        Checkpoint ckpt;
        const json& c = root.at("config");
        ckpt.params.cfg.input_dim = c.at("input_dim").get<int>();
        ckpt.params.cfg.hidden = c.at("hidden").get<int>();
        ckpt.params.cfg.layers = c.at("layers").get<int>();
        ckpt.params.cfg.dense = c.at("dense").get<int>();
        ckpt.params.cfg.classes = c.at("classes").get<int>();

        const json& tc = root.at("train_config");
        ckpt.train_cfg.lr = tc.at("lr").get<double>();
        ckpt.train_cfg.weight_decay = tc.at("weight_decay").get<double>();
        ckpt.train_cfg.batch_size = tc.at("batch_size").get<int>();
        ckpt.train_cfg.accumulation_steps = tc.at("accumulation_steps").get<int>();
        ckpt.train_cfg.plateau_patience = tc.at("plateau_patience").get<int>();
        ckpt.train_cfg.plateau_factor = tc.at("plateau_factor").get<double>();
        ckpt.train_cfg.early_stop_patience =
            tc.at("early_stop_patience").get<int>();
        ckpt.train_cfg.dropout_rate = tc.at("dropout_rate").get<double>();
        ckpt.train_cfg.max_epochs = tc.at("max_epochs").get<int>();
        ckpt.train_cfg.seed = tc.at("seed").get<std::uint64_t>();
        ckpt.train_cfg.weighted_loss = tc.at("weighted_loss").get<bool>();
        ckpt.train_cfg.min_improvement = tc.at("min_improvement").get<double>();

        const json& w = root.at("weights");
        ckpt.params.block = ParamBlock::zeros(ckpt.params.cfg);
        const json& jlayers = w.at("layers");
        if (static_cast<int>(jlayers.size()) != ckpt.params.cfg.layers)
            throw CorruptCheckpoint("layer count mismatch");
        for (int l = 0; l < ckpt.params.cfg.layers; ++l) {
            LayerParams lp;
            lp.W = mat_from_json(jlayers.at(l).at("W"));
            lp.U = mat_from_json(jlayers.at(l).at("U"));
            for (const auto& v : jlayers.at(l).at("b"))
                lp.b.push_back(v.get<double>());
            const LayerParams& expect = ckpt.params.block.layers[l];
            if (lp.W.rows != expect.W.rows || lp.W.cols != expect.W.cols ||
                lp.U.rows != expect.U.rows || lp.U.cols != expect.U.cols ||
                lp.b.size() != expect.b.size())
                throw CorruptCheckpoint("layer " + std::to_string(l) +
                                        " shape mismatch");
            ckpt.params.block.layers[l] = std::move(lp);
        }
        ckpt.params.block.dense_w = mat_from_json(w.at("dense_w"));
        ckpt.params.block.dense_b.clear();
        for (const auto& v : w.at("dense_b"))
            ckpt.params.block.dense_b.push_back(v.get<double>());
        ckpt.params.block.head_w = mat_from_json(w.at("head_w"));
        ckpt.params.block.head_b.clear();
        for (const auto& v : w.at("head_b"))
            ckpt.params.block.head_b.push_back(v.get<double>());

        for (int c2 = 0; c2 < kNumClasses; ++c2)
            ckpt.class_weights[c2] = root.at("class_weights").at(c2).get<double>();
        for (int f = 0; f < kFeatureDim; ++f) {
            ckpt.norm.min[f] = root.at("normalization").at("min").at(f).get<double>();
            ckpt.norm.max[f] = root.at("normalization").at("max").at(f).get<double>();
        }
        const json& v = root.at("vocab");
        for (const auto& s : v.at("tail")) ckpt.vocab.tail.fit(s.get<std::string>());
        for (const auto& s : v.at("airport"))
            ckpt.vocab.airport.fit(s.get<std::string>());
        for (const auto& s : v.at("satellite"))
            ckpt.vocab.satellite.fit(s.get<std::string>());
        for (const auto& s : v.at("beam")) ckpt.vocab.beam.fit(s.get<std::string>());
        return ckpt;
    } catch (const VersionMismatch&) {
        throw;
    } catch (const CorruptCheckpoint&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptCheckpoint(std::string("checkpoint field error: ") +
                                e.what());
    }
}

Prediction predict(const Checkpoint& ckpt,
                   const std::vector<FlightSequence>& sequences,
                   int batch_size) {
    if (ckpt.params.cfg.input_dim != kFeatureDim)
        throw NormalizationMismatch(
            "predict: checkpoint expects input width " +
            std::to_string(ckpt.params.cfg.input_dim));

    Prediction out;
    out.probs.resize(sequences.size());
    out.scores.resize(sequences.size());

    // batch length-sorted to cut padding waste; outputs are per-sequence
    // and independent of batch composition, so the order is restored after
    std::vector<size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return sequences[a].length() > sequences[b].length();
    });

    std::vector<const FlightSequence*> chunk;
    for (size_t i = 0; i < order.size(); i += batch_size) {
        chunk.clear();
        const size_t end = std::min(order.size(), i + batch_size);
        for (size_t j = i; j < end; ++j) chunk.push_back(&sequences[order[j]]);
        const Batch batch = Batch::from_sequences(chunk);
        const auto probs = forward(ckpt.params, batch, Mode::Eval);
        for (size_t j = i; j < end; ++j) {
            const int col = static_cast<int>(j - i);
            const int len = batch.lengths[col];
            auto& fp = out.probs[order[j]];
            auto& fs = out.scores[order[j]];
            fp.resize(len);
            fs.resize(len);
            for (int t = 0; t < len; ++t) {
                int arg = 0;
                for (int c = 0; c < kNumClasses; ++c) {
                    fp[t][c] = probs[t](c, col);
                    if (fp[t][c] > fp[t][arg]) arg = c;
                }
                fs[t] = arg + 1;
            }
        }
    }
    return out;
}

}  // namespace linkcast::nn
