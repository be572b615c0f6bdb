#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"
#include "fedvote/models/architecture.hpp"
#include "fedvote/numerics/ops.hpp"
#include "fedvote/numerics/rng.hpp"
#include "fedvote/numerics/tensor.hpp"

namespace fedvote {

/// Flat weights and biases of one architecture kind, in ParamLayout order.
struct ParameterVector {
    ArchKind kind = ArchKind::Linear;
    Tensor values;

    std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

/// Smallest probability fed to the log in the cross-entropy.
inline constexpr double kProbClamp = 1e-12;

/// Standard deviation of the initial weight distribution.
inline constexpr double kInitStd = 0.05;

class BaseLearner {
public:
    BaseLearner(Architecture arch, ParameterVector params) : arch_(std::move(arch)), params_(std::move(params)) {
        check_compatible(params_);
    }

    const Architecture& architecture() const noexcept { return arch_; }
    ArchKind kind() const noexcept { return arch_.kind; }
    std::size_t num_classes() const noexcept { return arch_.num_classes; }
    const ParameterVector& params() const noexcept { return params_; }

    void check_compatible(const ParameterVector& p) const {
        if (p.kind != arch_.kind) {
            throw CompatibilityError("parameter vector of kind " + std::string(to_string(p.kind)) +
                                     " does not fit a " + std::string(to_string(arch_.kind)) + " model");
        }
        const std::size_t expected = arch_.param_count();
        if (p.values.rank() != 1 || p.size() != expected) {
            throw CompatibilityError(std::string(to_string(arch_.kind)) + " model needs " + std::to_string(expected) +
                                     " parameters, got " + shape_str(p.values.shape()));
        }
    }

private:
    Architecture arch_;
    ParameterVector params_;
};

inline ParameterVector get_params(const BaseLearner& m) { return m.params(); }

/// New learner with the same architecture and the given parameters.
inline BaseLearner set_params(const BaseLearner& m, ParameterVector p) {
    m.check_compatible(p);
    return BaseLearner(m.architecture(), std::move(p));
}

/// Weights ~ Normal(0, 0.05) drawn in flattening order, biases exactly 0.
inline BaseLearner init_model(const Architecture& arch, RngStream& rng) {
    const ParamLayout layout = arch.layout();
    std::vector<double> values(layout.total, 0.0);
    for (const auto& b : layout.blocks) {
        if (b.is_bias) continue;
        for (std::size_t i = 0; i < b.size; ++i) values[b.offset + i] = kInitStd * rng.standard_normal();
    }
    return BaseLearner(arch, ParameterVector{arch.kind, Tensor({layout.total}, std::move(values))});
}

namespace detail {

inline void check_batch(const Architecture& arch, const Tensor& batch) {
    const Shape sample(batch.shape().begin() + (batch.rank() ? 1 : 0), batch.shape().end());
    if (batch.rank() < 2 || sample != arch.input_shape) {
        throw ShapeError("batch " + shape_str(batch.shape()) + " does not match model input " +
                         shape_str(arch.input_shape) + " (expected [m, ...input])");
    }
}

// Per-sample activations kept for the backward pass.
struct Activations {
    std::vector<double> hidden_pre;   // MLP pre-activation [H] / CNN conv output [oh*ow*F]
    std::vector<double> hidden;       // MLP relu output / CNN pooled features [ph*pw*F]
    std::vector<std::size_t> pool_argmax;
    std::vector<double> logits;
};

// y[n] = b + x[in] * W[in x n]
inline void dense(std::span<const double> x, const double* w, const double* b, std::size_t n, std::vector<double>& y) {
    y.assign(b, b + n);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* wr = w + i * n;
        for (std::size_t j = 0; j < n; ++j) y[j] += xi * wr[j];
    }
}

inline void forward_sample(const Architecture& arch, const ParamLayout& layout, std::span<const double> p,
                           std::span<const double> x, Activations& act) {
    const std::size_t n = arch.num_classes;
    auto at = [&](std::size_t block) { return p.data() + layout.blocks[block].offset; };
    switch (arch.kind) {
    case ArchKind::Linear:
        dense(x, at(0), at(1), n, act.logits);
        break;
    case ArchKind::Mlp:
        dense(x, at(0), at(1), arch.hidden, act.hidden_pre);
        act.hidden.resize(act.hidden_pre.size());
        for (std::size_t i = 0; i < act.hidden.size(); ++i) act.hidden[i] = std::max(act.hidden_pre[i], 0.0);
        dense(act.hidden, at(2), at(3), n, act.logits);
        break;
    case ArchKind::Cnn: {
        const Shape img = arch.image_shape();
        const std::size_t k = arch.kernel_size, f = arch.conv_filters, c = img[2];
        const Tensor input(img, std::vector<double>(x.begin(), x.end()));
        const Tensor kernels({k, k, c, f}, std::vector<double>(at(0), at(0) + k * k * c * f));
        const Tensor bias({f}, std::vector<double>(at(1), at(1) + f));
        const Tensor conv = conv2d_valid(input, kernels, bias);
        act.hidden_pre = conv.data();
        const Tensor pooled = maxpool2(relu(conv), &act.pool_argmax);
        act.hidden = pooled.data();
        dense(act.hidden, at(2), at(3), n, act.logits);
        break;
    }
    }
}

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(logits).
inline void backward_sample(const Architecture& arch, const ParamLayout& layout, std::span<const double> p,
                            std::span<const double> x, const Activations& act, std::span<const double> dlogits,
                            std::span<double> grad) {
    const std::size_t n = arch.num_classes;
    auto off = [&](std::size_t block) { return layout.blocks[block].offset; };

    // Dense head shared by every kind: input is x (LINEAR) or the hidden features.
    auto dense_backward = [&](std::span<const double> in, std::size_t wblock, std::size_t bblock,
                              std::vector<double>* din) {
        double* gw = grad.data() + off(wblock);
        double* gb = grad.data() + off(bblock);
        for (std::size_t j = 0; j < n; ++j) gb[j] += dlogits[j];
        for (std::size_t i = 0; i < in.size(); ++i) {
            const double xi = in[i];
            if (xi != 0.0)
                for (std::size_t j = 0; j < n; ++j) gw[i * n + j] += xi * dlogits[j];
        }
        if (din) {
            const double* w = p.data() + off(wblock);
            din->assign(in.size(), 0.0);
            for (std::size_t i = 0; i < in.size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += w[i * n + j] * dlogits[j];
                (*din)[i] = s;
            }
        }
    };

    switch (arch.kind) {
    case ArchKind::Linear:
        dense_backward(x, 0, 1, nullptr);
        break;
    case ArchKind::Mlp: {
        std::vector<double> dh;
        dense_backward(act.hidden, 2, 3, &dh);
        const std::size_t h = arch.hidden;
        double* gw = grad.data() + off(0);
        double* gb = grad.data() + off(1);
        for (std::size_t u = 0; u < h; ++u) {
            if (!(act.hidden_pre[u] > 0.0)) dh[u] = 0.0;
            gb[u] += dh[u];
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double xi = x[i];
            if (xi == 0.0) continue;
            for (std::size_t u = 0; u < h; ++u) gw[i * h + u] += xi * dh[u];
        }
        break;
    }
    case ArchKind::Cnn: {
        std::vector<double> dpool;
        dense_backward(act.hidden, 2, 3, &dpool);
        const Shape img = arch.image_shape();
        const std::size_t k = arch.kernel_size, f = arch.conv_filters, c = img[2], w = img[1];
        const std::size_t oh = img[0] - k + 1, ow = img[1] - k + 1;
        std::vector<double> dconv(oh * ow * f, 0.0);
        for (std::size_t o = 0; o < dpool.size(); ++o) dconv[act.pool_argmax[o]] += dpool[o];
        for (std::size_t i = 0; i < dconv.size(); ++i)
            if (!(act.hidden_pre[i] > 0.0)) dconv[i] = 0.0;
        double* gk = grad.data() + off(0);
        double* gb = grad.data() + off(1);
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                const double* d = &dconv[(i * ow + j) * f];
                for (std::size_t q = 0; q < f; ++q) gb[q] += d[q];
                for (std::size_t di = 0; di < k; ++di)
                    for (std::size_t dj = 0; dj < k; ++dj)
                        for (std::size_t ch = 0; ch < c; ++ch) {
                            const double xv = x[((i + di) * w + (j + dj)) * c + ch];
                            if (xv == 0.0) continue;
                            double* g = gk + ((di * k + dj) * c + ch) * f;
                            for (std::size_t q = 0; q < f; ++q) g[q] += xv * d[q];
                        }
            }
        }
        break;
    }
    }
}

} // namespace detail

/// Class probabilities [m x N] for a batch [m, ...input].
inline Tensor forward(const BaseLearner& model, const Tensor& batch) {
    const Architecture& arch = model.architecture();
    detail::check_batch(arch, batch);
    const ParamLayout layout = arch.layout();
    const std::size_t m = batch.dim(0), n = arch.num_classes;
    std::vector<double> out(m * n);
    detail::Activations act;
    for (std::size_t s = 0; s < m; ++s) {
        detail::forward_sample(arch, layout, model.params().values.values(), batch.row(s), act);
        std::copy(act.logits.begin(), act.logits.end(), out.begin() + static_cast<std::ptrdiff_t>(s * n));
    }
    return softmax_rows(Tensor({m, n}, std::move(out)));
}

/// Argmax class per row; ties go to the lowest class index.
inline std::vector<Label> argmax_rows(const Tensor& probs) {
    std::vector<Label> out(probs.dim(0));
    const std::size_t n = probs.dim(1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (probs.at(i, j) > probs.at(i, best)) best = j;
        out[i] = static_cast<Label>(best);
    }
    return out;
}

inline std::vector<Label> predict(const BaseLearner& model, const Tensor& batch) {
    return argmax_rows(forward(model, batch));
}

/// Mean multiclass cross-entropy of probability rows against class indices,
/// each probability clamped to >= 1e-12 before the log.
inline double cross_entropy(const Tensor& probs, std::span<const Label> labels) {
    if (probs.rank() != 2) throw ShapeError("cross_entropy needs an [m x N] matrix, got " + shape_str(probs.shape()));
    const std::size_t m = probs.dim(0);
    if (m == 0) throw ArgumentError("cross_entropy of an empty batch");
    if (labels.size() != m) {
        throw ShapeError("cross_entropy has " + std::to_string(m) + " rows but " + std::to_string(labels.size()) +
                         " labels");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (labels[i] >= probs.dim(1)) throw ArgumentError("label " + std::to_string(labels[i]) + " out of range");
        sum -= std::log(std::max(probs.at(i, labels[i]), kProbClamp));
    }
    return sum / static_cast<double>(m);
}

struct LossAndGradient {
    double loss = 0.0;
    ParameterVector grad;
};

/// Loss and exact analytic gradient of cross_entropy(forward(model, batch), labels).
/// Samples whose true-class probability sits below the clamp contribute a
/// constant to the loss and therefore nothing to the gradient.
inline LossAndGradient loss_and_gradient(const BaseLearner& model, const Tensor& batch, std::span<const Label> labels) {
    const Architecture& arch = model.architecture();
    detail::check_batch(arch, batch);
    const std::size_t m = batch.dim(0), n = arch.num_classes;
    if (m == 0) throw ArgumentError("gradient of an empty batch");
    if (labels.size() != m) throw ShapeError("batch has " + std::to_string(m) + " samples but " +
                                             std::to_string(labels.size()) + " labels");
    const ParamLayout layout = arch.layout();
    const auto p = model.params().values.values();
    std::vector<double> grad(layout.total, 0.0);
    std::vector<double> dlogits(n);
    detail::Activations act;
    double loss = 0.0;
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) {
        if (labels[s] >= n) throw ArgumentError("label " + std::to_string(labels[s]) + " out of range");
        const auto x = batch.row(s);
        detail::forward_sample(arch, layout, p, x, act);
        std::vector<double> probs = act.logits;
        detail::softmax_inplace(probs);
        const double py = probs[labels[s]];
        if (py < kProbClamp) {
            loss -= std::log(kProbClamp);
            continue;
        }
        loss -= std::log(py);
        for (std::size_t j = 0; j < n; ++j) dlogits[j] = (probs[j] - (j == labels[s] ? 1.0 : 0.0)) * inv_m;
        detail::backward_sample(arch, layout, p, x, act, dlogits, grad);
    }
    return {loss * inv_m, ParameterVector{arch.kind, Tensor({layout.total}, std::move(grad))}};
}

inline ParameterVector gradient(const BaseLearner& model, const Tensor& batch, std::span<const Label> labels) {
    return loss_and_gradient(model, batch, labels).grad;
}

} // namespace fedvote
