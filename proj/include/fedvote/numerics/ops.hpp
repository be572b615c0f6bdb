#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fedvote/error.hpp"
#include "fedvote/numerics/rng.hpp"
#include "fedvote/numerics/tensor.hpp"

namespace fedvote {

inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul of " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> c(m * n, 0.0);
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            const double ait = av[i * k + t];
            if (ait == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) c[i * n + j] += ait * bv[t * n + j];
        }
    }
    return Tensor({m, n}, std::move(c));
}

inline Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose needs a matrix, got " + shape_str(a.shape()));
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.at(i, j);
    return Tensor({n, m}, std::move(out));
}

/// Valid (unpadded, stride 1) cross-correlation. input is h x w x c,
/// kernels kh x kw x c x f, bias f; output (h-kh+1) x (w-kw+1) x f.
inline Tensor conv2d_valid(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    if (input.rank() != 3 || kernels.rank() != 4 || bias.rank() != 1) {
        throw ShapeError("conv2d_valid expects input[h,w,c], kernels[kh,kw,c,f], bias[f]; got " +
                         shape_str(input.shape()) + ", " + shape_str(kernels.shape()) + ", " +
                         shape_str(bias.shape()));
    }
    const std::size_t h = input.dim(0), w = input.dim(1), c = input.dim(2);
    const std::size_t kh = kernels.dim(0), kw = kernels.dim(1), f = kernels.dim(3);
    if (kernels.dim(2) != c || bias.dim(0) != f) {
        throw ShapeError("conv2d_valid channel/filter mismatch: input " + shape_str(input.shape()) +
                         ", kernels " + shape_str(kernels.shape()) + ", bias " + shape_str(bias.shape()));
    }
    if (kh > h || kw > w) {
        throw ShapeError("kernel " + shape_str(kernels.shape()) + " larger than input " + shape_str(input.shape()));
    }
    const std::size_t oh = h - kh + 1, ow = w - kw + 1;
    std::vector<double> out(oh * ow * f);
    const auto x = input.values();
    const auto k = kernels.values();
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            double* o = &out[(i * ow + j) * f];
            for (std::size_t q = 0; q < f; ++q) o[q] = bias[q];
            for (std::size_t di = 0; di < kh; ++di) {
                for (std::size_t dj = 0; dj < kw; ++dj) {
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        const double xv = x[((i + di) * w + (j + dj)) * c + ch];
                        const double* kr = &k[((di * kw + dj) * c + ch) * f];
                        for (std::size_t q = 0; q < f; ++q) o[q] += xv * kr[q];
                    }
                }
            }
        }
    }
    return Tensor({oh, ow, f}, std::move(out));
}

/// 2x2 non-overlapping max pooling; a trailing odd row/column is dropped.
/// When `argmax` is given it receives, per output value, the flat input index
/// that won (first maximum in row-major window order).
inline Tensor maxpool2(const Tensor& input, std::vector<std::size_t>* argmax = nullptr) {
    if (input.rank() != 3 || input.dim(0) < 2 || input.dim(1) < 2) {
        throw ShapeError("maxpool2 needs input[h>=2,w>=2,f], got " + shape_str(input.shape()));
    }
    const std::size_t h = input.dim(0), w = input.dim(1), f = input.dim(2);
    const std::size_t oh = h / 2, ow = w / 2;
    std::vector<double> out(oh * ow * f);
    if (argmax) argmax->assign(out.size(), 0);
    for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
            for (std::size_t q = 0; q < f; ++q) {
                std::size_t best = ((2 * i) * w + 2 * j) * f + q;
                for (std::size_t di = 0; di < 2; ++di) {
                    for (std::size_t dj = 0; dj < 2; ++dj) {
                        const std::size_t idx = ((2 * i + di) * w + (2 * j + dj)) * f + q;
                        if (input[idx] > input[best]) best = idx;
                    }
                }
                const std::size_t o = (i * ow + j) * f + q;
                out[o] = input[best];
                if (argmax) (*argmax)[o] = best;
            }
        }
    }
    return Tensor({oh, ow, f}, std::move(out));
}

inline Tensor relu(const Tensor& x) {
    std::vector<double> out(x.values().begin(), x.values().end());
    for (double& v : out) v = v > 0.0 ? v : 0.0;
    return Tensor(x.shape(), std::move(out));
}

/// 1 where x > 0, else 0 (including exactly 0).
inline Tensor relu_grad(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? 1.0 : 0.0;
    return Tensor(x.shape(), std::move(out));
}

namespace detail {

inline void softmax_inplace(std::span<double> v) {
    const double hi = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - hi);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

} // namespace detail

/// Softmax of a 1-D logit vector, max-subtracted.
inline Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() == 0) {
        throw ShapeError("softmax needs a non-empty vector, got " + shape_str(logits.shape()));
    }
    std::vector<double> out(logits.values().begin(), logits.values().end());
    detail::softmax_inplace(out);
    return Tensor(logits.shape(), std::move(out));
}

/// Row-wise softmax of an m x n logit matrix.
inline Tensor softmax_rows(const Tensor& logits) {
    if (logits.rank() != 2 || logits.dim(1) == 0) {
        throw ShapeError("softmax_rows needs a matrix with >= 1 column, got " + shape_str(logits.shape()));
    }
    std::vector<double> out(logits.values().begin(), logits.values().end());
    const std::size_t n = logits.dim(1);
    for (std::size_t i = 0; i < logits.dim(0); ++i) detail::softmax_inplace(std::span<double>(out).subspan(i * n, n));
    return Tensor(logits.shape(), std::move(out));
}

inline Tensor rng_normal(RngStream& rng, std::size_t n, double mean, double std) {
    if (!(std >= 0.0)) throw ArgumentError("rng_normal std must be >= 0, got " + std::to_string(std));
    std::vector<double> out(n);
    for (double& v : out) v = mean + std * rng.standard_normal();
    return Tensor({n}, std::move(out));
}

} // namespace fedvote
