#include "msr/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msr/simd/kernels.hpp"

namespace msr::nn {
namespace {

thread_local KinkMonitor* t_monitor = nullptr;

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// col[(ci*k + ky)*k + kx][y*W + x] = img[ci][y + ky - p][x + kx - p]
template <typename T>
void im2col(const T* img, std::size_t c, std::size_t h, std::size_t w, std::size_t k, T* col) {
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
    const std::ptrdiff_t H = static_cast<std::ptrdiff_t>(h);
    const std::ptrdiff_t W = static_cast<std::ptrdiff_t>(w);
    for (std::size_t ci = 0; ci < c; ++ci) {
        const T* plane = img + ci * h * w;
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                T* row = col + ((ci * k + ky) * k + kx) * h * w;
                const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
                const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
                for (std::ptrdiff_t y = 0; y < H; ++y) {
                    const std::ptrdiff_t sy = y + dy;
                    T* out = row + y * W;
                    if (sy < 0 || sy >= H) {
                        std::fill(out, out + W, T{0});
                        continue;
                    }
                    const T* src = plane + sy * W;
                    const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
                    const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(W, W - dx);
                    std::fill(out, out + x0, T{0});
                    std::copy(src + x0 + dx, src + x1 + dx, out + x0);
                    std::fill(out + x1, out + W, T{0});
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* col, std::size_t c, std::size_t h, std::size_t w, std::size_t k, T* img) {
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
    const std::ptrdiff_t H = static_cast<std::ptrdiff_t>(h);
    const std::ptrdiff_t W = static_cast<std::ptrdiff_t>(w);
    for (std::size_t ci = 0; ci < c; ++ci) {
        T* plane = img + ci * h * w;
        for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
                const T* row = col + ((ci * k + ky) * k + kx) * h * w;
                const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
                const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
                for (std::ptrdiff_t y = 0; y < H; ++y) {
                    const std::ptrdiff_t sy = y + dy;
                    if (sy < 0 || sy >= H) continue;
                    const T* in = row + y * W;
                    T* dst = plane + sy * W;
                    const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -dx);
                    const std::ptrdiff_t x1 = std::min<std::ptrdiff_t>(W, W - dx);
                    for (std::ptrdiff_t x = x0; x < x1; ++x) dst[x + dx] += in[x];
                }
            }
        }
    }
}

// Clamped into the open interval (0, 1) so gates never fully saturate.
template <typename T>
T sigmoid_scalar(T v) {
    constexpr T lo = std::numeric_limits<T>::min();
    constexpr T hi = T{1} - std::numeric_limits<T>::epsilon() / T{2};
    T y;
    if (v >= 0) {
        y = T{1} / (T{1} + std::exp(-v));
    } else {
        const T e = std::exp(v);
        y = e / (T{1} + e);
    }
    return std::clamp(y, lo, hi);
}

}  // namespace

// --- KinkMonitor -----------------------------------------------------------

KinkMonitor::KinkMonitor(Mode mode) : mode_(mode), prev_(t_monitor) { t_monitor = this; }
KinkMonitor::~KinkMonitor() { t_monitor = prev_; }

void KinkMonitor::set_mode(Mode mode) noexcept {
    mode_ = mode;
    cursor_ = 0;
    crossed_ = false;
}

template <typename T>
void KinkMonitor::observe(const T* pre, std::size_t n) {
    if (mode_ == Mode::kRecord) {
        std::vector<bool> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = pre[i] > T{0};
        patterns_.push_back(std::move(p));
        return;
    }
    if (cursor_ >= patterns_.size() || patterns_[cursor_].size() != n) {
        crossed_ = true;
        ++cursor_;
        return;
    }
    const auto& p = patterns_[cursor_++];
    for (std::size_t i = 0; i < n && !crossed_; ++i) crossed_ = p[i] != (pre[i] > T{0});
}

// --- elementwise -------------------------------------------------------------

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
    require_same_shape(a->value, b->value, "add");
    Tensor<T> out = a->value;
    accumulate(out, b->value);
    return make_result<T>(std::move(out), {a, b}, "add", [](Node<T>& self) {
        for (auto& p : self.parents) {
            if (p->requires_grad) accumulate(p->ensure_grad(), self.grad);
        }
    });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
    require_same_shape(a->value, b->value, "mul");
    Tensor<T> out(a->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
    return make_result<T>(std::move(out), {a, b}, "mul", [](Node<T>& self) {
        auto& pa = self.parents[0];
        auto& pb = self.parents[1];
        if (pa->requires_grad) {
            auto& g = pa->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            auto& g = pb->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
        }
    });
}

template <typename T>
Var<T> scale(const Var<T>& a, T alpha) {
    Tensor<T> out = a->value;
    for (auto& v : out.vec()) v *= alpha;
    return make_result<T>(std::move(out), {a}, "scale", [alpha](Node<T>& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += alpha * self.grad[i];
    });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
    if (t_monitor != nullptr) t_monitor->observe(x->value.data(), x->value.size());
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(x->value[i], T{0});
    return make_result<T>(std::move(out), {x}, "relu", [](Node<T>& self) {
        auto& p = self.parents[0];
        auto& g = p->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (p->value[i] > T{0}) g[i] += self.grad[i];
        }
    });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(x->value[i]);
    return make_result<T>(std::move(out), {x}, "sigmoid", [](Node<T>& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const T y = self.value[i];
            g[i] += self.grad[i] * y * (T{1} - y);
        }
    });
}

template <typename T>
Var<T> one_minus(const Var<T>& x) {
    Tensor<T> out(x->value.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = T{1} - x->value[i];
    return make_result<T>(std::move(out), {x}, "one_minus", [](Node<T>& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    });
}

// --- convolution ---------------------------------------------------------------

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& bias) {
    const Shape xs = x->value.shape();
    const Shape ws = w->value.shape();
    if (ws.h != ws.w || ws.h % 2 == 0) throw ShapeError("conv2d: kernel must be square and odd");
    if (ws.c != xs.c) {
        throw ShapeError("conv2d: input has " + std::to_string(xs.c) + " channels, weights expect " +
                         std::to_string(ws.c));
    }
    if (bias && bias->value.size() != ws.n) throw ShapeError("conv2d: bias size mismatch");

    const std::size_t k = ws.h;
    const std::size_t cout = ws.n;
    const std::size_t kdim = xs.c * k * k;
    const std::size_t hw = xs.plane();
    Tensor<T> out(Shape{xs.n, cout, xs.h, xs.w});
    std::vector<T> col(k == 1 ? 0 : kdim * hw);
    for (std::size_t n = 0; n < xs.n; ++n) {
        const T* src = x->value.data() + n * xs.item();
        if (k != 1) {
            im2col(src, xs.c, xs.h, xs.w, k, col.data());
            src = col.data();
        }
        T* dst = out.data() + n * cout * hw;
        simd::gemm_nn(cout, hw, kdim, w->value.data(), kdim, src, hw, dst, hw);
        if (bias) {
            for (std::size_t co = 0; co < cout; ++co) {
                const T b = bias->value[co];
                for (std::size_t i = 0; i < hw; ++i) dst[co * hw + i] += b;
            }
        }
    }

    return make_result<T>(std::move(out), {x, w, bias}, "conv2d", [k, kdim, hw, cout](Node<T>& self) {
        auto& px = self.parents[0];
        auto& pw = self.parents[1];
        auto& pb = self.parents[2];
        const Shape xs = px->value.shape();
        std::vector<T> col(k == 1 ? 0 : kdim * hw);
        std::vector<T> dcol(px->requires_grad && k != 1 ? kdim * hw : 0);
        for (std::size_t n = 0; n < xs.n; ++n) {
            const T* dy = self.grad.data() + n * cout * hw;
            if (pb && pb->requires_grad) {
                auto& gb = pb->ensure_grad();
                for (std::size_t co = 0; co < cout; ++co) {
                    T acc{0};
                    for (std::size_t i = 0; i < hw; ++i) acc += dy[co * hw + i];
                    gb[co] += acc;
                }
            }
            if (pw->requires_grad) {
                const T* src = px->value.data() + n * xs.item();
                if (k != 1) {
                    im2col(src, xs.c, xs.h, xs.w, k, col.data());
                    src = col.data();
                }
                simd::gemm_nt(cout, kdim, hw, dy, hw, src, hw, pw->ensure_grad().data(), kdim);
            }
            if (px->requires_grad) {
                T* dx = px->ensure_grad().data() + n * xs.item();
                if (k == 1) {
                    simd::gemm_tn(kdim, hw, cout, pw->value.data(), kdim, dy, hw, dx, hw);
                } else {
                    std::fill(dcol.begin(), dcol.end(), T{0});
                    simd::gemm_tn(kdim, hw, cout, pw->value.data(), kdim, dy, hw, dcol.data(), hw);
                    col2im_add(dcol.data(), xs.c, xs.h, xs.w, k, dx);
                }
            }
        }
    });
}

template <typename T>
Var<T> pixel_shuffle(const Var<T>& x, std::size_t s) {
    const Shape xs = x->value.shape();
    if (s == 0) throw ShapeError("pixel_shuffle: scale must be >= 1");
    const std::size_t s2 = s * s;
    if (xs.c % s2 != 0) {
        throw ShapeError("pixel_shuffle: channels " + std::to_string(xs.c) + " not divisible by " +
                         std::to_string(s2));
    }
    const Shape os{xs.n, xs.c / s2, xs.h * s, xs.w * s};
    // Flat destination index for every source element.
    auto dest = [os, s, s2](std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        const std::size_t sub = c % s2;
        const std::size_t oc = c / s2;
        const std::size_t oh = s * h + sub / s;
        const std::size_t ow = s * w + sub % s;
        return ((n * os.c + oc) * os.h + oh) * os.w + ow;
    };
    Tensor<T> out(os);
    std::vector<std::size_t> map(xs.numel());
    std::size_t i = 0;
    for (std::size_t n = 0; n < xs.n; ++n)
        for (std::size_t c = 0; c < xs.c; ++c)
            for (std::size_t h = 0; h < xs.h; ++h)
                for (std::size_t w = 0; w < xs.w; ++w, ++i) {
                    map[i] = dest(n, c, h, w);
                    out[map[i]] = x->value[i];
                }
    return make_result<T>(std::move(out), {x}, "pixel_shuffle", [map = std::move(map)](Node<T>& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t j = 0; j < map.size(); ++j) g[j] += self.grad[map[j]];
    });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
    if (xs.empty()) throw ShapeError("concat_channels: no inputs");
    const Shape s0 = xs.front()->value.shape();
    std::size_t channels = 0;
    for (const auto& v : xs) {
        const Shape& s = v->value.shape();
        if (s.n != s0.n || s.h != s0.h || s.w != s0.w) throw ShapeError("concat_channels: shape mismatch");
        channels += s.c;
    }
    const Shape os{s0.n, channels, s0.h, s0.w};
    Tensor<T> out(os);
    std::size_t offset = 0;
    for (const auto& v : xs) {
        const std::size_t len = v->value.shape().item();
        for (std::size_t n = 0; n < s0.n; ++n) {
            std::copy_n(v->value.data() + n * len, len, out.data() + n * os.item() + offset);
        }
        offset += len;
    }
    return make_result<T>(std::move(out), xs, "concat_channels", [](Node<T>& self) {
        const Shape os = self.value.shape();
        std::size_t offset = 0;
        for (auto& p : self.parents) {
            const std::size_t len = p->value.shape().item();
            if (p->requires_grad) {
                auto& g = p->ensure_grad();
                for (std::size_t n = 0; n < os.n; ++n) {
                    const T* src = self.grad.data() + n * os.item() + offset;
                    T* dst = g.data() + n * len;
                    for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
                }
            }
            offset += len;
        }
    });
}

template <typename T>
Var<T> channel_mean(const Var<T>& x) {
    const Shape xs = x->value.shape();
    const std::size_t hw = xs.plane();
    Tensor<T> out(Shape{xs.n, xs.c, 1, 1});
    for (std::size_t i = 0; i < xs.n * xs.c; ++i) {
        T acc{0};
        const T* p = x->value.data() + i * hw;
        for (std::size_t j = 0; j < hw; ++j) acc += p[j];
        out[i] = acc / static_cast<T>(hw);
    }
    return make_result<T>(std::move(out), {x}, "channel_mean", [hw](Node<T>& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < self.value.size(); ++i) {
            const T d = self.grad[i] / static_cast<T>(hw);
            T* p = g.data() + i * hw;
            for (std::size_t j = 0; j < hw; ++j) p[j] += d;
        }
    });
}

template <typename T>
Var<T> scale_channels(const Var<T>& x, const Var<T>& gate) {
    const Shape xs = x->value.shape();
    const Shape gs = gate->value.shape();
    if (gs.n != xs.n || gs.c != xs.c || gs.h != 1 || gs.w != 1) {
        throw ShapeError("scale_channels: gate must be (N, C, 1, 1)");
    }
    const std::size_t hw = xs.plane();
    Tensor<T> out(xs);
    for (std::size_t i = 0; i < xs.n * xs.c; ++i) {
        for (std::size_t j = 0; j < hw; ++j) out[i * hw + j] = x->value[i * hw + j] * gate->value[i];
    }
    return make_result<T>(std::move(out), {x, gate}, "scale_channels", [hw](Node<T>& self) {
        auto& px = self.parents[0];
        auto& pg = self.parents[1];
        const std::size_t groups = pg->value.size();
        if (px->requires_grad) {
            auto& g = px->ensure_grad();
            for (std::size_t i = 0; i < groups; ++i) {
                for (std::size_t j = 0; j < hw; ++j) g[i * hw + j] += self.grad[i * hw + j] * pg->value[i];
            }
        }
        if (pg->requires_grad) {
            auto& g = pg->ensure_grad();
            for (std::size_t i = 0; i < groups; ++i) {
                T acc{0};
                for (std::size_t j = 0; j < hw; ++j) acc += self.grad[i * hw + j] * px->value[i * hw + j];
                g[i] += acc;
            }
        }
    });
}

template <typename T>
Var<T> conv3d_volume(const Var<T>& x, const Var<T>& w, const Var<T>& bias) {
    if (w->value.size() != 27) throw ShapeError("conv3d_volume: kernel must have 27 weights");
    if (!bias || bias->value.size() != 1) throw ShapeError("conv3d_volume: bias must have 1 element");
    const Shape xs = x->value.shape();
    const auto C = static_cast<std::ptrdiff_t>(xs.c);
    const auto H = static_cast<std::ptrdiff_t>(xs.h);
    const auto W = static_cast<std::ptrdiff_t>(xs.w);

    // Visits every (output index, input index, tap) triple with the input
    // inside the volume.
    auto for_each_tap = [C, H, W, xs](auto&& fn) {
        for (std::size_t n = 0; n < xs.n; ++n) {
            const std::size_t base = n * xs.item();
            for (std::ptrdiff_t t = 0; t < 27; ++t) {
                const std::ptrdiff_t dc = t / 9 - 1;
                const std::ptrdiff_t dh = (t / 3) % 3 - 1;
                const std::ptrdiff_t dw = t % 3 - 1;
                for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, -dc); c < std::min(C, C - dc); ++c) {
                    for (std::ptrdiff_t h = std::max<std::ptrdiff_t>(0, -dh); h < std::min(H, H - dh); ++h) {
                        const std::size_t o = base + static_cast<std::size_t>((c * H + h) * W);
                        const std::size_t in = base + static_cast<std::size_t>(((c + dc) * H + h + dh) * W + dw);
                        const std::ptrdiff_t w0 = std::max<std::ptrdiff_t>(0, -dw);
                        const std::ptrdiff_t w1 = std::min(W, W - dw);
                        fn(static_cast<std::size_t>(t), o, in, w0, w1);
                    }
                }
            }
        }
    };

    Tensor<T> out(xs, bias->value[0]);
    const T* wv = w->value.data();
    const T* xv = x->value.data();
    T* ov = out.data();
    for_each_tap([&](std::size_t t, std::size_t o, std::size_t in, std::ptrdiff_t w0, std::ptrdiff_t w1) {
        const T wt = wv[t];
        for (std::ptrdiff_t j = w0; j < w1; ++j) ov[o + j] += wt * xv[in + j];
    });

    return make_result<T>(std::move(out), {x, w, bias}, "conv3d_volume", [for_each_tap](Node<T>& self) {
        auto& px = self.parents[0];
        auto& pw = self.parents[1];
        auto& pb = self.parents[2];
        const T* dy = self.grad.data();
        if (pb->requires_grad) {
            T acc{0};
            for (std::size_t i = 0; i < self.grad.size(); ++i) acc += dy[i];
            pb->ensure_grad()[0] += acc;
        }
        if (pw->requires_grad) {
            T* gw = pw->ensure_grad().data();
            const T* xv = px->value.data();
            for_each_tap([&](std::size_t t, std::size_t o, std::size_t in, std::ptrdiff_t w0, std::ptrdiff_t w1) {
                T acc{0};
                for (std::ptrdiff_t j = w0; j < w1; ++j) acc += dy[o + j] * xv[in + j];
                gw[t] += acc;
            });
        }
        if (px->requires_grad) {
            T* gx = px->ensure_grad().data();
            const T* wv = pw->value.data();
            for_each_tap([&](std::size_t t, std::size_t o, std::size_t in, std::ptrdiff_t w0, std::ptrdiff_t w1) {
                const T wt = wv[t];
                for (std::ptrdiff_t j = w0; j < w1; ++j) gx[in + j] += wt * dy[o + j];
            });
        }
    });
}

// --- stage integration -----------------------------------------------------

template <typename T>
Var<T> stage_integration(const std::vector<Var<T>>& stages, Tensor<T>* affinity) {
    const std::size_t m = stages.size();
    if (m < 1) throw ConfigError("stage_integration: needs at least one stage");
    const Shape s0 = stages.front()->value.shape();
    for (const auto& v : stages) {
        if (v->value.shape() != s0) throw ShapeError("stage_integration: stage shapes differ");
    }
    const std::size_t d = s0.item();
    const Shape os{s0.n, m * s0.c, s0.h, s0.w};
    Tensor<T> out(os);
    Tensor<T> smat(Shape{s0.n, 1, m, m});

    for (std::size_t n = 0; n < s0.n; ++n) {
        T* S = smat.data() + n * m * m;
        for (std::size_t i = 0; i < m; ++i) {
            const T* fi = stages[i]->value.data() + n * d;
            for (std::size_t j = i; j < m; ++j) {
                const T g = simd::dot(fi, stages[j]->value.data() + n * d, d);
                S[i * m + j] = g;
                S[j * m + i] = g;
            }
        }
        for (std::size_t i = 0; i < m; ++i) {
            T* row = S + i * m;
            const T mx = *std::max_element(row, row + m);
            T z{0};
            for (std::size_t j = 0; j < m; ++j) z += (row[j] = std::exp(row[j] - mx));
            for (std::size_t j = 0; j < m; ++j) row[j] /= z;
        }
        for (std::size_t i = 0; i < m; ++i) {
            T* yi = out.data() + n * os.item() + i * d;
            const T* fi = stages[i]->value.data() + n * d;
            std::copy_n(fi, d, yi);
            for (std::size_t j = 0; j < m; ++j) simd::axpy(S[i * m + j], stages[j]->value.data() + n * d, yi, d);
        }
    }
    if (affinity != nullptr) *affinity = smat;

    return make_result<T>(std::move(out), stages, "stage_integration",
                          [smat = std::move(smat), m, d](Node<T>& self) {
        const Shape os = self.value.shape();
        const std::size_t batch = os.n;
        std::vector<T*> grads(m, nullptr);
        for (std::size_t i = 0; i < m; ++i) {
            if (self.parents[i]->requires_grad) grads[i] = self.parents[i]->ensure_grad().data();
        }
        std::vector<T> dS(m * m);
        std::vector<T> dG(m * m);
        for (std::size_t n = 0; n < batch; ++n) {
            const T* S = smat.data() + n * m * m;
            auto F = [&](std::size_t j) { return self.parents[j]->value.data() + n * d; };
            auto dY = [&](std::size_t i) { return self.grad.data() + n * os.item() + i * d; };
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) dS[i * m + j] = simd::dot(dY(i), F(j), d);
            }
            for (std::size_t i = 0; i < m; ++i) {
                T rs{0};
                for (std::size_t j = 0; j < m; ++j) rs += S[i * m + j] * dS[i * m + j];
                for (std::size_t j = 0; j < m; ++j) dG[i * m + j] = S[i * m + j] * (dS[i * m + j] - rs);
            }
            for (std::size_t j = 0; j < m; ++j) {
                if (grads[j] == nullptr) continue;
                T* gj = grads[j] + n * d;
                simd::axpy(T{1}, dY(j), gj, d);
                for (std::size_t i = 0; i < m; ++i) {
                    simd::axpy(S[i * m + j], dY(i), gj, d);
                    simd::axpy(dG[j * m + i] + dG[i * m + j], F(i), gj, d);
                }
            }
        }
    });
}

// --- losses --------------------------------------------------------------------

template <typename T>
Var<T> mean_abs_error(const Var<T>& pred, const Var<T>& target) {
    require_same_shape(pred->value, target->value, "mean_abs_error");
    const std::size_t n = pred->value.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(pred->value[i] - target->value[i]));
    Tensor<T> out(Shape{1, 1, 1, 1}, static_cast<T>(acc / static_cast<double>(n)));
    return make_result<T>(std::move(out), {pred, target}, "mean_abs_error", [n](Node<T>& self) {
        auto& p = self.parents[0];
        auto& t = self.parents[1];
        const T g = self.grad[0] / static_cast<T>(n);
        auto sign = [](T v) { return v > T{0} ? T{1} : (v < T{0} ? T{-1} : T{0}); };
        if (p->requires_grad) {
            auto& gp = p->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) gp[i] += g * sign(p->value[i] - t->value[i]);
        }
        if (t->requires_grad) {
            auto& gt = t->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) gt[i] -= g * sign(p->value[i] - t->value[i]);
        }
    });
}

template <typename T>
Var<T> mean_squared_error(const Var<T>& pred, const Var<T>& target) {
    require_same_shape(pred->value, target->value, "mean_squared_error");
    const std::size_t n = pred->value.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = static_cast<double>(pred->value[i] - target->value[i]);
        acc += e * e;
    }
    Tensor<T> out(Shape{1, 1, 1, 1}, static_cast<T>(acc / static_cast<double>(n)));
    return make_result<T>(std::move(out), {pred, target}, "mean_squared_error", [n](Node<T>& self) {
        auto& p = self.parents[0];
        auto& t = self.parents[1];
        const T g = T{2} * self.grad[0] / static_cast<T>(n);
        if (p->requires_grad) {
            auto& gp = p->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) gp[i] += g * (p->value[i] - t->value[i]);
        }
        if (t->requires_grad) {
            auto& gt = t->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) gt[i] -= g * (p->value[i] - t->value[i]);
        }
    });
}

template <typename T>
Var<T> weighted_sum(const Var<T>& x, const Tensor<T>& weights) {
    if (weights.size() != x->value.size()) throw ShapeError("weighted_sum: weight count mismatch");
    T acc{0};
    for (std::size_t i = 0; i < weights.size(); ++i) acc += weights[i] * x->value[i];
    return make_result<T>(Tensor<T>(Shape{1, 1, 1, 1}, acc), {x}, "weighted_sum",
                          [weights](Node<T>& self) {
        auto& g = self.parents[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * weights[i];
    });
}

#define MSR_INSTANTIATE_OPS(T)                                                              \
    template Var<T> add(const Var<T>&, const Var<T>&);                                      \
    template Var<T> mul(const Var<T>&, const Var<T>&);                                      \
    template Var<T> scale(const Var<T>&, T);                                                \
    template Var<T> relu(const Var<T>&);                                                    \
    template Var<T> sigmoid(const Var<T>&);                                                 \
    template Var<T> one_minus(const Var<T>&);                                               \
    template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&);                    \
    template Var<T> pixel_shuffle(const Var<T>&, std::size_t);                              \
    template Var<T> concat_channels(const std::vector<Var<T>>&);                            \
    template Var<T> channel_mean(const Var<T>&);                                            \
    template Var<T> scale_channels(const Var<T>&, const Var<T>&);                           \
    template Var<T> conv3d_volume(const Var<T>&, const Var<T>&, const Var<T>&);             \
    template Var<T> stage_integration(const std::vector<Var<T>>&, Tensor<T>*);              \
    template Var<T> mean_abs_error(const Var<T>&, const Var<T>&);                           \
    template Var<T> mean_squared_error(const Var<T>&, const Var<T>&);                       \
    template Var<T> weighted_sum(const Var<T>&, const Tensor<T>&);                          \
    template void KinkMonitor::observe<T>(const T*, std::size_t);

MSR_INSTANTIATE_OPS(float)
MSR_INSTANTIATE_OPS(double)

}  // namespace msr::nn
