#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// matrices. Graphs are built per forward pass; parameters are leaf nodes
// bound by the caller, so independent graphs (batch shards, threads) never
// share mutable state. Eigen backs the matrix products, everything else is
// plain loops.

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace pinch::ad {

// All tensor storage is 64-byte aligned so Eigen's vectorized kernels take
// the same code path (and thus the same floating-point reduction order) on
// every run; heap-dependent alignment would make results differ in the last
// ulp between otherwise identical executions.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::size_t kAlign = 64;

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n == 0) return nullptr;
        const std::size_t bytes = ((n * sizeof(T) + kAlign - 1) / kAlign) * kAlign;
        void* p = std::aligned_alloc(kAlign, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { std::free(p); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept {
        return true;
    }
    template <class U>
    bool operator!=(const AlignedAllocator<U>&) const noexcept {
        return false;
    }
};

using dvec = std::vector<double, AlignedAllocator<double>>;

struct Node {
    int rows = 0;
    int cols = 0;
    dvec val;
    dvec grad;  // same shape, zero-initialized when needed
    bool needs_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop;  // accumulates += into parent grads

    std::size_t size() const { return val.size(); }
    void ensure_grad() {
        if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
    }
};

using NodePtr = std::shared_ptr<Node>;

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

inline ECMap cmap(const Node& n) { return ECMap(n.val.data(), n.rows, n.cols); }
inline EMap vmap(Node& n) { return EMap(n.val.data(), n.rows, n.cols); }
inline EMap gmap(Node& n) {
    n.ensure_grad();
    return EMap(n.grad.data(), n.rows, n.cols);
}

class Tensor {
public:
    Tensor() = default;

    static Tensor constant(int rows, int cols, std::vector<double> data) {
        return make(rows, cols, std::move(data), false);
    }
    static Tensor param(int rows, int cols, std::vector<double> data) {
        return make(rows, cols, std::move(data), true);
    }
    static Tensor zeros(int rows, int cols, bool requires_grad = false) {
        return make(rows, cols,
                    std::vector<double>(static_cast<std::size_t>(rows) * cols, 0.0),
                    requires_grad);
    }
    static Tensor scalar_const(double v) { return constant(1, 1, {v}); }

    bool defined() const { return static_cast<bool>(n_); }
    int rows() const { return n_->rows; }
    int cols() const { return n_->cols; }
    std::size_t size() const { return n_->size(); }
    bool requires_grad() const { return n_->needs_grad; }

    const dvec& value() const { return n_->val; }
    dvec& mutable_value() { return n_->val; }
    const dvec& grad() const {
        n_->ensure_grad();
        return n_->grad;
    }
    std::vector<double> value_copy() const { return {n_->val.begin(), n_->val.end()}; }
    void zero_grad() {
        n_->ensure_grad();
        std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
    }

    double scalar() const {
        if (n_->size() != 1) throw std::invalid_argument("scalar() on non-scalar tensor");
        return n_->val[0];
    }

    /// Reverse pass from a scalar output; accumulates into every
    /// grad-requiring leaf reachable from here.
    void backward() const;

    NodePtr node() const { return n_; }
    explicit Tensor(NodePtr n) : n_(std::move(n)) {}

private:
    static Tensor make(int rows, int cols, const std::vector<double>& data, bool needs_grad) {
        if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw std::invalid_argument("tensor: data length does not match shape");
        auto n = std::make_shared<Node>();
        n->rows = rows;
        n->cols = cols;
        n->val.assign(data.begin(), data.end());
        n->needs_grad = needs_grad;
        if (needs_grad) n->ensure_grad();
        return Tensor(std::move(n));
    }

    NodePtr n_;
};

namespace detail {

inline NodePtr fresh(int rows, int cols, std::vector<NodePtr> parents) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->val.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    for (const auto& p : parents) n->needs_grad = n->needs_grad || p->needs_grad;
    n->parents = std::move(parents);
    if (n->needs_grad) n->ensure_grad();
    return n;
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace detail

inline void Tensor::backward() const {
    Node* root = n_.get();
    if (root->size() != 1)
        throw std::invalid_argument("backward: output must be a scalar");
    if (!root->needs_grad) return;  // nothing trainable feeds this value

    // Iterative postorder over the needs_grad subgraph.
    std::vector<Node*> topo;
    std::unordered_set<Node*> done;
    std::vector<std::pair<Node*, std::size_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (done.count(node)) {
            stack.pop_back();
            continue;
        }
        bool descended = false;
        while (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->needs_grad && !done.count(p)) {
                stack.emplace_back(p, 0);
                descended = true;
                break;
            }
        }
        if (descended) continue;
        done.insert(node);
        topo.push_back(node);
        stack.pop_back();
    }

    root->ensure_grad();
    root->grad[0] += 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop(**it);
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

/// y = x W^T (+ b broadcast over rows). W is (out x in), b is (1 x out).
inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b = {}) {
    if (x.cols() != w.cols()) throw std::invalid_argument("linear: in-dim mismatch");
    if (b.defined() && (b.rows() != 1 || b.cols() != w.rows()))
        throw std::invalid_argument("linear: bias shape mismatch");

    std::vector<NodePtr> parents{x.node(), w.node()};
    if (b.defined()) parents.push_back(b.node());
    auto n = detail::fresh(x.rows(), w.rows(), std::move(parents));
    vmap(*n).noalias() = cmap(*x.node()) * cmap(*w.node()).transpose();
    if (b.defined()) vmap(*n).rowwise() += cmap(*b.node()).row(0);

    n->backprop = [](Node& self) {
        Node& x_ = *self.parents[0];
        Node& w_ = *self.parents[1];
        ECMap dy(self.grad.data(), self.rows, self.cols);
        if (x_.needs_grad) gmap(x_).noalias() += dy * cmap(w_);
        if (w_.needs_grad) gmap(w_).noalias() += dy.transpose() * cmap(x_);
        if (self.parents.size() == 3) {
            Node& b_ = *self.parents[2];
            if (b_.needs_grad) gmap(b_).row(0) += dy.colwise().sum();
        }
    };
    return Tensor(n);
}

/// Adds a (1 x d) row vector to every row.
inline Tensor bias_add(const Tensor& x, const Tensor& b) {
    if (b.rows() != 1 || b.cols() != x.cols())
        throw std::invalid_argument("bias_add: shape mismatch");
    auto n = detail::fresh(x.rows(), x.cols(), {x.node(), b.node()});
    vmap(*n) = cmap(*x.node());
    vmap(*n).rowwise() += cmap(*b.node()).row(0);
    n->backprop = [](Node& self) {
        Node& x_ = *self.parents[0];
        Node& b_ = *self.parents[1];
        ECMap dy(self.grad.data(), self.rows, self.cols);
        if (x_.needs_grad) gmap(x_) += dy;
        if (b_.needs_grad) gmap(b_).row(0) += dy.colwise().sum();
    };
    return Tensor(n);
}

// ---------------------------------------------------------------------------
// Elementwise
// ---------------------------------------------------------------------------

namespace detail {

template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& x, const char* /*name*/, Fwd fwd, Bwd dfdx) {
    auto n = fresh(x.rows(), x.cols(), {x.node()});
    const auto& xv = x.node()->val;
    for (std::size_t i = 0; i < xv.size(); ++i) n->val[i] = fwd(xv[i]);
    n->backprop = [dfdx](Node& self) {
        Node& x_ = *self.parents[0];
        if (!x_.needs_grad) return;
        x_.ensure_grad();
        for (std::size_t i = 0; i < self.val.size(); ++i)
            x_.grad[i] += self.grad[i] * dfdx(x_.val[i], self.val[i]);
    };
    return Tensor(n);
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "add");
    auto n = detail::fresh(a.rows(), a.cols(), {a.node(), b.node()});
    for (std::size_t i = 0; i < n->val.size(); ++i)
        n->val[i] = a.node()->val[i] + b.node()->val[i];
    n->backprop = [](Node& self) {
        for (int p = 0; p < 2; ++p) {
            Node& t = *self.parents[static_cast<std::size_t>(p)];
            if (!t.needs_grad) continue;
            t.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i) t.grad[i] += self.grad[i];
        }
    };
    return Tensor(n);
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "sub");
    auto n = detail::fresh(a.rows(), a.cols(), {a.node(), b.node()});
    for (std::size_t i = 0; i < n->val.size(); ++i)
        n->val[i] = a.node()->val[i] - b.node()->val[i];
    n->backprop = [](Node& self) {
        Node& a_ = *self.parents[0];
        Node& b_ = *self.parents[1];
        if (a_.needs_grad) {
            a_.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i) a_.grad[i] += self.grad[i];
        }
        if (b_.needs_grad) {
            b_.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i) b_.grad[i] -= self.grad[i];
        }
    };
    return Tensor(n);
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "mul");
    auto n = detail::fresh(a.rows(), a.cols(), {a.node(), b.node()});
    for (std::size_t i = 0; i < n->val.size(); ++i)
        n->val[i] = a.node()->val[i] * b.node()->val[i];
    n->backprop = [](Node& self) {
        Node& a_ = *self.parents[0];
        Node& b_ = *self.parents[1];
        if (a_.needs_grad) {
            a_.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i)
                a_.grad[i] += self.grad[i] * b_.val[i];
        }
        if (b_.needs_grad) {
            b_.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i)
                b_.grad[i] += self.grad[i] * a_.val[i];
        }
    };
    return Tensor(n);
}

inline Tensor div(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "div");
    auto n = detail::fresh(a.rows(), a.cols(), {a.node(), b.node()});
    for (std::size_t i = 0; i < n->val.size(); ++i)
        n->val[i] = a.node()->val[i] / b.node()->val[i];
    n->backprop = [](Node& self) {
        Node& a_ = *self.parents[0];
        Node& b_ = *self.parents[1];
        if (a_.needs_grad) {
            a_.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i)
                a_.grad[i] += self.grad[i] / b_.val[i];
        }
        if (b_.needs_grad) {
            b_.ensure_grad();
            for (std::size_t i = 0; i < self.val.size(); ++i)
                b_.grad[i] -= self.grad[i] * self.val[i] / b_.val[i];
        }
    };
    return Tensor(n);
}

inline Tensor mul_scalar(const Tensor& x, double s) {
    return detail::unary_op(
        x, "mul_scalar", [s](double v) { return v * s; },
        [s](double, double) { return s; });
}

inline Tensor add_scalar(const Tensor& x, double s) {
    return detail::unary_op(
        x, "add_scalar", [s](double v) { return v + s; },
        [](double, double) { return 1.0; });
}

/// s - x.
inline Tensor rsub_scalar(double s, const Tensor& x) {
    return detail::unary_op(
        x, "rsub_scalar", [s](double v) { return s - v; },
        [](double, double) { return -1.0; });
}

inline Tensor relu(const Tensor& x) {
    return detail::unary_op(
        x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
        [](double xv, double) { return xv > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sigmoid(const Tensor& x) {
    return detail::unary_op(
        x, "sigmoid",
        [](double v) { return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v)); },
        [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh_op(const Tensor& x) {
    return detail::unary_op(
        x, "tanh", [](double v) { return std::tanh(v); },
        [](double, double y) { return 1.0 - y * y; });
}

/// log(1 + e^x), evaluated stably; gradient is the sigmoid.
inline Tensor softplus(const Tensor& x) {
    return detail::unary_op(
        x, "softplus",
        [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
        [](double xv, double) {
            return xv >= 0.0 ? 1.0 / (1.0 + std::exp(-xv)) : std::exp(xv) / (1.0 + std::exp(xv));
        });
}

inline Tensor log_op(const Tensor& x) {
    return detail::unary_op(
        x, "log", [](double v) { return std::log(v); },
        [](double xv, double) { return 1.0 / xv; });
}

/// Values outside [lo, hi] are pinned and receive zero gradient.
inline Tensor clamp(const Tensor& x, double lo, double hi) {
    return detail::unary_op(
        x, "clamp", [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
        [lo, hi](double xv, double) { return (xv < lo || xv > hi) ? 0.0 : 1.0; });
}

// ---------------------------------------------------------------------------
// Reductions and shape ops
// ---------------------------------------------------------------------------

inline Tensor sum_all(const Tensor& x) {
    auto n = detail::fresh(1, 1, {x.node()});
    double s = 0.0;
    for (double v : x.node()->val) s += v;
    n->val[0] = s;
    n->backprop = [](Node& self) {
        Node& x_ = *self.parents[0];
        if (!x_.needs_grad) return;
        x_.ensure_grad();
        const double g = self.grad[0];
        for (double& gv : x_.grad) gv += g;
    };
    return Tensor(n);
}

namespace detail {

inline void check_segments(const Tensor& x, int seg, const char* op) {
    if (seg < 1 || x.rows() % seg != 0)
        throw std::invalid_argument(std::string(op) + ": segment size must divide rows");
}

}  // namespace detail

/// Sums each consecutive block of `seg` rows: (S*seg x C) -> (S x C).
inline Tensor segment_sum(const Tensor& x, int seg) {
    detail::check_segments(x, seg, "segment_sum");
    const int out_rows = x.rows() / seg;
    const int c = x.cols();
    auto n = detail::fresh(out_rows, c, {x.node()});
    const auto& xv = x.node()->val;
    for (int s = 0; s < out_rows; ++s)
        for (int r = 0; r < seg; ++r)
            for (int j = 0; j < c; ++j)
                n->val[static_cast<std::size_t>(s) * c + j] +=
                    xv[(static_cast<std::size_t>(s) * seg + r) * c + j];
    n->backprop = [seg, c](Node& self) {
        Node& x_ = *self.parents[0];
        if (!x_.needs_grad) return;
        x_.ensure_grad();
        for (int s = 0; s < self.rows; ++s)
            for (int r = 0; r < seg; ++r)
                for (int j = 0; j < c; ++j)
                    x_.grad[(static_cast<std::size_t>(s) * seg + r) * c + j] +=
                        self.grad[static_cast<std::size_t>(s) * c + j];
    };
    return Tensor(n);
}

inline Tensor segment_mean(const Tensor& x, int seg) {
    return mul_scalar(segment_sum(x, seg), 1.0 / seg);
}

/// Per-segment, per-column max; gradient routes to the first maximizer.
inline Tensor segment_max(const Tensor& x, int seg) {
    detail::check_segments(x, seg, "segment_max");
    const int out_rows = x.rows() / seg;
    const int c = x.cols();
    auto n = detail::fresh(out_rows, c, {x.node()});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(out_rows) * c);
    const auto& xv = x.node()->val;
    for (int s = 0; s < out_rows; ++s) {
        for (int j = 0; j < c; ++j) {
            int best = 0;
            double bv = xv[(static_cast<std::size_t>(s) * seg) * c + j];
            for (int r = 1; r < seg; ++r) {
                const double v = xv[(static_cast<std::size_t>(s) * seg + r) * c + j];
                if (v > bv) {
                    bv = v;
                    best = r;
                }
            }
            n->val[static_cast<std::size_t>(s) * c + j] = bv;
            (*argmax)[static_cast<std::size_t>(s) * c + j] = best;
        }
    }
    n->backprop = [seg, c, argmax](Node& self) {
        Node& x_ = *self.parents[0];
        if (!x_.needs_grad) return;
        x_.ensure_grad();
        for (int s = 0; s < self.rows; ++s)
            for (int j = 0; j < c; ++j) {
                const int r = (*argmax)[static_cast<std::size_t>(s) * c + j];
                x_.grad[(static_cast<std::size_t>(s) * seg + r) * c + j] +=
                    self.grad[static_cast<std::size_t>(s) * c + j];
            }
    };
    return Tensor(n);
}

/// Mean over all rows: (R x C) -> (1 x C).
inline Tensor mean_over_rows(const Tensor& x) { return segment_mean(x, x.rows()); }
inline Tensor max_over_rows(const Tensor& x) { return segment_max(x, x.rows()); }

/// Repeats each row `times` consecutively: (S x C) -> (S*times x C).
inline Tensor repeat_rows(const Tensor& x, int times) {
    if (times < 1) throw std::invalid_argument("repeat_rows: times must be >= 1");
    const int c = x.cols();
    auto n = detail::fresh(x.rows() * times, c, {x.node()});
    const auto& xv = x.node()->val;
    for (int s = 0; s < x.rows(); ++s)
        for (int r = 0; r < times; ++r)
            for (int j = 0; j < c; ++j)
                n->val[(static_cast<std::size_t>(s) * times + r) * c + j] =
                    xv[static_cast<std::size_t>(s) * c + j];
    n->backprop = [times, c](Node& self) {
        Node& x_ = *self.parents[0];
        if (!x_.needs_grad) return;
        x_.ensure_grad();
        const int src_rows = self.rows / times;
        for (int s = 0; s < src_rows; ++s)
            for (int r = 0; r < times; ++r)
                for (int j = 0; j < c; ++j)
                    x_.grad[static_cast<std::size_t>(s) * c + j] +=
                        self.grad[(static_cast<std::size_t>(s) * times + r) * c + j];
    };
    return Tensor(n);
}

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("concat: row mismatch");
    const int ca = a.cols(), cb = b.cols();
    auto n = detail::fresh(a.rows(), ca + cb, {a.node(), b.node()});
    for (int r = 0; r < a.rows(); ++r) {
        for (int j = 0; j < ca; ++j)
            n->val[static_cast<std::size_t>(r) * (ca + cb) + j] =
                a.node()->val[static_cast<std::size_t>(r) * ca + j];
        for (int j = 0; j < cb; ++j)
            n->val[static_cast<std::size_t>(r) * (ca + cb) + ca + j] =
                b.node()->val[static_cast<std::size_t>(r) * cb + j];
    }
    n->backprop = [ca, cb](Node& self) {
        Node& a_ = *self.parents[0];
        Node& b_ = *self.parents[1];
        for (int r = 0; r < self.rows; ++r) {
            if (a_.needs_grad) {
                a_.ensure_grad();
                for (int j = 0; j < ca; ++j)
                    a_.grad[static_cast<std::size_t>(r) * ca + j] +=
                        self.grad[static_cast<std::size_t>(r) * (ca + cb) + j];
            }
            if (b_.needs_grad) {
                b_.ensure_grad();
                for (int j = 0; j < cb; ++j)
                    b_.grad[static_cast<std::size_t>(r) * cb + j] +=
                        self.grad[static_cast<std::size_t>(r) * (ca + cb) + ca + j];
            }
        }
    };
    return Tensor(n);
}

/// Per-row inner product: (R x C, R x C) -> (R x 1).
inline Tensor row_dot(const Tensor& a, const Tensor& b) {
    detail::require_same_shape(a, b, "row_dot");
    const int c = a.cols();
    auto n = detail::fresh(a.rows(), 1, {a.node(), b.node()});
    const auto& av = a.node()->val;
    const auto& bv = b.node()->val;
    for (int r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (int j = 0; j < c; ++j)
            s += av[static_cast<std::size_t>(r) * c + j] * bv[static_cast<std::size_t>(r) * c + j];
        n->val[static_cast<std::size_t>(r)] = s;
    }
    n->backprop = [c](Node& self) {
        Node& a_ = *self.parents[0];
        Node& b_ = *self.parents[1];
        for (int r = 0; r < self.rows; ++r) {
            const double g = self.grad[static_cast<std::size_t>(r)];
            if (a_.needs_grad) {
                a_.ensure_grad();
                for (int j = 0; j < c; ++j)
                    a_.grad[static_cast<std::size_t>(r) * c + j] +=
                        g * b_.val[static_cast<std::size_t>(r) * c + j];
            }
            if (b_.needs_grad) {
                b_.ensure_grad();
                for (int j = 0; j < c; ++j)
                    b_.grad[static_cast<std::size_t>(r) * c + j] +=
                        g * a_.val[static_cast<std::size_t>(r) * c + j];
            }
        }
    };
    return Tensor(n);
}

/// Scales row r of x by s[r]: (R x C, R x 1) -> (R x C).
inline Tensor scale_rows(const Tensor& x, const Tensor& s) {
    if (s.rows() != x.rows() || s.cols() != 1)
        throw std::invalid_argument("scale_rows: scale must be (rows x 1)");
    const int c = x.cols();
    auto n = detail::fresh(x.rows(), c, {x.node(), s.node()});
    for (int r = 0; r < x.rows(); ++r) {
        const double sv = s.node()->val[static_cast<std::size_t>(r)];
        for (int j = 0; j < c; ++j)
            n->val[static_cast<std::size_t>(r) * c + j] =
                x.node()->val[static_cast<std::size_t>(r) * c + j] * sv;
    }
    n->backprop = [c](Node& self) {
        Node& x_ = *self.parents[0];
        Node& s_ = *self.parents[1];
        for (int r = 0; r < self.rows; ++r) {
            const double sv = s_.val[static_cast<std::size_t>(r)];
            if (x_.needs_grad) {
                x_.ensure_grad();
                for (int j = 0; j < c; ++j)
                    x_.grad[static_cast<std::size_t>(r) * c + j] +=
                        self.grad[static_cast<std::size_t>(r) * c + j] * sv;
            }
            if (s_.needs_grad) {
                s_.ensure_grad();
                double g = 0.0;
                for (int j = 0; j < c; ++j)
                    g += self.grad[static_cast<std::size_t>(r) * c + j] *
                         x_.val[static_cast<std::size_t>(r) * c + j];
                s_.grad[static_cast<std::size_t>(r)] += g;
            }
        }
    };
    return Tensor(n);
}

}  // namespace pinch::ad
