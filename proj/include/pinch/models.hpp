#pragma once

// The three activation policies. All parameters are shared across antennas
// and pooled globally, so a policy trained at one array size runs unchanged
// at any other.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinch/autodiff.hpp"
#include "pinch/channel.hpp"
#include "pinch/rng.hpp"

namespace pinch {

enum class PolicyKind : std::uint32_t { Mlp = 0, GnnMlp = 1, GnnDispn = 2 };

inline const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Mlp: return "mlp";
        case PolicyKind::GnnMlp: return "gnnmlp";
        case PolicyKind::GnnDispn: return "dispn";
    }
    return "?";
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
    if (s == "mlp") return PolicyKind::Mlp;
    if (s == "gnnmlp") return PolicyKind::GnnMlp;
    if (s == "dispn" || s == "gnndispn") return PolicyKind::GnnDispn;
    throw std::invalid_argument("unknown policy kind: " + s);
}

/// Architecture hyperparameters; everything is independent of the antenna
/// count.
struct PolicySpec {
    PolicyKind kind = PolicyKind::GnnDispn;
    int embed_dim = 128;                      // node/user embedding size d
    int edge_hidden = 64;                     // hidden width of the edge-message MLP
    int gnn_layers = 1;                       // message-passing layers L_g
    int key_dim = 64;                         // attention key/value size d_k
    double sharpening = 10.0;                 // importance clipping constant c
    std::vector<int> fusion_hidden = {128, 64};  // fusion MLP hidden widths

    void validate() const {
        if (embed_dim < 1 || edge_hidden < 1 || key_dim < 1)
            throw std::invalid_argument("policy: dimensions must be positive");
        if (gnn_layers < 1) throw std::invalid_argument("policy: gnn_layers must be >= 1");
        if (!(sharpening > 0)) throw std::invalid_argument("policy: sharpening must be > 0");
    }
};

/// One antenna-selection instance, batched: antenna feature rows are grouped
/// per instance ([|B_n|, angle B_n] for each antenna), the user node carries
/// a zero feature and is connected to every antenna.
struct BatchFeatures {
    int n_instances = 0;
    int n_antennas = 0;
    ad::Tensor ant_features;   // (B*N) x 2
    ad::Tensor user_features;  // B x 2
};

inline BatchFeatures make_batch_features(const std::vector<const ChannelVector*>& channels) {
    if (channels.empty()) throw std::invalid_argument("batch: no instances");
    const int b = static_cast<int>(channels.size());
    const int n = channels[0]->size();
    std::vector<double> ant(static_cast<std::size_t>(b) * n * 2);
    for (int i = 0; i < b; ++i) {
        if (channels[static_cast<std::size_t>(i)]->size() != n)
            throw std::invalid_argument("batch: inconsistent antenna counts");
        for (int a = 0; a < n; ++a) {
            ant[(static_cast<std::size_t>(i) * n + a) * 2 + 0] =
                channels[static_cast<std::size_t>(i)]->magnitude(a);
            ant[(static_cast<std::size_t>(i) * n + a) * 2 + 1] =
                channels[static_cast<std::size_t>(i)]->phase(a);
        }
    }
    BatchFeatures f;
    f.n_instances = b;
    f.n_antennas = n;
    f.ant_features = ad::Tensor::constant(b * n, 2, std::move(ant));
    f.user_features = ad::Tensor::constant(b, 2, std::vector<double>(static_cast<std::size_t>(b) * 2, 0.0));
    return f;
}

struct ParamDef {
    std::string name;
    int rows = 0;
    int cols = 0;
    bool is_bias = false;
};

class Policy {
public:
    Policy() = default;
    explicit Policy(PolicySpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        build_defs();
        values_.resize(defs_.size());
        for (std::size_t i = 0; i < defs_.size(); ++i)
            values_[i].assign(static_cast<std::size_t>(defs_[i].rows) * defs_[i].cols, 0.0);
    }

    const PolicySpec& spec() const { return spec_; }
    const std::vector<ParamDef>& param_defs() const { return defs_; }
    std::vector<std::vector<double>>& values() { return values_; }
    const std::vector<std::vector<double>>& values() const { return values_; }

    std::size_t param_count() const {
        std::size_t c = 0;
        for (const auto& v : values_) c += v.size();
        return c;
    }

    /// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero biases.
    void init_weights(std::uint64_t seed) {
        const auto root = CounterRng(seed).derive(rng_stream::kWeightInit);
        for (std::size_t p = 0; p < defs_.size(); ++p) {
            if (defs_[p].is_bias) {
                std::fill(values_[p].begin(), values_[p].end(), 0.0);
                continue;
            }
            const double bound = 1.0 / std::sqrt(static_cast<double>(defs_[p].cols));
            const auto stream = root.derive(p);
            for (std::size_t i = 0; i < values_[p].size(); ++i)
                values_[p][i] = stream.uniform(i, -bound, bound);
        }
    }

    /// Leaf tensors over a copy of the current values. Trainable bindings get
    /// gradient buffers; inference bindings are plain constants.
    std::vector<ad::Tensor> bind(bool requires_grad) const {
        std::vector<ad::Tensor> out;
        out.reserve(defs_.size());
        for (std::size_t i = 0; i < defs_.size(); ++i) {
            out.push_back(requires_grad
                              ? ad::Tensor::param(defs_[i].rows, defs_[i].cols, values_[i])
                              : ad::Tensor::constant(defs_[i].rows, defs_[i].cols, values_[i]));
        }
        return out;
    }

    /// Per-antenna pre-sigmoid logits, shape (B*N) x 1. For the attention
    /// policy these are the importance scores imp_n in [-c, c].
    ad::Tensor forward(const std::vector<ad::Tensor>& p, const BatchFeatures& f) const {
        switch (spec_.kind) {
            case PolicyKind::Mlp: return forward_mlp(p, f);
            case PolicyKind::GnnMlp: return forward_gnn_mlp(p, f);
            case PolicyKind::GnnDispn: return forward_dispn(p, f);
        }
        throw std::logic_error("unreachable");
    }

    std::vector<double> probabilities(const ChannelVector& channel) const {
        auto f = make_batch_features({&channel});
        auto logits = forward(bind(false), f);
        std::vector<double> probs(logits.value().size());
        for (std::size_t i = 0; i < probs.size(); ++i)
            probs[i] = 1.0 / (1.0 + std::exp(-logits.value()[i]));
        return probs;
    }

    /// Raw importance scores for a single instance (top-K ranking input).
    std::vector<double> importance(const ChannelVector& channel) const {
        auto f = make_batch_features({&channel});
        return forward(bind(false), f).value_copy();
    }

    void save(const std::string& path) const;
    static Policy load(const std::string& path);

private:
    int fusion_input_dim() const { return 2 * spec_.embed_dim; }

    void add_linear(const std::string& name, int out, int in, bool with_bias = true) {
        defs_.push_back({name + ".w", out, in, false});
        if (with_bias) defs_.push_back({name + ".b", 1, out, true});
    }

    void build_defs() {
        const int d = spec_.embed_dim;
        if (spec_.kind == PolicyKind::Mlp) {
            add_linear("enc", d, 2);
        } else {
            add_linear("in", d, 2);
            for (int l = 1; l <= spec_.gnn_layers; ++l) {
                const std::string base = "edge" + std::to_string(l);
                add_linear(base + ".0", spec_.edge_hidden, 2);
                add_linear(base + ".1", d, spec_.edge_hidden);
                defs_.push_back({"node" + std::to_string(l) + ".b", 1, d, true});
            }
            for (int l = 0; l <= spec_.gnn_layers; ++l)
                add_linear("ro" + std::to_string(l), d, 2 * d);
        }
        if (spec_.kind == PolicyKind::GnnDispn) {
            add_linear("wq", spec_.key_dim, 2 * d, false);
            add_linear("wk", spec_.key_dim, d, false);
            add_linear("wv", spec_.key_dim, d, false);
            add_linear("wkp", spec_.key_dim, d, false);
        } else {
            int in = fusion_input_dim();
            int idx = 0;
            for (int h : spec_.fusion_hidden) {
                add_linear("fus." + std::to_string(idx++), h, in);
                in = h;
            }
            add_linear("fus.out", 1, in);
        }
    }

    int pidx(const std::string& name) const {
        for (std::size_t i = 0; i < defs_.size(); ++i)
            if (defs_[i].name == name) return static_cast<int>(i);
        throw std::logic_error("unknown param " + name);
    }
    const ad::Tensor& at(const std::vector<ad::Tensor>& p, const std::string& name) const {
        return p[static_cast<std::size_t>(pidx(name))];
    }

    ad::Tensor fusion(const std::vector<ad::Tensor>& p, const ad::Tensor& z) const {
        ad::Tensor h = z;
        for (int i = 0; i < static_cast<int>(spec_.fusion_hidden.size()); ++i) {
            const std::string base = "fus." + std::to_string(i);
            h = ad::relu(ad::linear(h, at(p, base + ".w"), at(p, base + ".b")));
        }
        return ad::linear(h, at(p, "fus.out.w"), at(p, "fus.out.b"));
    }

    ad::Tensor forward_mlp(const std::vector<ad::Tensor>& p, const BatchFeatures& f) const {
        auto h = ad::relu(ad::linear(f.ant_features, at(p, "enc.w"), at(p, "enc.b")));
        auto hbar = ad::segment_mean(h, f.n_antennas);
        auto z = ad::concat_cols(h, ad::repeat_rows(hbar, f.n_antennas));
        return fusion(p, z);
    }

    struct Encoded {
        ad::Tensor h_ant;   // (B*N) x d, summed over layers
        ad::Tensor h_user;  // B x d
        ad::Tensor g;       // B x d graph embedding
    };

    // Message passing on the star graph. Messages depend only on the edge
    // feature, so the same message feeds both endpoints: the antenna gets it
    // directly, the user node aggregates all of them.
    Encoded encode(const std::vector<ad::Tensor>& p, const BatchFeatures& f) const {
        const int n = f.n_antennas;
        auto h_ant = ad::linear(f.ant_features, at(p, "in.w"), at(p, "in.b"));
        auto h_user = ad::linear(f.user_features, at(p, "in.w"), at(p, "in.b"));

        auto pooled = [&](const ad::Tensor& layer_ant) {
            return ad::concat_cols(ad::segment_mean(layer_ant, n), ad::segment_max(layer_ant, n));
        };
        auto g = ad::linear(pooled(h_ant), at(p, "ro0.w"), at(p, "ro0.b"));

        ad::Tensor h_ant_sum = h_ant;
        ad::Tensor h_user_sum = h_user;
        for (int l = 1; l <= spec_.gnn_layers; ++l) {
            const std::string base = "edge" + std::to_string(l);
            auto msg = ad::linear(
                ad::relu(ad::linear(f.ant_features, at(p, base + ".0.w"), at(p, base + ".0.b"))),
                at(p, base + ".1.w"), at(p, base + ".1.b"));
            const auto& node_b = at(p, "node" + std::to_string(l) + ".b");
            auto layer_ant = ad::relu(ad::bias_add(msg, node_b));
            auto layer_user = ad::relu(ad::bias_add(ad::segment_sum(msg, n), node_b));
            h_ant_sum = ad::add(h_ant_sum, layer_ant);
            h_user_sum = ad::add(h_user_sum, layer_user);
            const std::string ro = "ro" + std::to_string(l);
            g = ad::add(g, ad::linear(pooled(layer_ant), at(p, ro + ".w"), at(p, ro + ".b")));
        }
        return {h_ant_sum, h_user_sum, g};
    }

    ad::Tensor forward_gnn_mlp(const std::vector<ad::Tensor>& p, const BatchFeatures& f) const {
        auto enc = encode(p, f);
        auto z = ad::concat_cols(enc.h_ant, ad::repeat_rows(enc.g, f.n_antennas));
        return fusion(p, z);
    }

    ad::Tensor forward_dispn(const std::vector<ad::Tensor>& p, const BatchFeatures& f) const {
        auto enc = encode(p, f);
        const int n = f.n_antennas;
        const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(spec_.key_dim));

        auto q = ad::linear(ad::concat_cols(enc.g, enc.h_user), at(p, "wq.w"));
        auto k = ad::linear(enc.h_ant, at(p, "wk.w"));
        auto v = ad::linear(enc.h_ant, at(p, "wv.w"));
        auto kp = ad::linear(enc.h_ant, at(p, "wkp.w"));

        auto w = ad::sigmoid(ad::mul_scalar(ad::row_dot(ad::repeat_rows(q, n), k), inv_sqrt_dk));
        auto z_user = ad::segment_sum(ad::scale_rows(v, w), n);
        auto scores = ad::mul_scalar(ad::row_dot(ad::repeat_rows(z_user, n), kp), inv_sqrt_dk);
        return ad::mul_scalar(ad::tanh_op(scores), spec_.sharpening);
    }

    PolicySpec spec_;
    std::vector<ParamDef> defs_;
    std::vector<std::vector<double>> values_;
};

// ---------------------------------------------------------------------------
// Checkpoints: versioned binary, bit-exact round trip.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[] = "PINCHKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void Policy::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    os.write(kCheckpointMagic, 8);
    detail::put_u32(os, kCheckpointVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(spec_.kind));
    detail::put_u32(os, static_cast<std::uint32_t>(spec_.embed_dim));
    detail::put_u32(os, static_cast<std::uint32_t>(spec_.edge_hidden));
    detail::put_u32(os, static_cast<std::uint32_t>(spec_.gnn_layers));
    detail::put_u32(os, static_cast<std::uint32_t>(spec_.key_dim));
    detail::put_f64(os, spec_.sharpening);
    detail::put_u32(os, static_cast<std::uint32_t>(spec_.fusion_hidden.size()));
    for (int h : spec_.fusion_hidden) detail::put_u32(os, static_cast<std::uint32_t>(h));

    detail::put_u32(os, static_cast<std::uint32_t>(defs_.size()));
    for (std::size_t i = 0; i < defs_.size(); ++i) {
        detail::put_u32(os, static_cast<std::uint32_t>(defs_[i].name.size()));
        os.write(defs_[i].name.data(), static_cast<std::streamsize>(defs_[i].name.size()));
        detail::put_u32(os, static_cast<std::uint32_t>(defs_[i].rows));
        detail::put_u32(os, static_cast<std::uint32_t>(defs_[i].cols));
        detail::put_u64(os, values_[i].size());
        os.write(reinterpret_cast<const char*>(values_[i].data()),
                 static_cast<std::streamsize>(values_[i].size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Policy Policy::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    const auto version = detail::get_u32(is);
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

    PolicySpec spec;
    spec.kind = static_cast<PolicyKind>(detail::get_u32(is));
    spec.embed_dim = static_cast<int>(detail::get_u32(is));
    spec.edge_hidden = static_cast<int>(detail::get_u32(is));
    spec.gnn_layers = static_cast<int>(detail::get_u32(is));
    spec.key_dim = static_cast<int>(detail::get_u32(is));
    spec.sharpening = detail::get_f64(is);
    const auto fh = detail::get_u32(is);
    spec.fusion_hidden.clear();
    for (std::uint32_t i = 0; i < fh; ++i)
        spec.fusion_hidden.push_back(static_cast<int>(detail::get_u32(is)));

    Policy policy(spec);
    const auto nparams = detail::get_u32(is);
    if (nparams != policy.defs_.size())
        throw std::runtime_error("checkpoint parameter list does not match architecture");
    for (std::size_t i = 0; i < policy.defs_.size(); ++i) {
        const auto name_len = detail::get_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (name != policy.defs_[i].name)
            throw std::runtime_error("checkpoint parameter order mismatch at " + name);
        const auto rows = detail::get_u32(is);
        const auto cols = detail::get_u32(is);
        if (static_cast<int>(rows) != policy.defs_[i].rows ||
            static_cast<int>(cols) != policy.defs_[i].cols)
            throw std::runtime_error("checkpoint shape mismatch at " + name);
        const auto count = detail::get_u64(is);
        policy.values_[i].resize(count);
        is.read(reinterpret_cast<char*>(policy.values_[i].data()),
                static_cast<std::streamsize>(count * sizeof(double)));
    }
    if (!is) throw std::runtime_error("checkpoint truncated: " + path);
    return policy;
}

}  // namespace pinch
