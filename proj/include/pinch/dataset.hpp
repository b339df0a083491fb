#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pinch/channel.hpp"
#include "pinch/common.hpp"
#include "pinch/config.hpp"
#include "pinch/parallel.hpp"
#include "pinch/rng.hpp"
#include "pinch/solver.hpp"

namespace pinch {

/// One solver-labeled instance at rest. The channel is stored redundantly as
/// magnitude/phase pairs; it is re-derivable from the user position and the
/// config echoed in the dataset header.
struct InstanceRecord {
    UserPosition user;
    std::vector<double> magnitudes;
    std::vector<double> phases;
    ActivationVector optimal_activation;
    double optimal_snr = 0.0;
    double optimal_rate = 0.0;
    std::uint64_t index = 0;  // position in the (dataset seed, index) path

    ChannelVector channel() const {
        std::vector<std::complex<double>> gains(magnitudes.size());
        for (std::size_t i = 0; i < gains.size(); ++i)
            gains[i] = std::polar(magnitudes[i], phases[i]);
        return ChannelVector(std::move(gains));
    }
};

struct Dataset {
    SystemConfig config;
    std::uint64_t seed = 0;
    std::string solver = "sweep";
    std::vector<InstanceRecord> records;

    std::uint64_t config_hash() const { return config_digest(config); }
    int size() const { return static_cast<int>(records.size()); }
};

inline UserPosition sample_user(const SystemConfig& cfg, std::uint64_t seed, std::uint64_t index) {
    const auto stream = CounterRng(seed).derive(rng_stream::kDatasetUser).derive(index);
    const double l = cfg.region_half_side_m;
    return {stream.uniform(0, -l, l), stream.uniform(1, -l, l), stream.uniform(2, 0.0, 1.0)};
}

/// Labels `count` uniformly sampled users with the exact solver. Instances
/// are keyed by (seed, index), so generation parallelizes and reproduces
/// byte-identically.
inline Dataset generate_dataset(const SystemConfig& cfg, int count, std::uint64_t seed,
                                SolveMethod method = SolveMethod::AngleSweep, int threads = 0) {
    cfg.validate();
    if (count < 0) throw std::invalid_argument("generate_dataset: negative count");
    if (method == SolveMethod::BruteForce && cfg.n_antennas > 25)
        throw std::invalid_argument("generate_dataset: brute force capped at N <= 25");

    Dataset ds;
    ds.config = cfg;
    ds.seed = seed;
    ds.solver = to_string(method);
    ds.records.resize(static_cast<std::size_t>(count));

    const auto layout = antenna_positions(cfg);
    const double rho = cfg.transmit_snr_linear();
    parallel_for(count, threads, [&](int i) {
        const auto idx = static_cast<std::uint64_t>(i);
        InstanceRecord rec;
        rec.index = idx;
        rec.user = sample_user(cfg, seed, idx);
        ChannelVector ch = compute_channel(cfg, layout, rec.user);

        QfSolution sol;
        try {
            switch (method) {
                case SolveMethod::BruteForce: sol = brute_force(ch, rho); break;
                case SolveMethod::Dinkelbach: sol = dinkelbach(ch, {}, subproblem_exact, rho); break;
                case SolveMethod::AngleSweep: sol = angle_sweep_max_ratio(ch, rho); break;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("solver failed on instance " + std::to_string(i) + ": " +
                                     e.what());
        }

        rec.magnitudes.resize(static_cast<std::size_t>(ch.size()));
        rec.phases.resize(static_cast<std::size_t>(ch.size()));
        for (int a = 0; a < ch.size(); ++a) {
            rec.magnitudes[static_cast<std::size_t>(a)] = ch.magnitude(a);
            rec.phases[static_cast<std::size_t>(a)] = ch.phase(a);
        }
        rec.optimal_activation = sol.activation;
        rec.optimal_snr = sol.snr;
        rec.optimal_rate = sol.rate;
        ds.records[static_cast<std::size_t>(i)] = std::move(rec);
    });
    return ds;
}

inline constexpr char kDatasetHeader[] = "pinch-dataset v1";

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!os) throw std::runtime_error("cannot write dataset: " + path);
    os << kDatasetHeader << "\n";
    os << serialize_config(ds.config);
    os << "config_hash " << hex64(ds.config_hash()) << "\n";
    os << "seed " << ds.seed << "\n";
    os << "solver " << ds.solver << "\n";
    os << "count " << ds.records.size() << "\n";
    for (const auto& r : ds.records) {
        os << fmt17(r.user.x) << ' ' << fmt17(r.user.y) << ' ' << fmt17(r.user.z);
        for (std::size_t a = 0; a < r.magnitudes.size(); ++a)
            os << ' ' << fmt17(r.magnitudes[a]) << ' ' << fmt17(r.phases[a]);
        os << ' ' << r.optimal_activation.bitstring() << ' ' << fmt17(r.optimal_snr) << ' '
           << fmt17(r.optimal_rate) << ' ' << r.index << "\n";
    }
    if (!os) throw std::runtime_error("dataset write failed: " + path);
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(is, line) || line != kDatasetHeader)
        throw std::runtime_error("not a pinch dataset: " + path);

    std::ostringstream config_text;
    Dataset ds;
    std::uint64_t declared_hash = 0;
    std::size_t count = 0;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "config_hash") {
            std::string hex;
            ls >> hex;
            declared_hash = std::stoull(hex, nullptr, 16);
        } else if (key == "seed") {
            ls >> ds.seed;
        } else if (key == "solver") {
            ls >> ds.solver;
        } else if (key == "count") {
            ls >> count;
            break;
        } else {
            config_text << line << "\n";
        }
    }
    ds.config = parse_config_text(config_text.str());
    if (config_digest(ds.config) != declared_hash)
        throw std::runtime_error("dataset config hash mismatch: " + path);

    const int n = ds.config.n_antennas;
    ds.records.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        if (!std::getline(is, line))
            throw std::runtime_error("dataset truncated at record " + std::to_string(r));
        std::istringstream ls(line);
        InstanceRecord rec;
        ls >> rec.user.x >> rec.user.y >> rec.user.z;
        rec.magnitudes.resize(static_cast<std::size_t>(n));
        rec.phases.resize(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a)
            ls >> rec.magnitudes[static_cast<std::size_t>(a)] >> rec.phases[static_cast<std::size_t>(a)];
        std::string bits;
        ls >> bits >> rec.optimal_snr >> rec.optimal_rate >> rec.index;
        if (!ls) throw std::runtime_error("malformed dataset record " + std::to_string(r));
        rec.optimal_activation = ActivationVector::from_bitstring(bits);
        if (rec.optimal_activation.size() != n)
            throw std::runtime_error("dataset record has wrong activation length");
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace pinch
