#pragma once

#include <stdexcept>
#include <vector>

#include "pinch/common.hpp"
#include "pinch/config.hpp"

namespace pinch {

struct UserPosition {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

/// True when the user lies in the nominal deployment region
/// x, y in [-L, L], z in [0, 1]. Noisy position estimates may leave the
/// region and are still accepted by the channel computation.
inline bool user_in_region(const SystemConfig& cfg, const UserPosition& u) {
    const double l = cfg.region_half_side_m;
    return u.x >= -l && u.x <= l && u.y >= -l && u.y <= l && u.z >= 0.0 && u.z <= 1.0;
}

/// Uniformly spaced antennas along the waveguide: antenna n sits at
/// x = -D + 2D/(N-1) * n, y = 0, z = H. Index 0 is the feed point.
struct AntennaLayout {
    std::vector<Vec3> positions;
    static constexpr int feed_index = 0;

    int size() const { return static_cast<int>(positions.size()); }

    /// Distance along the waveguide from the feed point to antenna n.
    double waveguide_distance(int n) const {
        return positions[static_cast<std::size_t>(n)].x - positions[0].x;
    }
};

inline AntennaLayout antenna_positions(const SystemConfig& cfg) {
    cfg.validate();  // rejects N < 2: the spacing below divides by N-1
    const int n = cfg.n_antennas;
    const double d = cfg.waveguide_half_length_m;
    const double h = cfg.antenna_height_m;
    const double spacing = 2.0 * d / (n - 1);

    AntennaLayout layout;
    layout.positions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        layout.positions.push_back({-d + spacing * i, 0.0, h});
    }
    return layout;
}

}  // namespace pinch
