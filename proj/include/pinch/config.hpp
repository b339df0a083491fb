#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pinch/common.hpp"

namespace pinch {

/// Physical constants and geometry of the single-waveguide system.
/// Defaults follow the reference deployment: 50 antennas on a 5 m waveguide
/// at 3 m height over a 10 m x 10 m region, 3 GHz carrier, 40 dB transmit SNR.
struct SystemConfig {
    int n_antennas = 50;
    double waveguide_half_length_m = 2.5;
    double region_half_side_m = 5.0;
    double antenna_height_m = 3.0;
    double carrier_frequency_hz = 3.0e9;
    double effective_refractive_index = 1.4;
    double transmit_snr_db = 40.0;
    std::uint64_t rng_seed = 1;

    double free_space_wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
    double guided_wavelength() const {
        return free_space_wavelength() / effective_refractive_index;
    }
    double transmit_snr_linear() const { return linear_from_db(transmit_snr_db); }

    void validate() const {
        if (n_antennas < 2) throw std::invalid_argument("config: n_antennas must be >= 2");
        if (!(waveguide_half_length_m > 0))
            throw std::invalid_argument("config: waveguide_half_length_m must be > 0");
        if (!(region_half_side_m > 0))
            throw std::invalid_argument("config: region_half_side_m must be > 0");
        if (!(antenna_height_m > 0))
            throw std::invalid_argument("config: antenna_height_m must be > 0");
        if (!(carrier_frequency_hz > 0))
            throw std::invalid_argument("config: carrier_frequency_hz must be > 0");
        if (!(effective_refractive_index >= 1.0))
            throw std::invalid_argument("config: effective_refractive_index must be >= 1");
    }
};

/// Canonical flat key-value rendering; also the digest input.
inline std::string serialize_config(const SystemConfig& c) {
    std::ostringstream os;
    os << "n_antennas " << c.n_antennas << "\n";
    os << "waveguide_half_length_m " << fmt17(c.waveguide_half_length_m) << "\n";
    os << "region_half_side_m " << fmt17(c.region_half_side_m) << "\n";
    os << "antenna_height_m " << fmt17(c.antenna_height_m) << "\n";
    os << "carrier_frequency_hz " << fmt17(c.carrier_frequency_hz) << "\n";
    os << "effective_refractive_index " << fmt17(c.effective_refractive_index) << "\n";
    os << "transmit_snr_db " << fmt17(c.transmit_snr_db) << "\n";
    os << "rng_seed " << c.rng_seed << "\n";
    return os.str();
}

/// Digest of the physical system parameters. Deliberately excludes rng_seed:
/// datasets sampled with different seeds from the same geometry are
/// compatible (train vs validation splits), and each dataset records its own
/// sampling seed separately.
inline std::uint64_t config_digest(const SystemConfig& c) {
    std::ostringstream os;
    os << c.n_antennas << '\n'
       << fmt17(c.waveguide_half_length_m) << '\n'
       << fmt17(c.region_half_side_m) << '\n'
       << fmt17(c.antenna_height_m) << '\n'
       << fmt17(c.carrier_frequency_hz) << '\n'
       << fmt17(c.effective_refractive_index) << '\n'
       << fmt17(c.transmit_snr_db) << '\n';
    return fnv1a64(os.str());
}

/// Parses flat key-value text. Accepts "key value" or "key = value" lines,
/// blank lines, and '#' comments. Unknown keys are rejected.
inline SystemConfig parse_config_text(const std::string& text) {
    SystemConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::string key, eq, value;
        std::istringstream ls(line);
        if (!(ls >> key)) continue;
        if (!(ls >> value)) throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing value");
        if (value == "=" && !(ls >> value))
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": missing value");

        try {
            if (key == "n_antennas")
                c.n_antennas = std::stoi(value);
            else if (key == "waveguide_half_length_m")
                c.waveguide_half_length_m = std::stod(value);
            else if (key == "region_half_side_m")
                c.region_half_side_m = std::stod(value);
            else if (key == "antenna_height_m")
                c.antenna_height_m = std::stod(value);
            else if (key == "carrier_frequency_hz")
                c.carrier_frequency_hz = std::stod(value);
            else if (key == "effective_refractive_index")
                c.effective_refractive_index = std::stod(value);
            else if (key == "transmit_snr_db")
                c.transmit_snr_db = std::stod(value);
            else if (key == "rng_seed")
                c.rng_seed = std::stoull(value);
            else
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value '" + value + "'");
        }
    }
    c.validate();
    return c;
}

inline SystemConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace pinch
