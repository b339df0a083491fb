#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pinch/common.hpp"

namespace pinch {

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline std::string file_digest_hex(const std::string& path) {
    return hex64(fnv1a64(read_file_bytes(path)));
}

/// Records what a command ran with and what it produced. The digest covers
/// everything except the wall-clock duration, so a faithful re-run reproduces
/// the digest along with the numeric outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::string config_text;  // resolved system config echo
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> content digest
    std::vector<std::string> outputs;
    std::int64_t duration_ms = 0;

    void add_input(const std::string& path) { inputs.emplace_back(path, file_digest_hex(path)); }
    void add_output(const std::string& path) { outputs.push_back(path); }

    std::string digest() const {
        std::ostringstream ss;
        ss << command << '\n';
        for (const auto& a : argv) ss << a << '\n';
        ss << config_text << '\n' << seed << '\n';
        for (const auto& [p, d] : inputs) ss << p << ' ' << d << '\n';
        for (const auto& o : outputs) ss << o << '\n';
        return hex64(fnv1a64(ss.str()));
    }

    void write(const std::string& path) const {
        nlohmann::json j;
        j["command"] = command;
        j["argv"] = argv;
        j["config"] = config_text;
        j["seed"] = seed;
        auto inputs_json = nlohmann::json::array();
        for (const auto& [p, d] : inputs) inputs_json.push_back({{"path", p}, {"digest", d}});
        j["inputs"] = inputs_json;
        j["outputs"] = outputs;
        j["digest"] = digest();
        j["duration_ms"] = duration_ms;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write manifest: " + path);
        os << j.dump(2) << "\n";
    }
};

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    std::int64_t elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Two-column plot data with a commented header carrying the manifest digest.
inline void write_plot_file(const std::string& path, const std::string& title,
                            const std::string& manifest_digest, const std::string& x_label,
                            const std::string& y_label,
                            const std::vector<std::pair<double, double>>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write plot file: " + path);
    os << "# " << title << "\n";
    os << "# manifest " << manifest_digest << "\n";
    os << "# columns: " << x_label << " " << y_label << "\n";
    for (const auto& [x, y] : rows) os << fmt17(x) << " " << fmt17(y) << "\n";
    if (!os) throw std::runtime_error("plot write failed: " + path);
}

}  // namespace pinch
