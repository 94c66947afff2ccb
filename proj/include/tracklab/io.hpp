#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tracklab/attack.hpp"
#include "tracklab/metrics.hpp"
#include "tracklab/world.hpp"

namespace tracklab::io {

using nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kScenarioFormat = "tracklab-scenario";

json scenario_to_json(const ScenarioSpec& spec);
// Throws ScenarioError naming the offending field; the result is validated.
ScenarioSpec scenario_from_json(const json& doc);
void save_scenario(const std::filesystem::path& path, const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::filesystem::path& path);

json to_json(const AssociationConfig& cfg);
json to_json(const AttackConfig& cfg);
json to_json(const FrameRecord& rec);
// Histories are included only when asked; they dominate the file size.
json to_json(const AttackTrace& trace, bool with_histories = false);
json to_json(const SuiteReport& report);
json to_json(const TrackHistory& history);

// ---- grid dumps -------------------------------------------------------------
// "TLGRID01", little-endian uint32 header length, JSON header, then
// height x width x channels little-endian doubles in row-major, channel-last order.

inline constexpr char kGridMagic[9] = "TLGRID01";

struct GridDump {
    json header;
    int width = 0;
    int height = 0;
    std::vector<std::string> channels;
    std::vector<double> data;

    double at(int gx, int gy, int ch) const {
        return data[(static_cast<std::size_t>(gy) * width + gx) * channels.size() + ch];
    }
};

// Channels: heat, size_w, size_h, off_x, off_y, feat_l2 (per-cell norm of the
// feature channels) and l2 (per-cell norm over every channel).
GridDump summarize(const GridSet& grids);

void write_grid(std::ostream& out, const GridDump& dump);
GridDump read_grid(std::istream& in);
void write_grid_file(const std::filesystem::path& path, const GridDump& dump);

}  // namespace tracklab::io
