#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracklab/appearance.hpp"
#include "tracklab/detection.hpp"
#include "tracklab/geometry.hpp"
#include "tracklab/grid.hpp"

namespace tracklab {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Waypoint {
    int frame = 1;
    double x = 0.0;  // box center, pixels
    double y = 0.0;
};

struct AgentSpec {
    int id = 0;  // ground-truth identity
    Feature embedding;
    std::vector<Waypoint> waypoints;  // strictly increasing frames
    double width = 0.0;
    double height = 0.0;
    int first_frame = 1;  // presence interval, inclusive
    int last_frame = 1;
};

/// Synthetic world: image geometry, agents and noise. Frames are numbered from 1.
struct ScenarioSpec {
    static constexpr int kVersion = 1;

    std::string name;
    int image_width = 0;
    int image_height = 0;
    int stride = 4;
    int num_frames = 0;
    int feature_dim = 512;
    std::vector<AgentSpec> agents;
    double obs_noise_px = 0.0;    // std of the Gaussian center jitter
    double feat_noise_rad = 0.0;  // std of the per-frame embedding rotation angle
    std::uint64_t seed = 0;

    GridShape grid_shape() const { return {image_width / stride, image_height / stride, stride, feature_dim}; }
};

// Throws ScenarioError describing the first violated invariant.
void validate(const ScenarioSpec& spec);

struct AgentTruth {
    int gt_id = 0;
    BoxTLBR box;
    Feature feature;  // noise-rotated embedding observed this frame
};

struct FrameTruth {
    int frame = 0;
    std::vector<AgentTruth> agents;
};

// Deterministic given spec.seed. Throws ScenarioError when an agent spawns
// overlapping another present agent.
std::vector<FrameTruth> gen_scenario(const ScenarioSpec& spec);

/// Noise-free center of an agent at a frame (linear between waypoints).
Point2 agent_position(const AgentSpec& agent, int frame);

// Templates. Unknown names throw ScenarioError listing the known ones.
struct TemplateOptions {
    std::string name = "crossing";
    std::uint64_t seed = 0;
    int agents = -1;  // crowded/sparse agent count override
    int feature_dim = 512;
};
ScenarioSpec make_template(const TemplateOptions& opts);
const std::vector<std::string>& template_names();

// Heat radius for a w x h object.
double heat_sigma(double w, double h, int stride);

SensorMaps render_maps(const FrameTruth& truth, const GridShape& shape);
// Throws std::invalid_argument on shape mismatch.
SensorMaps apply_perturbation(const SensorMaps& maps, const Perturbation& pert);
std::vector<Detection> decode(const SensorMaps& maps, double det_threshold);
double pert_l2(const GridSet& pert);

/// Ground-truth identity of each detection by IoU >= min_iou one-to-one matching.
void attribute_gt(std::vector<Detection>& dets, const FrameTruth& truth, double min_iou = 0.5);

// MOT-Challenge detection stream.
class MotParseError : public std::runtime_error {
public:
    MotParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

struct DetFrame {
    int frame = 0;
    std::vector<Detection> detections;
};

std::vector<DetFrame> parse_mot_det(std::istream& in);
std::vector<DetFrame> load_mot_det(const std::filesystem::path& path);

/// Deterministic identity embedding for a replayed ground-truth id.
Feature replay_embedding(int gt_id, int dim, std::uint64_t seed);
// Attaches replay embeddings to detections with a known id.
void assign_replay_features(std::vector<DetFrame>& stream, int dim, std::uint64_t seed);
// Turns a replay stream into per-frame truth so it can be rendered and attacked.
std::vector<FrameTruth> replay_truth(const std::vector<DetFrame>& stream, int image_width,
                                     int image_height, int dim, std::uint64_t seed);

}  // namespace tracklab
