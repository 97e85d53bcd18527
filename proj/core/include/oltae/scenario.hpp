#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oltae/core_math.hpp"
#include "oltae/estimator.hpp"

namespace oltae {

/// Deterministic random stream: a standard-pinned mt19937_64 with our own
/// uniform/normal mappings so sequences do not depend on the C++ library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();                      ///< in (0, 1]
    double uniform(double lo, double hi);
    double normal();                       ///< standard normal, Box-Muller
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// Constant-rate descent: dual-axis linear velocity plus a single-axis
/// rotation, sampled at fixed frame intervals.
struct TrajectoryConfig {
    std::size_t n_frames = 25;
    Vec3 linear_velocity{1.0, 0.0, 0.5};     // m/s
    Vec3 angular_velocity_axis{0.0, 0.0, 1.0};
    double angular_rate = 0.02;              // rad/s
    double frame_dt = 1.0;                   // seconds
    Pose initial_pose{};                     // frame 0
};

struct Trajectory {
    std::vector<Pose> absolute;  ///< n_frames poses, frame-0 chained forward
    std::vector<Pose> relative;  ///< n_frames - 1 frame-to-frame transforms
};

/// Frame-to-frame relative pose is constant: t_rel = v * dt,
/// q_rel = tan(omega * dt / 2) * axis. Throws InvalidConfig for fewer than
/// two frames, non-positive dt, a zero axis, or |omega * dt| >= pi.
Trajectory generate_trajectory(const TrajectoryConfig& config);

// ---------------------------------------------------------------------------
// Terrain
// ---------------------------------------------------------------------------

/// Seeded Gaussian-crater heightfield standing in for a real landing-site
/// terrain model; only the statistical shape of the correspondences matters
/// to the estimator.
struct TerrainConfig {
    double extent = 200.0;           ///< square side length, meters
    int grid_resolution = 64;        ///< roughness grid cells per side
    int n_craters = 12;
    double crater_depth = 6.0;       ///< maximum depth, meters
    double crater_radius = 18.0;     ///< maximum radius, meters
    double roughness = 0.5;          ///< grid noise amplitude, meters
    double footprint_halfwidth = 50.0;  ///< sensor footprint half-side, meters
    double sensor_altitude = 100.0;     ///< height of the sensor above datum
    std::uint64_t seed = 1;
};

class Terrain {
public:
    explicit Terrain(const TerrainConfig& config);
    /// Surface height at (x, y), craters plus bilinear roughness.
    double height(double x, double y) const;
    const TerrainConfig& config() const { return config_; }

private:
    struct Crater {
        double cx, cy, depth, radius;
    };
    TerrainConfig config_;
    std::vector<Crater> craters_;
    std::vector<double> grid_;  // (res+1)^2 node heights
};

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

enum class SigmaMode { constant, range_scaled };

struct ScenarioFrame {
    std::optional<Pose> truth;  ///< absent for ingested external data
    std::vector<Correspondence> correspondences;
    std::size_t frame_index = 0;
};

/// Samples n_points terrain points in the sensor footprint of frame k,
/// transforms them by the truth pose, and adds per-axis Gaussian noise of
/// standard deviation sigma_j. Points whose image leaves the frame-(k+1)
/// footprint (with margin) are resampled so both frames genuinely see them.
/// range_scaled mode sets sigma_j = sigma * |a_j| / sensor_altitude.
std::vector<Correspondence> sample_correspondences(const Pose& truth, std::size_t n_points,
                                                   const Terrain& terrain, double sigma,
                                                   std::uint64_t seed,
                                                   SigmaMode mode = SigmaMode::constant);

struct ScenarioConfig {
    TrajectoryConfig trajectory;
    TerrainConfig terrain;
    std::size_t n_points = 20;
    double sigma = 0.01;
    SigmaMode sigma_mode = SigmaMode::constant;
    std::uint64_t seed = 7;
};

/// One ScenarioFrame per frame-to-frame transform (n_frames - 1 total),
/// fully determined by (config, seed).
std::vector<ScenarioFrame> generate_scenario(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Correspondence file format `oltae-corr v1` (see docs/file_formats.md)
// ---------------------------------------------------------------------------

/// Parses and validates a correspondence file. Rejects non-finite values,
/// sigma <= 0, and duplicate exact (a, b) pairs within a frame.
std::vector<ScenarioFrame> ingest_correspondences(const std::string& path);

void write_correspondences(const std::vector<ScenarioFrame>& frames, const std::string& path);

/// Truth-pose file `oltae-truth v1`: one `frame q1 q2 q3 t1 t2 t3` line per
/// relative transform.
void write_truth(const std::vector<ScenarioFrame>& frames, const std::string& path);
std::vector<Pose> read_truth(const std::string& path);

}  // namespace oltae
