#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "mwsn/geometry.hpp"
#include "mwsn/random.hpp"

namespace mwsn {

/// Axis-aligned rectangle with its origin at (0, 0).
struct FieldGeometry {
  double width = 1000.0;
  double height = 1000.0;

  bool contains(Vec2 p) const noexcept { return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height; }
  Vec2 center() const noexcept { return {width / 2.0, height / 2.0}; }
};

enum class MobilityModel { RandomWaypoint, Mass, Linear };

std::string_view to_string(MobilityModel model) noexcept;
/// Accepts "rwp", "random-waypoint", "mass", "linear".
std::optional<MobilityModel> parse_mobility_model(std::string_view text) noexcept;

struct MobilityParams {
  MobilityModel model = MobilityModel::RandomWaypoint;
  double v_min = 0.0;
  double v_max = 0.0;
  double pause = 0.0;        // RWP dwell at each waypoint, seconds
  double speed_sigma = 0.5;  // mass: m/s per step
  double turn_sigma = 0.1;   // mass: rad per step
  double sample_interval = 1.0;
  /// Linear model: every node starts on one common heading drawn per run.
  bool shared_heading = true;
};

/// Throws Error(Config) on any violated range, including the fold bound
/// sample_interval * v_max < min(width, height).
void validate(const MobilityParams& p, const FieldGeometry& field);

struct MobilityState {
  Vec2 position;
  Vec2 velocity;
  std::optional<Vec2> target;  // RWP only
  double pause_remaining = 0.0;
  double speed = 0.0;  // RWP leg speed
};

std::vector<Vec2> init_positions(std::size_t n, const FieldGeometry& field, RandomStream& stream);

/// Initial velocity/target for one node. `shared_heading` is the run-wide
/// heading used by the linear model when MobilityParams::shared_heading is set.
MobilityState init_state(Vec2 position, const MobilityParams& p, const FieldGeometry& field, RandomStream& stream,
                         double shared_heading);

/// Mirror-folds a position that overshot the field back inside and negates
/// the matching velocity components. Overshoot beyond one fold is a
/// configuration error (Error(Config)).
std::pair<Vec2, Vec2> reflect(Vec2 position, Vec2 velocity, const FieldGeometry& field);

MobilityState rwp_step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field,
                       RandomStream& stream);
MobilityState mass_step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field,
                        RandomStream& stream);
MobilityState linear_step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field);

/// Dispatches on p.model.
MobilityState step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field,
                   RandomStream& stream);

}  // namespace mwsn
