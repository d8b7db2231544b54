#include "mwsn/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mwsn/error.hpp"

namespace mwsn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void draw_leg(MobilityState& s, const MobilityParams& p, const FieldGeometry& field, RandomStream& stream) {
  s.target = Vec2{stream.uniform(0.0, field.width), stream.uniform(0.0, field.height)};
  s.speed = p.v_min < p.v_max ? stream.uniform(p.v_min, p.v_max) : p.v_max;
  const Vec2 delta = *s.target - s.position;
  const double len = norm(delta);
  s.velocity = len > 0.0 ? delta * (s.speed / len) : Vec2{};
}

double fold_axis(double v, double limit, double& vel, const char* axis) {
  if (v < 0.0) {
    v = -v;
    vel = -vel;
  } else if (v > limit) {
    v = 2.0 * limit - v;
    vel = -vel;
  }
  if (v < 0.0 || v > limit) {
    throw Error(ErrorCode::Config, std::string("overshoot on ") + axis +
                                       " exceeds one reflection; reduce sample_interval or v_max");
  }
  return v;
}

}  // namespace

std::string_view to_string(MobilityModel model) noexcept {
  switch (model) {
    case MobilityModel::RandomWaypoint: return "rwp";
    case MobilityModel::Mass: return "mass";
    case MobilityModel::Linear: return "linear";
  }
  return "unknown";
}

std::optional<MobilityModel> parse_mobility_model(std::string_view text) noexcept {
  if (text == "rwp" || text == "random-waypoint") return MobilityModel::RandomWaypoint;
  if (text == "mass") return MobilityModel::Mass;
  if (text == "linear") return MobilityModel::Linear;
  return std::nullopt;
}

void validate(const MobilityParams& p, const FieldGeometry& field) {
  if (!(field.width > 0.0) || !(field.height > 0.0)) throw Error(ErrorCode::Config, "field dimensions must be > 0");
  if (!(p.v_min >= 0.0) || !(p.v_max >= p.v_min)) throw Error(ErrorCode::Config, "require 0 <= v_min <= v_max");
  if (!(p.sample_interval > 0.0)) throw Error(ErrorCode::Config, "sample_interval must be > 0");
  if (!(p.speed_sigma >= 0.0) || !(p.turn_sigma >= 0.0)) throw Error(ErrorCode::Config, "sigmas must be >= 0");
  if (!(p.pause >= 0.0)) throw Error(ErrorCode::Config, "pause must be >= 0");
  if (!(p.sample_interval * p.v_max < std::min(field.width, field.height))) {
    throw Error(ErrorCode::Config, "sample_interval * v_max must stay below the smaller field dimension");
  }
}

std::vector<Vec2> init_positions(std::size_t n, const FieldGeometry& field, RandomStream& stream) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "init_positions needs at least one node");
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = stream.uniform(0.0, field.width);
    const double y = stream.uniform(0.0, field.height);
    out.push_back({x, y});
  }
  return out;
}

MobilityState init_state(Vec2 position, const MobilityParams& p, const FieldGeometry& field, RandomStream& stream,
                         double shared_heading) {
  MobilityState s;
  s.position = position;
  switch (p.model) {
    case MobilityModel::RandomWaypoint:
      draw_leg(s, p, field, stream);
      break;
    case MobilityModel::Mass: {
      const double heading = stream.uniform(0.0, kTwoPi);
      const double speed = p.v_min < p.v_max ? stream.uniform(p.v_min, p.v_max) : p.v_max;
      s.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
      break;
    }
    case MobilityModel::Linear: {
      const double heading = p.shared_heading ? shared_heading : stream.uniform(0.0, kTwoPi);
      s.velocity = {p.v_max * std::cos(heading), p.v_max * std::sin(heading)};
      break;
    }
  }
  return s;
}

std::pair<Vec2, Vec2> reflect(Vec2 position, Vec2 velocity, const FieldGeometry& field) {
  if (field.contains(position)) return {position, velocity};
  Vec2 pos = position;
  Vec2 vel = velocity;
  pos.x = fold_axis(pos.x, field.width, vel.x, "x");
  pos.y = fold_axis(pos.y, field.height, vel.y, "y");
  return {pos, vel};
}

MobilityState rwp_step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field,
                       RandomStream& stream) {
  MobilityState next = s;
  if (!next.target) {
    draw_leg(next, p, field, stream);
    return next;
  }
  if (next.pause_remaining > 0.0) {
    next.pause_remaining = std::max(0.0, next.pause_remaining - dt);
    next.velocity = {};
    if (next.pause_remaining == 0.0) draw_leg(next, p, field, stream);
    return next;
  }
  const Vec2 delta = *next.target - next.position;
  const double remaining = norm(delta);
  const double advance = next.speed * dt;
  if (remaining <= advance) {
    next.position = *next.target;
    if (p.pause > 0.0) {
      next.pause_remaining = p.pause;
      next.velocity = {};
    } else {
      draw_leg(next, p, field, stream);
    }
    return next;
  }
  next.position = next.position + delta * (advance / remaining);
  next.velocity = delta * (next.speed / remaining);
  return next;
}

MobilityState mass_step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field,
                        RandomStream& stream) {
  MobilityState next = s;
  const double speed = norm(s.velocity);
  const double new_speed = std::clamp(speed + stream.gaussian(0.0, p.speed_sigma), p.v_min, p.v_max);
  const double turn = stream.gaussian(0.0, p.turn_sigma);
  if (new_speed != speed || turn != 0.0) {
    const double heading = std::atan2(s.velocity.y, s.velocity.x) + turn;
    next.velocity = {new_speed * std::cos(heading), new_speed * std::sin(heading)};
  }
  std::tie(next.position, next.velocity) = reflect(next.position + next.velocity * dt, next.velocity, field);
  return next;
}

MobilityState linear_step(const MobilityState& s, const MobilityParams&, double dt, const FieldGeometry& field) {
  MobilityState next = s;
  std::tie(next.position, next.velocity) = reflect(s.position + s.velocity * dt, s.velocity, field);
  return next;
}

MobilityState step(const MobilityState& s, const MobilityParams& p, double dt, const FieldGeometry& field,
                   RandomStream& stream) {
  switch (p.model) {
    case MobilityModel::RandomWaypoint: return rwp_step(s, p, dt, field, stream);
    case MobilityModel::Mass: return mass_step(s, p, dt, field, stream);
    case MobilityModel::Linear: return linear_step(s, p, dt, field);
  }
  return s;
}

}  // namespace mwsn
