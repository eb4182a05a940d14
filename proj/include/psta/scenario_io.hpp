#pragma once

// Scenario files (YAML). See docs/scenario-format.md for the schema.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "psta/errors.hpp"
#include "psta/simulation.hpp"

namespace psta {

inline constexpr const char* kScenarioDirEnv = "PSTA_SCENARIO_DIR";

namespace detail {

inline int line_of(const YAML::Node& n) {
  const auto mark = n.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

/// Typed access into a YAML map with dotted-key diagnostics.
class NodeReader {
 public:
  NodeReader(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsMap()) throw ConfigError(path_, line_of(node_), "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_[key].IsDefined() && !node_[key].IsNull(); }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Rejects keys outside `allowed` (catches typos).
  void only(std::initializer_list<const char*> allowed) const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError(key_path(key), line_of(kv.first), "unknown key");
    }
  }

  YAML::Node raw(const std::string& key) const {
    if (!has(key)) throw ConfigError(key_path(key), line_of(node_), "missing required key");
    return node_[key];
  }

  template <typename T>
  T get(const std::string& key) const {
    const YAML::Node n = raw(key);
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(key_path(key), line_of(n), "cannot convert value '" + scalar_text(n) + "'");
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  double number(const std::string& key) const { return get<double>(key); }
  double number_or(const std::string& key, double fallback) const { return get_or<double>(key, fallback); }

  Vec3 vec3(const std::string& key) const {
    const YAML::Node n = raw(key);
    if (!n.IsSequence() || n.size() != 3) throw ConfigError(key_path(key), line_of(n), "expected a list of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
      try {
        v(i) = n[i].as<double>();
      } catch (const YAML::Exception&) {
        throw ConfigError(key_path(key), line_of(n[i]), "cannot convert value '" + scalar_text(n[i]) + "'");
      }
    }
    return v;
  }
  Vec3 vec3_or(const std::string& key, const Vec3& fallback) const { return has(key) ? vec3(key) : fallback; }

  NodeReader child(const std::string& key) const { return NodeReader(raw(key), key_path(key)); }
  std::optional<NodeReader> child_opt(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return child(key);
  }

  int line() const { return line_of(node_); }
  const std::string& path() const { return path_; }
  const YAML::Node& node() const { return node_; }

 private:
  static std::string scalar_text(const YAML::Node& n) { return n.IsScalar() ? n.Scalar() : "<non-scalar>"; }
  YAML::Node node_;
  std::string path_;
};

inline const std::array<const char*, 6> kAxisNames = {"x", "y", "z", "roll", "pitch", "yaw"};
inline const std::array<const char*, 6> kChannelNames = {"force_x",  "force_y",  "force_z",
                                                         "torque_x", "torque_y", "torque_z"};

/// Reads per-axis gain sets: `translation`/`rotation` groups provide
/// defaults, per-axis maps override individual fields. Every field listed
/// in `fields` must resolve for every axis.
template <typename G>
std::array<G, 6> read_axis_gains(const NodeReader& section, std::initializer_list<const char*> fields,
                                 const std::function<double&(G&, const std::string&)>& field_ref) {
  section.only({"translation", "rotation", "x", "y", "z", "roll", "pitch", "yaw"});
  std::array<G, 6> out{};
  for (std::size_t axis = 0; axis < 6; ++axis) {
    const char* group = axis < 3 ? "translation" : "rotation";
    const auto g = section.child_opt(group);
    const auto a = section.child_opt(kAxisNames[axis]);
    if (g) g->only(fields);
    if (a) a->only(fields);
    for (const char* f : fields) {
      double& slot = field_ref(out[axis], f);
      if (a && a->has(f)) {
        slot = a->number(f);
      } else if (g && g->has(f)) {
        slot = g->number(f);
      } else {
        throw ConfigError(section.key_path(std::string(kAxisNames[axis]) + "." + f), section.line(),
                          std::string("missing gain (set it per axis or in the '") + group + "' group)");
      }
    }
  }
  return out;
}

inline ControllerKind parse_kind(const std::string& s, const std::string& key, int line) {
  if (s == "psta") return ControllerKind::Psta;
  if (s == "psmc") return ControllerKind::Psmc;
  if (s == "smc") return ControllerKind::Smc;
  throw ConfigError(key, line, "unknown controller '" + s + "' (expected psta, psmc or smc)");
}

inline SinusoidChannel read_channel(const NodeReader& r) {
  r.only({"amplitude", "frequency", "phase", "offset", "wave"});
  SinusoidChannel c;
  c.amplitude = r.number_or("amplitude", 0.0);
  c.frequency = r.number_or("frequency", 0.0);
  c.phase = r.number_or("phase", 0.0);
  c.offset = r.number_or("offset", 0.0);
  const auto wave = r.get_or<std::string>("wave", "sin");
  if (wave == "sin") {
    c.wave = Wave::Sin;
  } else if (wave == "cos") {
    c.wave = Wave::Cos;
  } else {
    throw ConfigError(r.key_path("wave"), r.line(), "expected 'sin' or 'cos'");
  }
  if (c.frequency < 0.0) throw ConfigError(r.key_path("frequency"), r.line(), "must be >= 0");
  return c;
}

}  // namespace detail

/// Applies one "dot.path=value" override in place. The value is parsed as
/// YAML, so numbers, booleans and [a, b, c] lists are accepted.
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, 0, "override must have the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError(path, 0, std::string("cannot parse override value: ") + e.what());
  }
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  // yaml-cpp Node::operator= assigns through the handle, so every step
  // binds a freshly constructed node instead of reassigning one.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node parent = chain.back();
    if (!parent[parts[i]].IsDefined() || parent[parts[i]].IsNull()) {
      parent[parts[i]] = YAML::Node(YAML::NodeType::Map);
    }
    YAML::Node next = parent[parts[i]];
    if (!next.IsMap()) throw ConfigError(path, detail::line_of(next), "'" + parts[i] + "' is not a mapping");
    chain.push_back(next);
  }
  chain.back()[parts.back()] = value;
}

inline Scenario parse_scenario(const YAML::Node& root) {
  using detail::NodeReader;
  const NodeReader top(root, "");
  top.only({"name", "duration", "plant_dt", "controller_h", "quad", "initial_state", "reference", "disturbance",
            "controller", "actuator_layer"});

  Scenario sc;
  sc.name = top.get_or<std::string>("name", "unnamed");
  sc.duration = top.number("duration");
  sc.plant_dt = top.number("plant_dt");
  sc.controller_h = top.number("controller_h");
  sc.actuator_layer = top.get_or<bool>("actuator_layer", false);

  {
    const auto q = top.child("quad");
    q.only({"mass", "inertia", "arm_length", "thrust_factor", "drag_factor", "gravity"});
    sc.quad.m = q.number("mass");
    sc.quad.J = q.vec3("inertia");
    sc.quad.d = q.number_or("arm_length", sc.quad.d);
    sc.quad.k_b = q.number_or("thrust_factor", sc.quad.k_b);
    sc.quad.k_d = q.number_or("drag_factor", sc.quad.k_d);
    sc.quad.g = q.number_or("gravity", sc.quad.g);
    try {
      sc.quad.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("quad", q.line(), e.what());
    }
  }

  if (const auto init = top.child_opt("initial_state")) {
    init->only({"position", "velocity", "rpy", "angular_velocity"});
    sc.initial.p = init->vec3_or("position", Vec3::Zero());
    sc.initial.v = init->vec3_or("velocity", Vec3::Zero());
    const Vec3 rpy = init->vec3_or("rpy", Vec3::Zero());
    sc.initial.R = from_rpy(rpy.x(), rpy.y(), rpy.z());
    sc.initial.omega = init->vec3_or("angular_velocity", Vec3::Zero());
  }

  {
    const auto ref = top.child("reference");
    const auto type = ref.get<std::string>("type");
    sc.reference.yaw = ref.number_or("yaw", 0.0);
    sc.reference.yaw_rate = ref.number_or("yaw_rate", 0.0);
    if (type == "circle") {
      ref.only({"type", "yaw", "yaw_rate", "center", "radius", "frequency"});
      CircleTrajectory c;
      c.center = ref.vec3_or("center", Vec3::Zero());
      c.radius = ref.number("radius");
      c.frequency = ref.number("frequency");
      sc.reference.shape = c;
    } else if (type == "ellipse") {
      ref.only({"type", "yaw", "yaw_rate", "offset", "cos_amplitude", "sin_amplitude", "frequency"});
      EllipseTrajectory e;
      e.offset = ref.vec3_or("offset", Vec3::Zero());
      e.cos_amplitude = ref.vec3_or("cos_amplitude", Vec3::Zero());
      e.sin_amplitude = ref.vec3_or("sin_amplitude", Vec3::Zero());
      e.frequency = ref.number("frequency");
      sc.reference.shape = e;
    } else if (type == "setpoint") {
      ref.only({"type", "yaw", "yaw_rate", "position"});
      sc.reference.shape = SetpointTrajectory{ref.vec3("position")};
    } else if (type == "table") {
      ref.only({"type", "yaw", "yaw_rate", "samples"});
      const YAML::Node rows = ref.raw("samples");
      if (!rows.IsSequence()) throw ConfigError(ref.key_path("samples"), detail::line_of(rows), "expected a list of [t, x, y, z]");
      TableTrajectory tab;
      for (const auto& row : rows) {
        if (!row.IsSequence() || row.size() != 4) {
          throw ConfigError(ref.key_path("samples"), detail::line_of(row), "each sample must be [t, x, y, z]");
        }
        try {
          tab.t.push_back(row[0].as<double>());
          tab.position.emplace_back(row[1].as<double>(), row[2].as<double>(), row[3].as<double>());
        } catch (const YAML::Exception&) {
          throw ConfigError(ref.key_path("samples"), detail::line_of(row), "non-numeric sample");
        }
      }
      sc.reference.shape = tab;
    } else {
      throw ConfigError(ref.key_path("type"), ref.line(), "unknown trajectory '" + type + "'");
    }
    try {
      sc.reference.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("reference", ref.line(), e.what());
    }
  }

  if (const auto dist = top.child_opt("disturbance")) {
    dist->only({"force_x", "force_y", "force_z", "torque_x", "torque_y", "torque_z", "gates"});
    for (std::size_t i = 0; i < 6; ++i) {
      if (const auto ch = dist->child_opt(detail::kChannelNames[i])) sc.disturbance.channels[i] = detail::read_channel(*ch);
    }
    if (dist->has("gates")) {
      const YAML::Node gates = dist->raw("gates");
      if (!gates.IsSequence()) throw ConfigError(dist->key_path("gates"), detail::line_of(gates), "expected a list of [start, stop]");
      for (const auto& g : gates) {
        if (!g.IsSequence() || g.size() != 2) {
          throw ConfigError(dist->key_path("gates"), detail::line_of(g), "each gate must be [start, stop]");
        }
        const TimeGate gate{g[0].as<double>(), g[1].as<double>()};
        if (!(gate.stop > gate.start)) throw ConfigError(dist->key_path("gates"), detail::line_of(g), "gate stop must exceed start");
        sc.disturbance.gates.push_back(gate);
      }
    }
  }

  {
    const auto c = top.child("controller");
    c.only({"type", "gravity_feedforward", "thrust_max_factor", "omega_d", "psta", "psmc", "smc"});
    sc.gains.kind = detail::parse_kind(c.get<std::string>("type"), c.key_path("type"), c.line());
    sc.options.gravity_feedforward = c.get_or<bool>("gravity_feedforward", true);
    sc.options.thrust_max_factor = c.number_or("thrust_max_factor", 2.0);
    const auto omega_d = c.get_or<std::string>("omega_d", "zero");
    if (omega_d == "zero") {
      sc.options.omega_d_mode = OmegaDesiredMode::Zero;
    } else if (omega_d == "numeric") {
      sc.options.omega_d_mode = OmegaDesiredMode::Numeric;
    } else {
      throw ConfigError(c.key_path("omega_d"), c.line(), "expected 'zero' or 'numeric'");
    }

    if (const auto s = c.child_opt("psta")) {
      sc.gains.psta = detail::read_axis_gains<PstaGains>(
          *s, {"B", "K", "H", "F1", "F2", "F"}, [](PstaGains& g, const std::string& f) -> double& {
            if (f == "B") return g.B;
            if (f == "K") return g.K;
            if (f == "H") return g.H;
            if (f == "F1") return g.F1;
            if (f == "F2") return g.F2;
            return g.F;
          });
    }
    if (const auto s = c.child_opt("psmc")) {
      sc.gains.psmc = detail::read_axis_gains<PsmcGains>(
          *s, {"B", "K", "H", "F"}, [](PsmcGains& g, const std::string& f) -> double& {
            if (f == "B") return g.B;
            if (f == "K") return g.K;
            if (f == "H") return g.H;
            return g.F;
          });
    }
    if (const auto s = c.child_opt("smc")) {
      sc.gains.smc = detail::read_axis_gains<SmcAxisGains>(
          *s, {"H", "lambda", "eta", "F", "boundary_layer"}, [](SmcAxisGains& g, const std::string& f) -> double& {
            if (f == "H") return g.H;
            if (f == "lambda") return g.smc.lambda;
            if (f == "eta") return g.smc.eta;
            if (f == "boundary_layer") return g.smc.boundary_layer;
            return g.smc.F;
          });
    }
    const char* selected = to_string(sc.gains.kind);
    if (!c.has(selected)) {
      throw ConfigError(c.key_path(selected), c.line(), "gains for the selected controller are missing");
    }
  }

  sc.sync_period();
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", 0, e.what());
  }
  return sc;
}

inline YAML::Node load_yaml(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("", 0, "scenario file not found: " + path.string());
  }
  try {
    return YAML::LoadFile(path.string());
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, path.string() + ": " + e.msg);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", 0, path.string() + ": " + e.what());
  }
}

inline Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
  YAML::Node root = load_yaml(path);
  for (const auto& o : overrides) apply_override(root, o);
  try {
    return parse_scenario(root);
  } catch (const ConfigError& e) {
    throw ConfigError(e.key(), e.line(), path.string() + ": " + e.message());
  }
}

/// Resolves a scenario argument: an existing path, the path with ".yaml"
/// appended, or either form under $PSTA_SCENARIO_DIR.
inline std::filesystem::path resolve_scenario_path(const std::string& arg) {
  namespace fs = std::filesystem;
  std::vector<fs::path> candidates{arg, arg + ".yaml"};
  if (const char* dir = std::getenv(kScenarioDirEnv)) {
    candidates.emplace_back(fs::path(dir) / arg);
    candidates.emplace_back(fs::path(dir) / (arg + ".yaml"));
  }
  for (const auto& c : candidates) {
    if (fs::is_regular_file(c)) return c;
  }
  return arg;
}

}  // namespace psta
