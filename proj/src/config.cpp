#include "piston/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "piston/errors.hpp"

namespace piston {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& known) {
  if (!obj.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "must be an object");
  for (const auto& [key, value] : obj.items())
    if (!known.count(key))
      throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
}

std::string path_of(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <class T>
T get(const json& obj, const std::string& where, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path_of(where, key), "has the wrong type");
  }
}

Interval get_interval(const json& obj, const std::string& where, const std::string& key,
                      Interval fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = get<std::vector<double>>(obj, where, key, {});
  if (v.size() != 2 || !(v[0] <= v[1]))
    throw ConfigError(path_of(where, key), "must be [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

SlowMode parse_mode(const std::string& text, const std::string& field) {
  if (text == "hard" || text == "speeds") return SlowMode::HardSpeeds;
  if (text == "soft" || text == "energies") return SlowMode::SoftEnergies;
  throw ConfigError(field, "unknown mode '" + text + "'");
}

void apply_override(json& root, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(item, "override must be key=value");
  const std::string key = item.substr(0, eq);
  const std::string text = item.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json* node = &root;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (!node->is_object()) throw ConfigError(key, "override path crosses a non-object");
    node = &(*node)[path[i]];
    if (node->is_null()) *node = json::object();
  }
  (*node)[path.back()] = value;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  for (const auto& item : overrides) apply_override(root, item);
  reject_unknown(root, "",
                 {"n1", "n2", "masses_left", "masses_right", "epsilon", "delta", "potential",
                  "horizon_T", "seed", "initial", "compact_set", "study", "npiston"});

  RunConfig rc;
  auto& sys = rc.system;
  const auto n1 = get<std::size_t>(root, "", "n1", 1);
  const auto n2 = get<std::size_t>(root, "", "n2", 1);
  sys.masses_left = get<std::vector<double>>(root, "", "masses_left", std::vector<double>(n1, 1.0));
  sys.masses_right =
      get<std::vector<double>>(root, "", "masses_right", std::vector<double>(n2, 1.0));
  if (sys.masses_left.size() != n1) throw ConfigError("masses_left", "length must equal n1");
  if (sys.masses_right.size() != n2) throw ConfigError("masses_right", "length must equal n2");
  sys.epsilon = get<double>(root, "", "epsilon", sys.epsilon);
  sys.delta = get<double>(root, "", "delta", sys.delta);
  sys.potential = get<std::string>(root, "", "potential", sys.potential);
  sys.horizon_T = get<double>(root, "", "horizon_T", sys.horizon_T);
  sys.seed = get<std::uint64_t>(root, "", "seed", sys.seed);
  sys.validate();

  const SlowMode mode = sys.mode();
  rc.compact_set = mode == SlowMode::HardSpeeds ? CompactSet::hard_default()
                                                : CompactSet::soft_default();
  if (root.contains("compact_set")) {
    const auto& cs = root["compact_set"];
    const std::string w = "compact_set";
    reject_unknown(cs, w, {"X_bounds", "W_max", "value_bounds", "mode", "barrier"});
    auto& set = rc.compact_set;
    if (cs.contains("mode")) {
      set.mode = parse_mode(get<std::string>(cs, w, "mode", ""), "compact_set.mode");
      if (set.mode != mode && !cs.contains("value_bounds"))
        set = set.mode == SlowMode::HardSpeeds ? CompactSet::hard_default()
                                               : CompactSet::soft_default();
    }
    set.barrier = get<double>(cs, w, "barrier", set.barrier);
    set.x_bounds = get_interval(cs, w, "X_bounds", set.x_bounds);
    set.w_max = get<double>(cs, w, "W_max", set.w_max);
    set.value_bounds = get_interval(cs, w, "value_bounds", set.value_bounds);
    if (!(set.x_bounds.lo > 0.0 && set.x_bounds.hi < 1.0))
      throw ConfigError("compact_set.X_bounds", "must lie inside (0, 1)");
    if (!(set.value_bounds.lo > 0.0))
      throw ConfigError("compact_set.value_bounds", "must be bounded away from 0");
    if (set.mode == SlowMode::SoftEnergies && !(set.value_bounds.hi < set.barrier))
      throw ConfigError("compact_set.value_bounds", "must stay below the barrier");
    if (!(set.w_max > 0.0)) throw ConfigError("compact_set.W_max", "must be > 0");
  }
  if (sys.soft() && !(sys.delta < 0.5 * rc.compact_set.margin()))
    throw ConfigError("delta", "must be below half the compact-set margin (" +
                                   std::to_string(0.5 * rc.compact_set.margin()) + ")");

  if (root.contains("initial")) {
    const auto& in = root["initial"];
    const std::string w = "initial";
    reject_unknown(in, w, {"X", "W", "left", "right", "mode"});
    SlowState h;
    h.X = get<double>(in, w, "X", 0.5);
    h.W = get<double>(in, w, "W", 0.0);
    h.left = get<std::vector<double>>(in, w, "left", {});
    h.right = get<std::vector<double>>(in, w, "right", {});
    h.mode = parse_mode(get<std::string>(in, w, "mode", "speeds"), "initial.mode");
    if (h.left.size() != sys.n1()) throw ConfigError("initial.left", "length must equal n1");
    if (h.right.size() != sys.n2()) throw ConfigError("initial.right", "length must equal n2");
    if (!(h.X > 0.0 && h.X < 1.0)) throw ConfigError("initial.X", "must lie in (0, 1)");
    for (double v : h.left)
      if (!(v > 0.0)) throw ConfigError("initial.left", "values must be > 0");
    for (double v : h.right)
      if (!(v > 0.0)) throw ConfigError("initial.right", "values must be > 0");
    rc.initial = h;
  }

  if (root.contains("study")) {
    const auto& st = root["study"];
    const std::string w = "study";
    reject_unknown(st, w,
                   {"epsilon_list", "delta_list", "n_phases", "delta_fixed", "samples_per_unit",
                    "steps_per_skin", "rtol", "duration", "phase"});
    auto& s = rc.study;
    s.epsilon_list = get<std::vector<double>>(st, w, "epsilon_list", s.epsilon_list);
    s.delta_list = get<std::vector<double>>(st, w, "delta_list", s.delta_list);
    s.n_phases = get<std::size_t>(st, w, "n_phases", s.n_phases);
    s.delta_fixed = get<double>(st, w, "delta_fixed", s.delta_fixed);
    s.samples_per_unit = get<std::size_t>(st, w, "samples_per_unit", s.samples_per_unit);
    s.steps_per_skin = get<int>(st, w, "steps_per_skin", s.steps_per_skin);
    s.rtol = get<double>(st, w, "rtol", s.rtol);
    s.duration = get<double>(st, w, "duration", s.duration);
    s.phase = get<std::size_t>(st, w, "phase", s.phase);
    if (s.samples_per_unit == 0) throw ConfigError("study.samples_per_unit", "must be >= 1");
    if (s.steps_per_skin < 1) throw ConfigError("study.steps_per_skin", "must be >= 1");
    if (!(s.rtol > 0.0 && s.rtol < 1.0)) throw ConfigError("study.rtol", "must lie in (0, 1)");
    if (!(s.duration >= 0.0)) throw ConfigError("study.duration", "must be >= 0");
  }

  if (root.contains("npiston")) {
    const auto& np = root["npiston"];
    const std::string w = "npiston";
    reject_unknown(np, w, {"X", "W", "Mhat", "speeds", "masses", "T"});
    NPistonConfig c;
    c.state.X = get<std::vector<double>>(np, w, "X", {});
    c.state.W = get<std::vector<double>>(np, w, "W", std::vector<double>(c.state.X.size(), 0.0));
    c.state.Mhat =
        get<std::vector<double>>(np, w, "Mhat", std::vector<double>(c.state.X.size(), 1.0));
    c.state.s = get<std::vector<std::vector<double>>>(np, w, "speeds", {});
    c.state.masses = get<std::vector<std::vector<double>>>(np, w, "masses", {});
    if (c.state.masses.empty())
      for (const auto& row : c.state.s) c.state.masses.emplace_back(row.size(), 1.0);
    c.T = get<double>(np, w, "T", sys.horizon_T);
    try {
      c.state.validate();
    } catch (const DomainError& e) {
      throw ConfigError("npiston", e.what());
    }
    for (std::size_t i = 1; i < c.state.X.size(); ++i)
      if (!(c.state.X[i] > c.state.X[i - 1])) throw ConfigError("npiston.X", "must be increasing");
    if (!(c.T > 0.0)) throw ConfigError("npiston.T", "must be > 0");
    rc.npiston = c;
  }
  return rc;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::string to_json(const RunConfig& rc) {
  json j;
  const auto& s = rc.system;
  j["n1"] = s.n1();
  j["n2"] = s.n2();
  j["masses_left"] = s.masses_left;
  j["masses_right"] = s.masses_right;
  j["epsilon"] = s.epsilon;
  j["delta"] = s.delta;
  j["potential"] = s.potential;
  j["horizon_T"] = s.horizon_T;
  j["seed"] = s.seed;
  const auto& cs = rc.compact_set;
  j["compact_set"] = {{"X_bounds", {cs.x_bounds.lo, cs.x_bounds.hi}},
                      {"W_max", cs.w_max},
                      {"value_bounds", {cs.value_bounds.lo, cs.value_bounds.hi}},
                      {"mode", to_string(cs.mode)},
                      {"barrier", cs.barrier}};
  if (rc.initial) {
    const auto& h = *rc.initial;
    j["initial"] = {{"X", h.X},
                    {"W", h.W},
                    {"left", h.left},
                    {"right", h.right},
                    {"mode", h.mode == SlowMode::HardSpeeds ? "speeds" : "energies"}};
  }
  const auto& st = rc.study;
  j["study"] = {{"epsilon_list", st.epsilon_list}, {"delta_list", st.delta_list},
                {"n_phases", st.n_phases},         {"delta_fixed", st.delta_fixed},
                {"samples_per_unit", st.samples_per_unit},
                {"steps_per_skin", st.steps_per_skin},
                {"rtol", st.rtol},
                {"duration", st.duration},
                {"phase", st.phase}};
  if (rc.npiston) {
    const auto& n = rc.npiston->state;
    j["npiston"] = {{"X", n.X},         {"W", n.W},           {"Mhat", n.Mhat},
                    {"speeds", n.s},    {"masses", n.masses}, {"T", rc.npiston->T}};
  }
  return j.dump(2);
}

}  // namespace piston
