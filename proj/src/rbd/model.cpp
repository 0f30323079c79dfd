#include "stride/rbd/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stride::rbd {

void RobotModel::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw std::invalid_argument(std::string("model: ") + name + " must be > 0, got " +
                                  std::to_string(v));
  };
  positive(torso_mass, "torso_mass");
  positive(thigh_mass, "thigh_mass");
  positive(shank_mass, "shank_mass");
  positive(torso_length, "torso_length");
  positive(thigh_length, "thigh_length");
  positive(shank_length, "shank_length");
  positive(torso_com, "torso_com");
  positive(thigh_com, "thigh_com");
  positive(shank_com, "shank_com");
  positive(torso_inertia, "torso_inertia");
  positive(thigh_inertia, "thigh_inertia");
  positive(shank_inertia, "shank_inertia");
  positive(gravity, "gravity");
  if (torso_com + torso_com_offset_z <= 0.0)
    throw std::invalid_argument("model: torso COM offset pushes the COM through the hip");
  for (int i = 0; i < kNumCoords; ++i)
    if (!(q_min[i] < q_max[i]))
      throw std::invalid_argument("model: q_min must be < q_max componentwise");
  for (int i = 0; i < kNumActuators; ++i) {
    if (!(tau_lim[i] > 0.0)) throw std::invalid_argument("model: tau_lim must be > 0");
    if (joint_damping[i] < 0.0) throw std::invalid_argument("model: joint_damping must be >= 0");
    if (armature[i] < 0.0) throw std::invalid_argument("model: armature must be >= 0");
  }
}

namespace {

void read_into(const nlohmann::json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}

void read_into(const nlohmann::json& j, const char* key, Vec4d& out) {
  if (!j.contains(key)) return;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 4)
    throw std::invalid_argument(std::string("model: ") + key + " must be a 4-array");
  for (int i = 0; i < 4; ++i) out[i] = arr[i].get<double>();
}

void read_into(const nlohmann::json& j, const char* key, Vec7d& out) {
  if (!j.contains(key)) return;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != 7)
    throw std::invalid_argument(std::string("model: ") + key + " must be a 7-array");
  for (int i = 0; i < 7; ++i) out[i] = arr[i].get<double>();
}

}  // namespace

RobotModel model_from_json(const nlohmann::json& root) {
  RobotModel m;
  const nlohmann::json& j = root.contains("model") ? root.at("model") : root;
  read_into(j, "torso_mass", m.torso_mass);
  read_into(j, "thigh_mass", m.thigh_mass);
  read_into(j, "shank_mass", m.shank_mass);
  read_into(j, "torso_length", m.torso_length);
  read_into(j, "thigh_length", m.thigh_length);
  read_into(j, "shank_length", m.shank_length);
  read_into(j, "torso_com", m.torso_com);
  read_into(j, "thigh_com", m.thigh_com);
  read_into(j, "shank_com", m.shank_com);
  read_into(j, "torso_inertia", m.torso_inertia);
  read_into(j, "thigh_inertia", m.thigh_inertia);
  read_into(j, "shank_inertia", m.shank_inertia);
  read_into(j, "torso_com_offset_x", m.torso_com_offset_x);
  read_into(j, "torso_com_offset_z", m.torso_com_offset_z);
  read_into(j, "gravity", m.gravity);
  read_into(j, "joint_damping", m.joint_damping);
  read_into(j, "armature", m.armature);
  read_into(j, "q_min", m.q_min);
  read_into(j, "q_max", m.q_max);
  read_into(j, "tau_lim", m.tau_lim);
  m.validate();
  return m;
}

RobotModel model_from_json_text(const std::string& text) {
  return model_from_json(nlohmann::json::parse(text));
}

RobotModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json_text(ss.str());
}

}  // namespace stride::rbd
