#include <fstream>
#include <sstream>

#include "autobid/training.hpp"
#include "json.hpp"

namespace autobid {

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
  nlohmann::json j;
  j["format"] = "autobid-checkpoint";
  j["version"] = 1;
  j["input_dim"] = c.model.input_dim();
  j["hidden"] = c.model.hidden_dim();
  j["spline"] = {{"degree", c.spline.degree}, {"num_grid", c.spline.num_grid}};
  j["normalization"] = {
      {"b_scale", c.norm.b_scale}, {"beta_scale", c.norm.beta_scale}, {"v_scale", c.norm.v_scale},
      {"x_support", c.norm.x_support}};
  j["features"] = {{"count_scale", c.features.count_scale}};
  j["parameters"] = to_vec(c.model.flatten());
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.value("format", "") != "autobid-checkpoint")
    throw std::invalid_argument("checkpoint: not an autobid checkpoint");
  Checkpoint c;
  c.spline.degree = j.at("spline").at("degree").get<int>();
  c.spline.num_grid = j.at("spline").at("num_grid").get<std::size_t>();
  c.spline.basis();  // validates degree and grid
  const auto& n = j.at("normalization");
  c.norm = {n.at("b_scale").get<double>(), n.at("beta_scale").get<double>(),
            n.at("v_scale").get<double>(), n.value("x_support", 1.0)};
  c.features.count_scale = j.at("features").at("count_scale").get<double>();
  c.model = MetaModel::zeros(j.at("input_dim").get<std::size_t>(), j.at("hidden").get<std::size_t>(),
                             c.spline.num_control());
  const auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != c.model.num_parameters())
    throw std::invalid_argument("checkpoint: expected " + std::to_string(c.model.num_parameters()) +
                                " parameters, got " + std::to_string(params.size()));
  c.model.unflatten(Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                      static_cast<Eigen::Index>(params.size())));
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << checkpoint_to_json(checkpoint) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace autobid
