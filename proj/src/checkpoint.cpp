#include "almn/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "almn/error.hpp"

namespace almn {

namespace {

using json = nlohmann::ordered_json;

json layers_to_json(const std::vector<DenseLayer>& layers) {
  json arr = json::array();
  for (const auto& layer : layers) {
    json l;
    l["rows"] = layer.weight.rows();
    l["cols"] = layer.weight.cols();
    l["weight"] = std::vector<double>(layer.weight.flat().begin(), layer.weight.flat().end());
    l["bias"] = layer.bias;
    arr.push_back(std::move(l));
  }
  return arr;
}

std::vector<DenseLayer> layers_from_json(const json& arr) {
  std::vector<DenseLayer> layers;
  for (const auto& l : arr) {
    const auto rows = l.at("rows").get<std::size_t>();
    const auto cols = l.at("cols").get<std::size_t>();
    const auto w = l.at("weight").get<std::vector<double>>();
    if (w.size() != rows * cols) throw Error(ErrorCode::MalformedFile, "checkpoint: weight size mismatch");
    DenseLayer layer{Matrix(rows, cols), l.at("bias").get<Vec>()};
    std::copy(w.begin(), w.end(), layer.weight.flat().begin());
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace

std::string serialize_checkpoint(const TrainState& state) {
  json j;
  j["format"] = "almn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["iteration"] = state.iteration;
  j["widths"] = state.model.widths();
  j["layers"] = layers_to_json(state.model.layers());
  j["velocity"] = layers_to_json(state.velocity);
  json centers;
  centers["dim"] = state.centers.dim();
  centers["alpha"] = state.centers.alpha();
  json classes = json::array();
  for (const auto& [label, c] : state.centers.centers()) classes.push_back({{"label", label}, {"center", c}});
  centers["classes"] = std::move(classes);
  j["centers"] = std::move(centers);
  j["rng_state"] = state.rng.state();
  return j.dump() + "\n";
}

TrainState deserialize_checkpoint(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "almn-checkpoint")
      throw Error(ErrorCode::MalformedFile, "not an almn checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorCode::MalformedFile, "unsupported checkpoint version " + j.at("version").dump());
    TrainState s;
    s.iteration = j.at("iteration").get<std::size_t>();
    s.model = MlpModel(layers_from_json(j.at("layers")));
    if (s.model.widths() != j.at("widths").get<std::vector<std::size_t>>())
      throw Error(ErrorCode::MalformedFile, "checkpoint widths disagree with layers");
    s.velocity = layers_from_json(j.at("velocity"));
    const json& c = j.at("centers");
    s.centers = CenterBank(c.at("dim").get<std::size_t>(), c.at("alpha").get<double>());
    for (const auto& e : c.at("classes")) s.centers.set(e.at("label").get<ClassId>(), e.at("center").get<Vec>());
    s.rng.restore(j.at("rng_state").get<std::string>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << serialize_checkpoint(state);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / "checkpoint.json" : path;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

std::string format_loss_curve(const std::vector<double>& curve) {
  std::string out = "iteration,loss\n";
  char buf[64];
  for (std::size_t t = 0; t < curve.size(); ++t) {
    auto res = std::to_chars(buf, buf + sizeof(buf), curve[t]);
    out += std::to_string(t) + "," + std::string(buf, res.ptr) + "\n";
  }
  return out;
}

}  // namespace almn
