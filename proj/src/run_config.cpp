#include "almn/run_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "almn/error.hpp"

namespace almn {

std::string_view to_string(DataSplit split) {
  switch (split) {
    case DataSplit::train: return "train";
    case DataSplit::test: return "test";
    case DataSplit::all: return "all";
  }
  return "all";
}

DataSplit parse_data_split(std::string_view text) {
  if (text == "train") return DataSplit::train;
  if (text == "test") return DataSplit::test;
  if (text == "all") return DataSplit::all;
  throw Error(ErrorCode::InvalidArgument, "split must be train, test or all");
}

namespace {

std::string key_error(const std::string& key, const std::string& value) {
  return "bad value '" + value + "' for " + key;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw Error(ErrorCode::InvalidArgument, key_error(key, value));
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::InvalidArgument, key_error(key, value));
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (item.empty()) continue;
    out.push_back(parse_number<std::size_t>(key, item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }

  RunConfig cfg;
  TrainConfig& t = cfg.train;
  bool batch_seed_given = false;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw Error(ErrorCode::InvalidArgument, "config: key '" + section + "' outside a section");
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      const std::string v = node.get_value<std::string>();
      if (key == "data.csv") cfg.data_csv = v;
      else if (key == "data.idx_images") cfg.idx_images = v;
      else if (key == "data.idx_labels") cfg.idx_labels = v;
      else if (key == "data.split") cfg.split = parse_data_split(v);
      else if (key == "output.dir") cfg.output_dir = v;
      else if (key == "train.iterations") t.iterations = parse_number<std::size_t>(key, v);
      else if (key == "train.lr") t.lr = parse_number<double>(key, v);
      else if (key == "train.lr_decay_factor") t.lr_decay_factor = parse_number<double>(key, v);
      else if (key == "train.decay_at_iteration") t.decay_at_iteration = parse_number<std::size_t>(key, v);
      else if (key == "train.momentum") t.momentum = parse_number<double>(key, v);
      else if (key == "train.weight_decay") t.weight_decay = parse_number<double>(key, v);
      else if (key == "train.head_lr_multiplier") t.head_lr_multiplier = parse_number<double>(key, v);
      else if (key == "train.hidden") t.hidden = parse_widths(key, v);
      else if (key == "train.embedding_dim") t.embedding_dim = parse_number<std::size_t>(key, v);
      else if (key == "train.center_alpha") t.center_alpha = parse_number<double>(key, v);
      else if (key == "train.center_update") t.center_update = parse_center_schedule(v);
      else if (key == "train.seed") t.seed = parse_number<std::uint64_t>(key, v);
      else if (key == "batch.m") t.batch.m = parse_number<std::size_t>(key, v);
      else if (key == "batch.n") t.batch.n = parse_number<std::size_t>(key, v);
      else if (key == "batch.seed") {
        t.batch.seed = parse_number<std::uint64_t>(key, v);
        batch_seed_given = true;
      } else if (key == "loss.mode") t.loss.mode = parse_margin_mode(v);
      else if (key == "loss.beta") t.loss.beta = parse_number<double>(key, v);
      else if (key == "loss.lambda") t.loss.lambda = parse_number<double>(key, v);
      else if (key == "loss.m_angle") t.loss.m_angle = parse_number<int>(key, v);
      else if (key == "loss.theta_nn_path") t.loss.theta_nn_path = parse_bool(key, v);
      else throw Error(ErrorCode::InvalidArgument, "config: unknown key '" + key + "'");
    }
  }
  if (!batch_seed_given) t.batch.seed = t.seed;
  if (!cfg.data_csv.empty() && !cfg.idx_images.empty())
    throw Error(ErrorCode::InvalidArgument, "config: give either data.csv or data.idx_*, not both");
  if (cfg.idx_images.empty() != cfg.idx_labels.empty())
    throw Error(ErrorCode::InvalidArgument, "config: data.idx_images and data.idx_labels go together");
  t.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string RunConfig::to_ini() const {
  const TrainConfig& t = train;
  std::ostringstream os;
  os << "[data]\n";
  if (!data_csv.empty()) os << "csv = " << data_csv << "\n";
  if (!idx_images.empty()) os << "idx_images = " << idx_images << "\nidx_labels = " << idx_labels << "\n";
  os << "split = " << to_string(split) << "\n\n";
  os << "[output]\ndir = " << output_dir << "\n\n";
  os << "[train]\n"
     << "iterations = " << t.iterations << "\n"
     << "lr = " << fmt(t.lr) << "\n"
     << "lr_decay_factor = " << fmt(t.lr_decay_factor) << "\n"
     << "decay_at_iteration = " << t.effective_decay_at() << "\n"
     << "momentum = " << fmt(t.momentum) << "\n"
     << "weight_decay = " << fmt(t.weight_decay) << "\n"
     << "head_lr_multiplier = " << fmt(t.head_lr_multiplier) << "\n"
     << "hidden = ";
  for (std::size_t i = 0; i < t.hidden.size(); ++i) os << (i ? "," : "") << t.hidden[i];
  os << "\n"
     << "embedding_dim = " << t.embedding_dim << "\n"
     << "center_alpha = " << fmt(t.center_alpha) << "\n"
     << "center_update = " << to_string(t.center_update) << "\n"
     << "seed = " << t.seed << "\n\n";
  os << "[batch]\nm = " << t.batch.m << "\nn = " << t.batch.n << "\nseed = " << t.batch.seed << "\n\n";
  os << "[loss]\nmode = " << to_string(t.loss.mode) << "\nbeta = " << fmt(t.loss.beta)
     << "\nlambda = " << fmt(t.loss.lambda) << "\nm_angle = " << t.loss.m_angle
     << "\ntheta_nn_path = " << (t.loss.theta_nn_path ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace almn
