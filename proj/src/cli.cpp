#include "almn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "almn/checkpoint.hpp"
#include "almn/dataset.hpp"
#include "almn/error.hpp"
#include "almn/geometry.hpp"
#include "almn/gradcheck.hpp"
#include "almn/metrics.hpp"
#include "almn/mlp.hpp"
#include "almn/parallel.hpp"
#include "almn/run_config.hpp"
#include "almn/trainer.hpp"

namespace almn {

namespace {

namespace fs = std::filesystem;
constexpr double kDeg = std::numbers::pi / 180.0;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::MalformedFile:
    case ErrorCode::LabelFeatureCountMismatch: return kExitIo;
    case ErrorCode::DivergenceDetected: return kExitDivergence;
    default: return kExitUsage;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Vec parse_vector(const std::string& text, const char* what) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("bad number in ") + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  return out;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (double v : parse_vector(text, "--ks")) {
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw Error(ErrorCode::InvalidArgument, "--ks entries must be positive integers");
    ks.push_back(static_cast<std::size_t>(v));
  }
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

Dataset select_split(const Dataset& ds, DataSplit split) {
  if (split == DataSplit::all) return ds;
  auto [train, test] = split_by_class(ds);
  return split == DataSplit::train ? train : test;
}

// --- gen-data --------------------------------------------------------------

struct GenDataArgs {
  MultimodalSpec spec;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
  const Dataset ds = gen_multimodal(a.spec);
  write_csv(ds, a.out);
  out << "wrote " << ds.size() << " items (" << ds.class_index().size() << " classes, " << ds.feature_dim()
      << " features) to " << a.out << "\n";
  return kExitOk;
}

// --- train -----------------------------------------------------------------

int cmd_train(const std::string& config_path, std::ostream& out) {
  const RunConfig cfg = load_run_config(config_path);
  Dataset data;
  if (!cfg.data_csv.empty()) data = load_csv(cfg.data_csv);
  else if (!cfg.idx_images.empty()) data = load_idx(cfg.idx_images, cfg.idx_labels);
  else throw Error(ErrorCode::InvalidArgument, "config: no data.csv or data.idx_images given");
  const Dataset train_set = select_split(data, cfg.split);

  const fs::path dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "effective_config.ini", cfg.to_ini());

  Trainer trainer(train_set, cfg.train);
  try {
    trainer.run();
  } catch (const Error& e) {
    write_text(dir / "loss_curve.csv", format_loss_curve(trainer.state().loss_curve));
    throw;
  }
  const TrainState& s = trainer.state();
  save_checkpoint(s, dir / "checkpoint.json");
  write_text(dir / "loss_curve.csv", format_loss_curve(s.loss_curve));

  char buf[160];
  std::snprintf(buf, sizeof(buf), "trained %zu iterations on %zu items; first loss %.6f, last loss %.6f\n",
                s.iteration, train_set.size(), s.loss_curve.empty() ? 0.0 : s.loss_curve.front(),
                s.loss_curve.empty() ? 0.0 : s.loss_curve.back());
  out << buf << "outputs in " << dir.string() << "\n";
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string idx_images;
  std::string idx_labels;
  std::string split = "all";
  std::string ks = "1,2,4,8";
  std::size_t clusters = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const TrainState state = load_checkpoint(a.checkpoint);
  Dataset data;
  if (!a.data.empty()) data = load_csv(a.data);
  else if (!a.idx_images.empty() && !a.idx_labels.empty()) data = load_idx(a.idx_images, a.idx_labels);
  else throw Error(ErrorCode::InvalidArgument, "eval needs --data or --idx-images/--idx-labels");
  const Dataset test = select_split(data, parse_data_split(a.split));
  const Matrix emb = forward(state.model, test.features());
  const RetrievalReport report = evaluate_embeddings(emb, test.labels(), parse_ks(a.ks), a.clusters, a.seed);
  if (a.out.empty()) {
    out << report.to_json();
  } else {
    write_text(a.out, report.to_json());
    out << report.to_text();
  }
  return kExitOk;
}

// --- grad-check --------------------------------------------------------------

int cmd_grad_check(const GradCheckOptions& options, const std::string& out_path, std::ostream& out) {
  const GradCheckReport report = run_grad_check(options);
  if (out_path.empty()) {
    out << report.to_json();
  } else {
    write_text(out_path, report.to_json());
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s: %zu trials, max_rel_err %.3e, mean_rel_err %.3e (published form %.3e)\n",
                  report.pass() ? "PASS" : "FAIL", report.trials.size(), report.max_rel_err, report.mean_rel_err,
                  report.published_max_rel_err);
    out << buf;
  }
  return report.pass() ? kExitOk : kExitGradCheckFailed;
}

// --- vpg-inspect ---------------------------------------------------------------

void inspect_one(const Vec& xi, const Vec& center, double theta_nn_deg, double beta, std::ostream& out) {
  if (xi.size() != center.size()) throw Error(ErrorCode::InvalidArgument, "--xi and --center differ in length");
  if (xi.size() < 2) throw Error(ErrorCode::InvalidArgument, "vectors need at least two coordinates");
  const VirtualPoint vp = generate_virtual_point(xi, center, theta_nn_deg * kDeg, beta);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "M=%.6f", vp.ctx.M);
  out << buf << " x_g=(";
  for (std::size_t k = 0; k < vp.x_g.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%s%.6f", k ? "," : "", vp.x_g[k]);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), ") angle(x_g,c)=%.4f", angle_between(vp.x_g, center) / kDeg);
  out << buf;
  std::snprintf(buf, sizeof(buf), " angle(x_i,c)=%.4f\n", angle_between(xi, center) / kDeg);
  out << buf;
}

struct VpgArgs {
  std::string xi, center, csv;
  double theta_nn = 0.0;
  double beta = 1.0;
};

int cmd_vpg_inspect(const VpgArgs& a, std::ostream& out) {
  if (!a.csv.empty()) {
    // Rows: theta_nn_deg, beta, x_1..x_d, c_1..c_d
    std::ifstream in(a.csv);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.csv);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const Vec row = parse_vector(line, "csv row");
      if (row.size() < 6 || (row.size() - 2) % 2 != 0)
        throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) +
                                                  ": expected theta_nn_deg,beta,x_1..x_d,c_1..c_d");
      const std::size_t d = (row.size() - 2) / 2;
      inspect_one(Vec(row.begin() + 2, row.begin() + 2 + static_cast<std::ptrdiff_t>(d)),
                  Vec(row.begin() + 2 + static_cast<std::ptrdiff_t>(d), row.end()), row[0], row[1], out);
    }
    return kExitOk;
  }
  if (a.xi.empty() || a.center.empty())
    throw Error(ErrorCode::InvalidArgument, "vpg-inspect needs --xi and --center, or --csv");
  inspect_one(parse_vector(a.xi, "--xi"), parse_vector(a.center, "--center"), a.theta_nn, a.beta, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_threads_from_env();

  CLI::App app{"Adaptive large margin N-pair embedding toolkit", "almn"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic multimodal dataset as CSV");
  gen_cmd->add_option("--classes", gen.spec.classes, "number of classes")->required();
  gen_cmd->add_option("--subclusters", gen.spec.subclusters_per_class, "modes per class")->required();
  gen_cmd->add_option("--points", gen.spec.points_per_class, "points per class")->required();
  gen_cmd->add_option("--dim", gen.spec.input_dim, "feature dimension")->required();
  gen_cmd->add_option("--spread", gen.spec.spread, "Gaussian sigma around each mode")->required();
  gen_cmd->add_option("--seed", gen.spec.seed, "generator seed")->required();
  gen_cmd->add_option("--out", gen.out, "output CSV path")->required();

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "Train an embedding MLP");
  train_cmd->add_option("--config", config_path, "run configuration (INI)")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint: Recall@K, NMI, pairwise F1");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint file or output directory")->required();
  eval_cmd->add_option("--data", ev.data, "CSV dataset");
  eval_cmd->add_option("--idx-images", ev.idx_images, "IDX image file");
  eval_cmd->add_option("--idx-labels", ev.idx_labels, "IDX label file");
  eval_cmd->add_option("--split", ev.split, "all | train | test (class-disjoint halves)")->capture_default_str();
  eval_cmd->add_option("--ks", ev.ks, "comma-separated K values")->capture_default_str();
  eval_cmd->add_option("--clusters", ev.clusters, "k for k-means (0 = number of labels)")->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed, "k-means seed")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "write the JSON report here instead of stdout");

  GradCheckOptions gc;
  std::string gc_out;
  auto* gc_cmd = app.add_subcommand("grad-check", "Compare the backward pass against finite differences");
  gc_cmd->add_option("--seed", gc.seed)->capture_default_str();
  gc_cmd->add_option("--trials", gc.trials)->capture_default_str();
  gc_cmd->add_option("--dim", gc.dim)->capture_default_str();
  gc_cmd->add_option("--step", gc.h, "central-difference step")->capture_default_str();
  gc_cmd->add_option("--tol", gc.tolerance, "max per-coordinate relative error")->capture_default_str();
  gc_cmd->add_option("--out", gc_out, "write the JSON report here instead of stdout");

  VpgArgs vpg;
  auto* vpg_cmd = app.add_subcommand("vpg-inspect", "Print the virtual point for one configuration");
  vpg_cmd->add_option("--xi", vpg.xi, "comma-separated x_i");
  vpg_cmd->add_option("--center", vpg.center, "comma-separated class center");
  vpg_cmd->add_option("--theta-nn", vpg.theta_nn, "nearest-negative angle in degrees");
  vpg_cmd->add_option("--beta", vpg.beta, "margin strength")->capture_default_str();
  vpg_cmd->add_option("--csv", vpg.csv, "rows of theta_nn_deg,beta,x_1..x_d,c_1..c_d");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen, out);
    if (*train_cmd) return cmd_train(config_path, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*gc_cmd) return cmd_grad_check(gc, gc_out, out);
    if (*vpg_cmd) return cmd_vpg_inspect(vpg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const int code = exit_code_for(e.code());
    if (code == kExitUsage) {
      for (auto* sub : app.get_subcommands()) err << sub->help();
    }
    return code;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace almn
