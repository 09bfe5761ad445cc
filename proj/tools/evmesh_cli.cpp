#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evmesh/error.hpp"
#include "evmesh/parallel.hpp"
#include "evmesh/pipeline.hpp"

namespace {

using evmesh::PipelineConfig;

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

PipelineConfig load(const Globals& g) {
  PipelineConfig c = g.config.empty() ? PipelineConfig{} : evmesh::load_pipeline_config(g.config);
  if (!g.out.empty()) c.out = g.out;
  if (g.seed) evmesh::apply_seed(c, *g.seed);
  return c;
}

void report(const evmesh::Manifest& m, const PipelineConfig& c) {
  std::printf("%s: wrote %zu files, manifest %s\n", m.command().c_str(), m.paths().size(),
              (c.out / ("manifest_" + m.command() + ".txt")).string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera meshflow toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pipeline config file");
  app.add_option("--out", g.out, "output directory (overrides the config)");
  app.add_option("--seed", g.seed, "texture seed (overrides the config)");
  app.add_option("--threads", g.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);

  auto* gen = app.add_subcommand("gen", "render adaptive frames and ground-truth flow/meshflow");
  auto* sim = app.add_subcommand("simulate", "simulate one event stream per threshold");
  auto* sel = app.add_subcommand("select", "pick the highest-contrast candidate stream");

  auto* mesh = app.add_subcommand("meshflow", "extract meshflow from a FLO1 file");
  std::string mesh_flow;
  mesh->add_option("flow", mesh_flow, "dense flow (FLO1)")->required();

  auto* eval = app.add_subcommand("eval", "flow metrics between a prediction and ground truth");
  std::string eval_pred, eval_gt, eval_kind = "flow";
  std::vector<int> eval_size;
  eval->add_option("pred", eval_pred, "prediction file")->required();
  eval->add_option("gt", eval_gt, "ground-truth file")->required();
  eval->add_option("--kind", eval_kind, "flow | meshflow")->check(CLI::IsMember({"flow", "meshflow"}));
  eval->add_option("--size", eval_size, "W H for meshflow upsampling")->expected(2);

  auto* warp = app.add_subcommand("warp", "backward-warp an image and report alignment error");
  std::string warp_image, warp_ref, warp_motion;
  warp->add_option("image", warp_image, "image to warp (PGM)")->required();
  warp->add_option("ref", warp_ref, "reference image (PGM)")->required();
  warp->add_option("motion", warp_motion, "FLO1 flow or MSH1 mesh")->required();

  auto* sub = app.add_subcommand("subsample", "flow-guided event subsampling");
  std::string sub_events, sub_flow, sub_mode = "spatial";
  evmesh::SubsampleOptions sub_opt;
  sub->add_option("events", sub_events, "event stream (EVT1)")->required();
  sub->add_option("flow", sub_flow, "flow over the stream interval (FLO1)")->required();
  sub->add_option("--mode", sub_mode, "spatial | temporal")->check(CLI::IsMember({"spatial", "temporal"}));
  sub->add_option("--keep", sub_opt.keep_ratio, "keep ratio in (0, 1]");
  sub->add_option("--tolerance", sub_opt.tolerance, "trajectory tolerance in px");

  auto* dens = app.add_subcommand("density", "voxelize streams and report density");
  std::vector<std::string> dens_files;
  dens->add_option("events", dens_files, "event streams (EVT1)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    evmesh::set_thread_count(g.threads);
    const PipelineConfig c = load(g);
    if (gen->parsed()) {
      report(evmesh::run_gen(c), c);
    } else if (sim->parsed()) {
      report(evmesh::run_simulate(c), c);
    } else if (sel->parsed()) {
      const auto r = evmesh::run_select(c);
      std::printf("selected %zu\n", r.selection.index);
      report(r.manifest, c);
    } else if (mesh->parsed()) {
      report(evmesh::run_meshflow(c, mesh_flow), c);
    } else if (eval->parsed()) {
      std::optional<std::pair<int, int>> size;
      if (eval_size.size() == 2) size = std::make_pair(eval_size[0], eval_size[1]);
      const auto kind = eval_kind == "flow" ? evmesh::EvalKind::kFlow : evmesh::EvalKind::kMeshflow;
      const auto r = evmesh::run_eval(c, eval_pred, eval_gt, kind, size);
      std::fputs(evmesh::metrics_csv(r.rows).c_str(), stdout);
    } else if (warp->parsed()) {
      const auto r = evmesh::run_warp(c, warp_image, warp_ref, warp_motion);
      std::printf("alignment_error %.17g\nidentity_error %.17g\n", r.error, r.identity_error);
    } else if (sub->parsed()) {
      const auto mode = sub_mode == "spatial" ? evmesh::SubsampleMode::kSpatial : evmesh::SubsampleMode::kTemporal;
      report(evmesh::run_subsample(c, sub_events, sub_flow, mode, sub_opt), c);
    } else if (dens->parsed()) {
      std::vector<std::filesystem::path> files(dens_files.begin(), dens_files.end());
      report(evmesh::run_density(c, files), c);
    }
  } catch (const evmesh::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.stage().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [internal]: %s\n", e.what());
    return 1;
  }
  return 0;
}
