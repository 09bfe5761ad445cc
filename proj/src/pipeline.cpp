#include "evmesh/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "evmesh/config.hpp"
#include "evmesh/error.hpp"
#include "evmesh/io.hpp"
#include "evmesh/representation.hpp"

namespace evmesh {
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kPipelineKeys = {"scene", "seed", "thresholds", "bins", "mesh", "splat",
                                             "metrics", "intervals", "candidates", "flow", "interval",
                                             "flow_ppm", "out"};
const std::set<std::string> kSceneKeys = {"width", "height", "duration", "motion",
                                          "velocity", "linear", "offset", "generator"};

std::string fmt(double v) { return format_double(v); }

std::string numbered(const char* prefix, std::size_t i, int width, const char* ext) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s%0*zu%s", prefix, width, i, ext);
  return buf;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto start = text.find_first_not_of(" \t", pos);
    if (start == std::string_view::npos) break;
    const auto end = text.find_first_of(" \t", start);
    out.emplace_back(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    pos = end == std::string_view::npos ? text.size() : end;
  }
  return out;
}

MetricOptions parse_metrics(const std::string& text) {
  MetricOptions m;
  m.epe = m.angular = m.outliers = false;
  m.npe_thresholds.clear();
  for (const auto& w : split_words(text)) {
    if (w == "EPE") {
      m.epe = true;
    } else if (w == "AE") {
      m.angular = true;
    } else if (w == "%Out") {
      m.outliers = true;
    } else if (w.size() > 2 && w.ends_with("PE")) {
      const auto n = parse_number_list(std::string_view(w).substr(0, w.size() - 2), "pipeline_config");
      if (n.size() != 1 || !(n[0] >= 0.0)) throw ParseError("pipeline_config", "bad metric '" + w + "'");
      m.npe_thresholds.push_back(n[0]);
    } else {
      throw ParseError("pipeline_config", "unknown metric '" + w + "'");
    }
  }
  return m;
}

Scene with_seed(const Scene& s, std::uint64_t seed) {
  return Scene(s.width(), s.height(), seed, s.motion(), s.duration());
}

const Scene& need_scene(const PipelineConfig& c, const char* stage) {
  if (!c.scene) throw ParameterError(stage, "config has no scene");
  return *c.scene;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("output", "cannot create directory " + dir.string());
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text, const fs::path& base_dir) {
  const auto kv = KeyValues::parse(text, "pipeline_config");
  bool inline_scene = false;
  for (const auto& [key, value] : kv.entries()) {
    if (kSceneKeys.count(key) != 0) {
      inline_scene = true;
    } else if (kPipelineKeys.count(key) == 0) {
      throw ParseError("pipeline_config", "unknown key '" + key + "'");
    }
  }
  const auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

  PipelineConfig c;
  if (kv.has("scene")) {
    if (inline_scene) throw ParseError("pipeline_config", "scene path and inline scene keys are exclusive");
    c.scene = load_scene_config(resolve(kv.require("scene")));
  } else if (inline_scene) {
    c.scene = parse_scene_config(text);
  }
  if (kv.has("seed")) {
    const auto s = kv.integer("seed");
    if (s < 0) throw ParseError("pipeline_config", "seed must be non-negative");
    apply_seed(c, static_cast<std::uint64_t>(s));
  }
  if (kv.has("thresholds")) {
    c.thresholds = kv.numbers("thresholds");
    if (c.thresholds.empty()) throw ParseError("pipeline_config", "thresholds list is empty");
  }
  c.bins = static_cast<int>(kv.integer_or("bins", c.bins));
  if (c.bins < 1) throw ParseError("pipeline_config", "bins must be at least 1");
  if (kv.has("mesh")) {
    const auto m = kv.numbers("mesh");
    if (m.size() != 2 || m[0] < 1 || m[1] < 1 || m[0] != std::floor(m[0]) || m[1] != std::floor(m[1])) {
      throw ParseError("pipeline_config", "mesh needs two positive integers");
    }
    c.mesh = {static_cast<int>(m[0]), static_cast<int>(m[1])};
  }
  if (const auto s = kv.get("splat")) {
    if (*s == "bilinear") {
      c.splat = Splat::kBilinear;
    } else if (*s == "nearest") {
      c.splat = Splat::kNearest;
    } else {
      throw ParseError("pipeline_config", "splat must be bilinear or nearest");
    }
  }
  if (const auto m = kv.get("metrics")) c.metrics = parse_metrics(*m);
  c.intervals = static_cast<int>(kv.integer_or("intervals", 1));
  if (c.intervals < 1) throw ParseError("pipeline_config", "intervals must be at least 1");
  if (const auto list = kv.get("candidates")) {
    for (const auto& w : split_words(*list)) c.candidates.push_back(resolve(w));
  }
  if (const auto f = kv.get("flow")) c.flow = resolve(*f);
  if (kv.has("interval")) {
    const auto t = kv.numbers("interval");
    if (t.size() != 2 || !(t[0] < t[1])) throw ParseError("pipeline_config", "interval needs t_i < t_j");
    c.interval = std::make_pair(t[0], t[1]);
  }
  c.flow_ppm = kv.integer_or("flow_ppm", 0) != 0;
  if (const auto o = kv.get("out")) c.out = resolve(*o);
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  const std::string text = read_file(path);
  return parse_pipeline_config(text, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void apply_seed(PipelineConfig& c, std::uint64_t seed) {
  c.seed = seed;
  if (c.scene) c.scene = with_seed(*c.scene, seed);
}

std::vector<double> sample_times(const Scene& scene, int intervals) {
  if (intervals < 1) throw ParameterError("sample_times", "intervals must be at least 1");
  std::vector<double> all;
  for (int k = 0; k < intervals; ++k) {
    const double a = scene.duration() * k / intervals;
    const double b = k + 1 == intervals ? scene.duration() : scene.duration() * (k + 1) / intervals;
    const auto ts = adaptive_timestamps(scene, a, b);
    all.insert(all.end(), ts.begin() + (k == 0 ? 0 : 1), ts.end());
  }
  return all;
}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : header_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  header_.emplace_back(key, value);
}

void Manifest::add(const std::string& kind, const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& attributes) {
  std::string line = kind + "\t" + path;
  for (const auto& [k, v] : attributes) line += "\t" + k + "=" + v;
  entries_.push_back(std::move(line));
  paths_.push_back(path);
}

std::vector<std::string> Manifest::paths() const { return paths_; }

std::string Manifest::text() const {
  std::string out = "# evmesh manifest\ncommand = " + command_ + "\n";
  for (const auto& [k, v] : header_) out += k + " = " + v + "\n";
  out += "files = " + std::to_string(entries_.size()) + "\n";
  for (const auto& e : entries_) out += e + "\n";
  return out;
}

fs::path Manifest::write(const fs::path& out_dir) const {
  ensure_dir(out_dir);
  const fs::path p = out_dir / ("manifest_" + command_ + ".txt");
  write_file(p, text());
  return p;
}

std::optional<std::string> ManifestEntry::attribute(std::string_view key) const {
  for (const auto& [k, v] : attributes) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<ManifestEntry> read_manifest_entries(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<ManifestEntry> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (line.find('\t') == std::string::npos) continue;
    ManifestEntry e;
    std::size_t field = 0;
    std::size_t p = 0;
    while (p <= line.size()) {
      const auto tab = line.find('\t', p);
      const std::string tok = line.substr(p, tab == std::string::npos ? std::string::npos : tab - p);
      if (field == 0) {
        e.kind = tok;
      } else if (field == 1) {
        e.path = tok;
      } else {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("manifest", "bad attribute '" + tok + "'");
        e.attributes.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
      }
      ++field;
      if (tab == std::string::npos) break;
      p = tab + 1;
    }
    if (field < 2) throw ParseError("manifest", "entry without a path");
    out.push_back(std::move(e));
  }
  return out;
}

Manifest run_gen(const PipelineConfig& c) {
  const Scene& scene = need_scene(c, "gen");
  ensure_dir(c.out / "frames");
  ensure_dir(c.out / "flow");
  Manifest m("gen");
  m.set("seed", std::to_string(scene.texture_seed()));
  m.set("intervals", std::to_string(c.intervals));
  m.set("mesh", std::to_string(c.mesh.cells_x) + " " + std::to_string(c.mesh.cells_y));

  write_file(c.out / "scene.txt", format_scene_config(scene));
  m.add("scene", "scene.txt");

  const auto times = sample_times(scene, c.intervals);
  m.set("frames", std::to_string(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    const std::string rel = numbered("frames/frame_", k, 5, ".pgm");
    write_file(c.out / rel, encode_pgm(render_frame(scene, times[k]).image));
    m.add("frame", rel, {{"t", fmt(times[k])}});
  }

  for (int k = 0; k < c.intervals; ++k) {
    const double a = scene.duration() * k / c.intervals;
    const double b = k + 1 == c.intervals ? scene.duration() : scene.duration() * (k + 1) / c.intervals;
    const DenseFlow flow = flow_between(scene, a, b);
    const std::vector<std::pair<std::string, std::string>> span{{"t_i", fmt(a)}, {"t_j", fmt(b)}};
    const std::string flo = numbered("flow/flow_", static_cast<std::size_t>(k), 3, ".flo");
    write_file(c.out / flo, encode_flo1(flow));
    m.add("flow", flo, span);
    const std::string msh = numbered("flow/mesh_", static_cast<std::size_t>(k), 3, ".msh");
    write_file(c.out / msh, encode_msh1(extract_meshflow(flow, c.mesh)));
    m.add("mesh", msh, span);
    if (c.flow_ppm) {
      const std::string ppm = numbered("flow/flow_", static_cast<std::size_t>(k), 3, ".ppm");
      write_file(c.out / ppm, encode_flow_ppm(flow));
      m.add("flow_color", ppm, span);
    }
  }
  m.write(c.out);
  return m;
}

Manifest run_simulate(const PipelineConfig& c) {
  const Scene& scene = need_scene(c, "simulate");
  ensure_dir(c.out / "events");
  Manifest m("simulate");
  m.set("seed", std::to_string(scene.texture_seed()));
  m.set("bins", std::to_string(c.bins));

  const auto times = sample_times(scene, c.intervals);
  m.set("frames", std::to_string(times.size()));
  const FrameSequence frames = render_sequence(scene, times);
  const auto streams = multi_density_sweep(frames, c.thresholds);

  std::string csv = "threshold,events,density\n";
  for (std::size_t k = 0; k < streams.size(); ++k) {
    const double d = density(voxelize(streams[k], c.bins));
    const std::string rel = numbered("events/events_", k, 2, ".evt");
    write_file(c.out / rel, encode_evt1(streams[k]));
    m.add("events", rel,
          {{"threshold", fmt(c.thresholds[k])}, {"count", std::to_string(streams[k].size())}, {"density", fmt(d)}});
    csv += fmt(c.thresholds[k]) + "," + std::to_string(streams[k].size()) + "," + fmt(d) + "\n";
  }
  write_file(c.out / "simulate.csv", csv);
  m.add("table", "simulate.csv");
  m.write(c.out);
  return m;
}

SelectResult run_select(const PipelineConfig& c) {
  if (c.candidates.empty()) throw ParameterError("select", "no candidate streams configured");
  std::vector<EventStream> streams;
  streams.reserve(c.candidates.size());
  for (const auto& p : c.candidates) streams.push_back(read_evt1(p));

  std::pair<double, double> span;
  if (c.interval) {
    span = *c.interval;
  } else if (c.scene) {
    span = {0.0, c.scene->duration()};
  } else {
    throw ParameterError("select", "need an interval or a scene");
  }
  DenseFlow flow;
  if (c.flow) {
    flow = read_flo1(*c.flow);
  } else {
    flow = flow_between(need_scene(c, "select"), span.first, span.second);
  }

  SelectResult r;
  r.selection = select_best(streams, flow, span.first * 1e6, span.second * 1e6, c.splat);
  ensure_dir(c.out);
  write_file(c.out / "select_scores.csv", scores_csv(r.selection));
  r.manifest.set("selected", std::to_string(r.selection.index));
  r.manifest.set("candidates", std::to_string(streams.size()));
  r.manifest.set("t_i", fmt(span.first));
  r.manifest.set("t_j", fmt(span.second));
  r.manifest.add("scores", "select_scores.csv");
  r.manifest.write(c.out);
  return r;
}

Manifest run_meshflow(const PipelineConfig& c, const fs::path& flow_file) {
  const DenseFlow flow = read_flo1(flow_file);
  const MeshFlow mesh = extract_meshflow(flow, c.mesh);
  ensure_dir(c.out);
  Manifest m("meshflow");
  m.set("mesh", std::to_string(c.mesh.cells_x) + " " + std::to_string(c.mesh.cells_y));
  write_file(c.out / "meshflow.msh", encode_msh1(mesh));
  m.add("mesh", "meshflow.msh", {{"width", std::to_string(flow.width)}, {"height", std::to_string(flow.height)}});
  if (c.flow_ppm) {
    write_file(c.out / "meshflow.ppm", encode_flow_ppm(upsample_bilinear(mesh, flow.height, flow.width)));
    m.add("flow_color", "meshflow.ppm");
  }
  m.write(c.out);
  return m;
}

EvalResult run_eval(const PipelineConfig& c, const fs::path& pred, const fs::path& gt, EvalKind kind,
                    std::optional<std::pair<int, int>> size) {
  EvalResult r;
  const std::string seq = pred.stem().string();
  if (kind == EvalKind::kFlow) {
    r.rows = evaluate_flow(seq, read_flo1(pred), read_flo1(gt), c.metrics);
    r.manifest.set("kind", "flow");
  } else {
    if (!size && c.scene) size = std::make_pair(c.scene->width(), c.scene->height());
    if (!size) throw ParameterError("eval", "meshflow evaluation needs the image size");
    r.rows = evaluate_meshflow(seq, read_msh1(pred), read_msh1(gt), size->second, size->first, c.metrics);
    r.manifest.set("kind", "meshflow");
  }
  ensure_dir(c.out);
  write_file(c.out / "metrics.csv", metrics_csv(r.rows));
  r.manifest.add("metrics", "metrics.csv");
  r.manifest.write(c.out);
  return r;
}

WarpResult run_warp(const PipelineConfig& c, const fs::path& image, const fs::path& ref, const fs::path& motion) {
  const IntensityFrame src{decode_pgm(read_file(image)), 0.0};
  const IntensityFrame target{decode_pgm(read_file(ref)), 0.0};
  if (!src.image.same_shape(target.image)) throw ShapeError("warp", "image and reference differ in size");
  const std::string bytes = read_file(motion);
  DenseFlow flow;
  if (bytes.starts_with("MSH1")) {
    flow = upsample_bilinear(decode_msh1(bytes), src.height(), src.width());
  } else {
    flow = decode_flo1(bytes);
  }
  if (flow.width != src.width() || flow.height != src.height()) throw ShapeError("warp", "flow and image differ in size");

  WarpResult r;
  const IntensityFrame warped = backward_warp(src, flow);
  r.error = alignment_error(target, warped);
  r.identity_error = alignment_error(target, src);
  ensure_dir(c.out);
  write_file(c.out / "warped.pgm", encode_pgm(warped.image));
  write_file(c.out / "alignment.csv",
             "metric,value\nalignment_error," + fmt(r.error) + "\nidentity_error," + fmt(r.identity_error) + "\n");
  r.manifest.add("image", "warped.pgm");
  r.manifest.add("table", "alignment.csv");
  r.manifest.write(c.out);
  return r;
}

Manifest run_subsample(const PipelineConfig& c, const fs::path& events, const fs::path& flow_file, SubsampleMode mode,
                       const SubsampleOptions& options) {
  const EventStream in = read_evt1(events);
  const DenseFlow flow = read_flo1(flow_file);
  const EventStream out = mode == SubsampleMode::kSpatial ? spatial_guided_subsample(in, flow, options)
                                                          : temporal_guided_subsample(in, flow, options);
  ensure_dir(c.out);
  Manifest m("subsample");
  m.set("mode", mode == SubsampleMode::kSpatial ? "spatial" : "temporal");
  m.set("keep_ratio", fmt(options.keep_ratio));
  m.set("tolerance", fmt(options.tolerance));
  write_file(c.out / "subsampled.evt", encode_evt1(out));
  m.add("events", "subsampled.evt", {{"input", std::to_string(in.size())}, {"kept", std::to_string(out.size())}});
  m.write(c.out);
  return m;
}

Manifest run_density(const PipelineConfig& c, const std::vector<fs::path>& files) {
  if (files.empty()) throw ParameterError("density", "no event files given");
  ensure_dir(c.out / "voxels");
  Manifest m("density");
  m.set("bins", std::to_string(c.bins));
  std::string csv = "file,events,density,occupancy\n";
  for (std::size_t k = 0; k < files.size(); ++k) {
    const EventStream s = read_evt1(files[k]);
    const VoxelGrid g = voxelize(s, c.bins);
    const double d = density(g);
    const double occ = occupancy_density(s);
    const std::string rel = numbered("voxels/voxels_", k, 2, ".vox");
    write_file(c.out / rel, encode_vox1(g));
    m.add("voxels", rel, {{"source", files[k].filename().string()}, {"density", fmt(d)}});
    csv += files[k].filename().string() + "," + std::to_string(s.size()) + "," + fmt(d) + "," + fmt(occ) + "\n";
  }
  write_file(c.out / "density.csv", csv);
  m.add("table", "density.csv");
  m.write(c.out);
  return m;
}

}  // namespace evmesh
