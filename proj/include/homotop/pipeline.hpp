#pragma once

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/complexes.hpp"
#include "homotop/dimreduce.hpp"
#include "homotop/embedding.hpp"
#include "homotop/ingest.hpp"
#include "homotop/metrics.hpp"
#include "homotop/persistence.hpp"
#include "homotop/render.hpp"
#include "homotop/stats.hpp"

namespace homotop {

// the "Tak" view: the raw 3-coordinate delay portrait
inline Embedding takens3_view(const TimeSeries& series, int lag,
                              Warnings* warnings = nullptr) {
  Embedding out;
  out.method = "takens3";
  out.params = {{"lag", lag}, {"m", 3}};
  out.coords = takens_embed(series, {3, lag});
  if ((out.coords.rowwise() - out.coords.row(0)).cwiseAbs().maxCoeff() == 0)
    warn(warnings, "takens3: constant series, all points coincide (degenerate "
                   "for rips)");
  return out;
}

struct SetSource {
  std::string label;
  std::string path;
  std::string format = "bonn_dir";       // bonn_dir | csv
  std::string orientation = "columns";   // csv only: columns | rows
};

struct PipelineConfig {
  std::vector<SetSource> sets;
  double rate_hz = kBonnRateHz;
  int channels = 15;
  std::uint64_t seed = 1;
  DelayParams delay{12, 1};
  std::vector<std::string> methods{"takens3", "isomap", "krr",
                                   "fastica", "leim", "tsne"};
  int target_dim = 3;
  // per-method knobs
  int isomap_k = 10;
  int leim_k = 10;
  double leim_sigma = 1.0;
  KernelSpec krr_kernel{KernelSpec::Kind::kGaussian, 1.0};
  double krr_lambda = 1e-3;
  FastIcaOptions fastica;
  TsneParams tsne_params;
  // rips
  int rips_max_dim = 3;
  int rips_max_points = 200;
  double rips_max_scale = 0;  // 0: enclosing-radius heuristic per cloud
  MetricSpec metric;
  int n_perm = 999;
  std::vector<std::string> permutation_methods{"takens3"};
  std::vector<int> homology_dims{1, 2};
  int threads = 0;  // 0: hardware concurrency
  std::string out_dir = "homotop_out";
};

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  if (j.contains("sets"))
    for (const auto& s : j.at("sets")) {
      SetSource src;
      src.label = s.at("label").get<std::string>();
      src.path = s.at("path").get<std::string>();
      src.format = s.value("format", src.format);
      src.orientation = s.value("orientation", src.orientation);
      c.sets.push_back(std::move(src));
    }
  c.rate_hz = j.value("rate_hz", c.rate_hz);
  c.channels = j.value("channels", c.channels);
  c.seed = j.value("seed", c.seed);
  if (j.contains("delay")) {
    c.delay.dim = j.at("delay").value("dim", c.delay.dim);
    c.delay.lag = j.at("delay").value("lag", c.delay.lag);
  }
  if (j.contains("methods"))
    c.methods = j.at("methods").get<std::vector<std::string>>();
  c.target_dim = j.value("target_dim", c.target_dim);
  if (j.contains("method_params")) {
    const auto& mp = j.at("method_params");
    if (mp.contains("isomap")) c.isomap_k = mp.at("isomap").value("k", c.isomap_k);
    if (mp.contains("leim")) {
      c.leim_k = mp.at("leim").value("k", c.leim_k);
      c.leim_sigma = mp.at("leim").value("sigma", c.leim_sigma);
    }
    if (mp.contains("krr")) {
      const auto& krr = mp.at("krr");
      const std::string kernel = krr.value("kernel", std::string("gaussian"));
      c.krr_kernel.kind = kernel == "linear" ? KernelSpec::Kind::kLinear
                                             : KernelSpec::Kind::kGaussian;
      c.krr_kernel.sigma = krr.value("sigma", c.krr_kernel.sigma);
      c.krr_lambda = krr.value("lambda", c.krr_lambda);
    }
    if (mp.contains("fastica")) {
      const auto& ica = mp.at("fastica");
      const std::string contrast =
          ica.value("contrast", std::string("logcosh"));
      if (contrast == "gauss")
        c.fastica.contrast.kind = Contrast::Kind::kGauss;
      else if (contrast == "quartic")
        c.fastica.contrast.kind = Contrast::Kind::kQuartic;
      c.fastica.contrast.alpha = ica.value("alpha", c.fastica.contrast.alpha);
      c.fastica.contrast.sigma = ica.value("sigma", c.fastica.contrast.sigma);
      c.fastica.tol = ica.value("tol", c.fastica.tol);
      c.fastica.max_iter = ica.value("max_iter", c.fastica.max_iter);
    }
    if (mp.contains("tsne")) {
      const auto& ts = mp.at("tsne");
      c.tsne_params.perplexity = ts.value("perplexity", c.tsne_params.perplexity);
      c.tsne_params.eta = ts.value("eta", c.tsne_params.eta);
      c.tsne_params.iterations = ts.value("iterations", c.tsne_params.iterations);
      c.tsne_params.symmetrize = ts.value("symmetrize", c.tsne_params.symmetrize);
    }
  }
  if (j.contains("rips")) {
    const auto& rips = j.at("rips");
    c.rips_max_dim = rips.value("max_dim", c.rips_max_dim);
    c.rips_max_points = rips.value("max_points", c.rips_max_points);
    c.rips_max_scale = rips.value("max_scale", c.rips_max_scale);
  }
  if (j.contains("metric")) {
    const auto& m = j.at("metric");
    const std::string kind = m.value("kind", std::string("bottleneck"));
    c.metric.kind = kind == "wasserstein" ? MetricSpec::Kind::kWasserstein
                                          : MetricSpec::Kind::kBottleneck;
    c.metric.p = m.value("p", c.metric.p);
    c.metric.root = m.value("root", c.metric.root);
  }
  if (j.contains("tests")) {
    c.n_perm = j.at("tests").value("n_perm", c.n_perm);
    if (j.at("tests").contains("permutation_methods"))
      c.permutation_methods =
          j.at("tests").at("permutation_methods").get<std::vector<std::string>>();
  }
  if (j.contains("homology_dims"))
    c.homology_dims = j.at("homology_dims").get<std::vector<int>>();
  c.threads = j.value("threads", c.threads);
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& s : c.sets)
    sets.push_back({{"label", s.label},
                    {"path", s.path},
                    {"format", s.format},
                    {"orientation", s.orientation}});
  return {
      {"sets", sets},
      {"rate_hz", c.rate_hz},
      {"channels", c.channels},
      {"seed", c.seed},
      {"delay", {{"dim", c.delay.dim}, {"lag", c.delay.lag}}},
      {"methods", c.methods},
      {"target_dim", c.target_dim},
      {"method_params",
       {{"isomap", {{"k", c.isomap_k}}},
        {"leim", {{"k", c.leim_k}, {"sigma", c.leim_sigma}}},
        {"krr",
         {{"kernel", c.krr_kernel.name()},
          {"sigma", c.krr_kernel.sigma},
          {"lambda", c.krr_lambda}}},
        {"fastica",
         {{"contrast", c.fastica.contrast.name()},
          {"alpha", c.fastica.contrast.alpha},
          {"sigma", c.fastica.contrast.sigma},
          {"tol", c.fastica.tol},
          {"max_iter", c.fastica.max_iter}}},
        {"tsne",
         {{"perplexity", c.tsne_params.perplexity},
          {"eta", c.tsne_params.eta},
          {"iterations", c.tsne_params.iterations},
          {"symmetrize", c.tsne_params.symmetrize}}}}},
      {"rips",
       {{"max_dim", c.rips_max_dim},
        {"max_points", c.rips_max_points},
        {"max_scale", c.rips_max_scale}}},
      {"metric",
       {{"kind",
         c.metric.kind == MetricSpec::Kind::kBottleneck ? "bottleneck"
                                                        : "wasserstein"},
        {"p", c.metric.p},
        {"root", c.metric.root}}},
      {"tests",
       {{"n_perm", c.n_perm}, {"permutation_methods", c.permutation_methods}}},
      {"homology_dims", c.homology_dims},
      {"threads", c.threads},
      {"out_dir", c.out_dir}};
}

// HOMOTOP_MAX_POINTS overrides the configured subsampling cap
inline int effective_max_points(int configured) {
  if (const char* env = std::getenv("HOMOTOP_MAX_POINTS")) {
    const auto v = parse_double(env);
    if (!v || *v < 1)
      throw validation_error("HOMOTOP_MAX_POINTS must be a positive integer");
    return static_cast<int>(*v);
  }
  return configured;
}

inline const std::vector<std::string> kKnownMethods{
    "takens3", "isomap", "krr", "fastica", "leim", "tsne"};

inline void validate(const PipelineConfig& c) {
  if (c.sets.empty()) throw validation_error("config: no input sets");
  for (const auto& s : c.sets) {
    if (!std::filesystem::exists(s.path))
      throw validation_error("config: path '" + s.path + "' for set '" +
                             s.label + "' does not exist");
    if (s.format != "bonn_dir" && s.format != "csv")
      throw validation_error("config: unknown set format '" + s.format + "'");
  }
  if (c.channels < 1) throw validation_error("config: channels >= 1");
  if (!(c.rate_hz > 0)) throw validation_error("config: rate_hz > 0");
  if (c.delay.dim < 1 || c.delay.lag < 1)
    throw validation_error("config: delay dim and lag must be positive");
  if (c.methods.empty()) throw validation_error("config: no methods");
  for (const auto& m : c.methods)
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) ==
        kKnownMethods.end())
      throw validation_error("config: unknown method '" + m + "'");
  for (const auto& m : c.permutation_methods)
    if (std::find(c.methods.begin(), c.methods.end(), m) == c.methods.end())
      throw validation_error("config: permutation method '" + m +
                             "' not in the roster");
  if (c.target_dim < 1) throw validation_error("config: target_dim >= 1");
  if (c.rips_max_dim < 0 || c.rips_max_dim > kMaxSimplexDim)
    throw validation_error("config: rips.max_dim in {0,1,2,3}");
  if (c.rips_max_points < 2)
    throw validation_error("config: rips.max_points >= 2");
  if (c.rips_max_scale < 0)
    throw validation_error("config: rips.max_scale >= 0");
  if (c.n_perm < 1) throw validation_error("config: tests.n_perm >= 1");
  for (int dim : c.homology_dims)
    if (dim < 0 || dim > c.rips_max_dim - 1)
      throw validation_error(
          "config: homology dim " + std::to_string(dim) +
          " needs rips.max_dim >= " + std::to_string(dim + 1));
  if (c.threads < 0) throw validation_error("config: threads >= 0");
  if (c.out_dir.empty()) throw validation_error("config: out_dir empty");
}

inline std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot hash '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw compute_error("sha256: cannot allocate context");
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.good()) {
    in.read(buf, sizeof(buf));
    EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

struct RunManifest {
  nlohmann::json config;
  std::vector<std::pair<std::string, std::string>> artifacts;  // path, sha256
  std::vector<std::pair<std::string, double>> timings_ms;
  std::string failure;  // empty on success
  std::string version = kVersion;

  nlohmann::json to_json() const {
    nlohmann::json arts = nlohmann::json::array();
    for (const auto& [path, hash] : artifacts)
      arts.push_back({{"path", path}, {"sha256", hash}});
    nlohmann::json times = nlohmann::json::array();
    for (const auto& [stage, ms] : timings_ms)
      times.push_back({{"stage", stage}, {"ms", ms}});
    nlohmann::json j{{"version", version},
                     {"config", config},
                     {"artifacts", arts},
                     {"timings", times}};
    if (!failure.empty()) j["failure"] = failure;
    return j;
  }
};

// every declared artifact must exist with a matching hash
inline void verify_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw io_error("cannot open '" + manifest_path + "'");
  const nlohmann::json j = nlohmann::json::parse(in);
  const auto root = std::filesystem::path(manifest_path).parent_path();
  for (const auto& artifact : j.at("artifacts")) {
    const auto path = root / artifact.at("path").get<std::string>();
    if (!std::filesystem::exists(path))
      throw validation_error("manifest: missing artifact '" + path.string() +
                             "'");
    if (sha256_file(path.string()) != artifact.at("sha256").get<std::string>())
      throw validation_error("manifest: hash mismatch for '" + path.string() +
                             "'");
  }
}

namespace detail {

struct ChannelTask {
  int set_index;
  int channel_index;  // within the selected channels
};

struct ChannelResult {
  // per method, in roster order
  std::vector<PersistenceDiagram> diagrams;
  std::vector<std::string> artifact_paths;
  Warnings warnings;
};

inline Embedding reduce_with_method(const PipelineConfig& c,
                                    const std::string& method,
                                    const TimeSeries& series,
                                    const Eigen::MatrixXd& delay_cloud,
                                    std::uint64_t task_seed,
                                    Warnings* warnings) {
  if (method == "takens3") return takens3_view(series, c.delay.lag, warnings);
  if (method == "isomap")
    return isomap(delay_cloud, {c.isomap_k}, c.target_dim, false, warnings);
  if (method == "krr")
    return krr_reduce(delay_cloud, c.target_dim, c.krr_kernel, c.krr_lambda,
                      warnings);
  if (method == "fastica")
    return fastica_reduce(delay_cloud, c.target_dim, c.fastica, task_seed,
                          warnings);
  if (method == "leim")
    return laplacian_eigenmaps(delay_cloud, {c.leim_k}, c.leim_sigma,
                               c.target_dim, warnings);
  if (method == "tsne")
    return tsne(delay_cloud, c.target_dim, c.tsne_params, task_seed, warnings);
  throw validation_error("unknown method '" + method + "'");
}

inline PersistenceDiagram diagram_of_embedding(const PipelineConfig& c,
                                               const Eigen::MatrixXd& coords,
                                               int max_points,
                                               Warnings* warnings) {
  Eigen::MatrixXd dist = pairwise_distances(coords);
  if (dist.rows() > max_points) {
    const std::vector<int> landmarks = maxmin_landmarks(dist, max_points);
    Eigen::MatrixXd sub(landmarks.size(), landmarks.size());
    for (size_t i = 0; i < landmarks.size(); ++i)
      for (size_t j = 0; j < landmarks.size(); ++j)
        sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            dist(landmarks[i], landmarks[j]);
    dist.swap(sub);
  }
  double scale = c.rips_max_scale;
  if (scale <= 0) scale = default_max_scale(dist);
  if (scale <= 0) scale = 1.0;  // all points coincide
  const FilteredComplex fc = rips_filtration(dist, c.rips_max_dim, scale);
  const int max_hom =
      *std::max_element(c.homology_dims.begin(), c.homology_dims.end());
  return persistence_diagram(fc, max_hom, false, warnings);
}

}  // namespace detail

inline RunManifest run(const PipelineConfig& config) {
  validate(config);
  namespace fs = std::filesystem;
  const auto t_start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.config = config_to_json(config);
  const fs::path out_root(config.out_dir);
  fs::create_directories(out_root);
  std::vector<std::string> artifact_paths;  // relative to out_root
  std::mutex artifact_mutex;
  auto note_artifact = [&](const fs::path& rel) {
    std::lock_guard<std::mutex> lock(artifact_mutex);
    artifact_paths.push_back(rel.generic_string());
  };
  auto stage_clock = [&](const std::string& name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    manifest.timings_ms.emplace_back(
        name, std::chrono::duration<double, std::milli>(t1 - t0).count());
  };

  // ---- ingest + channel selection (sequential; cheap) -------------------
  std::vector<ChannelSet> selected(config.sets.size());
  stage_clock("ingest", [&] {
    for (size_t s = 0; s < config.sets.size(); ++s) {
      const SetSource& src = config.sets[s];
      ChannelSet full;
      full.set_label = src.label;
      if (src.format == "csv") {
        full = load_csv_matrix(src.path,
                               src.orientation == "rows"
                                   ? Orientation::kRowsAreChannels
                                   : Orientation::kColumnsAreChannels,
                               config.rate_hz);
        full.set_label = src.label;
      } else {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(src.path))
          if (entry.is_regular_file()) {
            const auto ext = entry.path().extension().string();
            if (ext == ".txt" || ext == ".TXT" || ext == ".dat")
              files.push_back(entry.path());
          }
        std::sort(files.begin(), files.end());
        if (files.empty())
          throw validation_error("set '" + src.label +
                                 "': no segment files in '" + src.path + "'");
        for (const auto& file : files)
          full.channels.push_back(
              load_bonn_segment(file.string(), config.rate_hz));
      }
      if (static_cast<int>(full.channels.size()) < config.channels)
        throw validation_error(
            "set '" + src.label + "' has " +
            std::to_string(full.channels.size()) + " channels, need " +
            std::to_string(config.channels));
      selected[s] = select_channels(
          full, config.channels,
          derive_seed(config.seed, "channels/" + src.label));
    }
  });

  // ---- per (set, channel) tasks: embed, reduce, rips, persist ----------
  const int max_points = effective_max_points(config.rips_max_points);
  const size_t n_sets = config.sets.size();
  const size_t n_channels = static_cast<size_t>(config.channels);
  const size_t n_methods = config.methods.size();
  std::vector<detail::ChannelResult> results(n_sets * n_channels);
  std::vector<detail::ChannelTask> tasks;
  for (size_t s = 0; s < n_sets; ++s)
    for (size_t ch = 0; ch < n_channels; ++ch)
      tasks.push_back({static_cast<int>(s), static_cast<int>(ch)});

  auto run_task = [&](const detail::ChannelTask& task) {
    const SetSource& src = config.sets[static_cast<size_t>(task.set_index)];
    const TimeSeries& series =
        selected[static_cast<size_t>(task.set_index)]
            .channels[static_cast<size_t>(task.channel_index)];
    detail::ChannelResult& result =
        results[static_cast<size_t>(task.set_index) * n_channels +
                static_cast<size_t>(task.channel_index)];
    char ch_name[16];
    std::snprintf(ch_name, sizeof(ch_name), "ch%02d", task.channel_index);
    const fs::path rel_dir = fs::path(src.label) / ch_name;
    fs::create_directories(out_root / rel_dir);
    std::string stage = "embed";
    std::string method_context;
    try {
      const Eigen::MatrixXd delay_cloud = takens_embed(series, config.delay);
      for (size_t m = 0; m < n_methods; ++m) {
        const std::string& method = config.methods[m];
        method_context = method;
        stage = "reduce";
        const std::uint64_t task_seed = derive_seed(
            config.seed, method + "/" + src.label + "/" + ch_name);
        Embedding embedding = detail::reduce_with_method(
            config, method, series, delay_cloud, task_seed, &result.warnings);
        embedding.params["set"] = src.label;
        embedding.params["channel"] = series.label;
        const fs::path emb_rel = rel_dir / (method + ".csv");
        write_embedding_csv((out_root / emb_rel).string(), embedding);
        note_artifact(emb_rel);
        const fs::path sidecar_rel = rel_dir / (method + ".json");
        write_embedding_sidecar((out_root / sidecar_rel).string(), embedding);
        note_artifact(sidecar_rel);
        stage = "persist";
        const PersistenceDiagram diagram = detail::diagram_of_embedding(
            config, embedding.coords, max_points, &result.warnings);
        const fs::path diag_rel = rel_dir / (method + "_diagram.csv");
        write_diagram_csv((out_root / diag_rel).string(), diagram);
        note_artifact(diag_rel);
        const fs::path bar_rel = rel_dir / (method + "_barcode.svg");
        render_barcode(barcode_of(diagram, default_barcode_cap(diagram)),
                       (out_root / bar_rel).string(),
                       src.label + std::string("/") + ch_name + " " + method);
        note_artifact(bar_rel);
        if (task.channel_index == 0) {
          const fs::path scatter_rel = rel_dir / (method + "_scatter.svg");
          render_scatter3(embedding.coords.leftCols(3),
                          (out_root / scatter_rel).string(),
                          src.label + std::string(" ") + method);
          note_artifact(scatter_rel);
        }
        result.diagrams.push_back(diagram);
      }
    } catch (const std::exception& err) {
      throw compute_error("stage " + stage + ", set " + src.label +
                          ", channel " + ch_name +
                          (method_context.empty()
                               ? std::string()
                               : ", method " + method_context) +
                          ": " + err.what());
    }
  };

  stage_clock("channels", [&] {
    unsigned worker_count = config.threads > 0
                                ? static_cast<unsigned>(config.threads)
                                : std::thread::hardware_concurrency();
    if (worker_count == 0) worker_count = 1;
    worker_count = std::min<unsigned>(worker_count,
                                      static_cast<unsigned>(tasks.size()));
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
      while (true) {
        const size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error) return;
        }
        try {
          run_task(tasks[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < worker_count; ++w) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    if (first_error) {
      // partial artifacts stay on disk; the manifest records the failure
      std::sort(artifact_paths.begin(), artifact_paths.end());
      for (const auto& rel : artifact_paths)
        manifest.artifacts.emplace_back(
            rel, sha256_file((out_root / rel).string()));
      try {
        std::rethrow_exception(first_error);
      } catch (const std::exception& err) {
        manifest.failure = err.what();
        std::ofstream out(out_root / "manifest.json");
        out << manifest.to_json().dump(2) << '\n';
      }
      std::rethrow_exception(first_error);
    }
  });

  // ---- distance tables: per channel, then per-set medians ---------------
  std::vector<std::vector<std::vector<DistanceTable>>> tables(
      config.homology_dims.size());  // [dim][set][channel]
  stage_clock("distances", [&] {
    for (size_t d = 0; d < config.homology_dims.size(); ++d) {
      const int dim = config.homology_dims[d];
      tables[d].resize(n_sets);
      for (size_t s = 0; s < n_sets; ++s) {
        for (size_t ch = 0; ch < n_channels; ++ch) {
          const auto& result = results[s * n_channels + ch];
          std::vector<std::pair<std::string, PersistenceDiagram>> labeled;
          for (size_t m = 0; m < n_methods; ++m)
            labeled.emplace_back(config.methods[m], result.diagrams[m]);
          DistanceTable table = pairwise_table(labeled, dim, config.metric);
          tables[d][s].push_back(table);
          char ch_name[16];
          std::snprintf(ch_name, sizeof(ch_name), "ch%02d",
                        static_cast<int>(ch));
          const fs::path rel = fs::path(config.sets[s].label) / ch_name /
                               ("table_h" + std::to_string(dim) + ".csv");
          write_table_csv((out_root / rel).string(), table);
          note_artifact(rel);
        }
      }
    }
  });

  // ---- per-set figures: distance vs channel + median tables -------------
  stage_clock("figures", [&] {
    for (size_t s = 0; s < n_sets; ++s) {
      const std::string& label = config.sets[s].label;
      std::vector<DistanceSeries> series_by_dim;
      for (size_t d = 0; d < config.homology_dims.size(); ++d) {
        const int dim = config.homology_dims[d];
        DistanceSeries series;
        series.dim = dim;
        Eigen::MatrixXd data(n_channels,
                             n_methods * (n_methods - 1) / 2);
        for (size_t ch = 0; ch < n_channels; ++ch) {
          const std::vector<double> cells =
              upper_triangle(tables[d][s][ch]);
          double median;
          std::vector<double> sorted = cells;
          std::sort(sorted.begin(), sorted.end());
          median = sorted.size() % 2
                       ? sorted[sorted.size() / 2]
                       : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                sorted[sorted.size() / 2]);
          series.values.push_back(median);
          for (size_t cell = 0; cell < cells.size(); ++cell)
            data(static_cast<Eigen::Index>(ch),
                 static_cast<Eigen::Index>(cell)) = cells[cell];
        }
        series_by_dim.push_back(series);
        // the full per-channel, per-pair data behind the figure
        std::vector<std::string> header;
        for (size_t i = 0; i < n_methods; ++i)
          for (size_t j = i + 1; j < n_methods; ++j)
            header.push_back(config.methods[i] + "_vs_" + config.methods[j]);
        const fs::path data_rel =
            fs::path(label) /
            ("distance_series_h" + std::to_string(dim) + ".csv");
        write_matrix_csv((out_root / data_rel).string(), data, header);
        note_artifact(data_rel);
        // Table-1-shaped per-set median table
        const DistanceTable median = median_table(tables[d][s]);
        const fs::path med_rel =
            fs::path(label) / ("median_table_h" + std::to_string(dim) + ".csv");
        write_table_csv((out_root / med_rel).string(), median);
        note_artifact(med_rel);
        const fs::path med_txt_rel =
            fs::path(label) / ("median_table_h" + std::to_string(dim) + ".txt");
        std::ofstream txt(out_root / med_txt_rel);
        txt << format_table_text(median);
        txt.close();
        note_artifact(med_txt_rel);
      }
      const fs::path svg_rel = fs::path(label) / "distance_series.svg";
      render_distance_series(series_by_dim, (out_root / svg_rel).string(),
                             "set " + label + ": median pairwise distance");
      note_artifact(svg_rel);
    }
  });

  // ---- between-set statistics -------------------------------------------
  stage_clock("stats", [&] {
    for (size_t d = 0; d < config.homology_dims.size(); ++d) {
      const int dim = config.homology_dims[d];
      // WMW on the median-table cells, every set pair
      DistanceTable wmw;
      wmw.dim = dim;
      for (size_t s = 0; s < n_sets; ++s)
        wmw.labels.push_back(config.sets[s].label);
      wmw.values.setZero(static_cast<Eigen::Index>(n_sets),
                         static_cast<Eigen::Index>(n_sets));
      for (size_t i = 0; i < n_sets; ++i)
        for (size_t j = i + 1; j < n_sets; ++j) {
          // per-channel medians are summarized across channels by the
          // median table; the WMW compares its off-diagonal cells
          const std::vector<double> a =
              upper_triangle(median_table(tables[d][i]));
          const std::vector<double> b =
              upper_triangle(median_table(tables[d][j]));
          const TestReport report = wilcoxon_mann_whitney(a, b);
          wmw.values(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(j)) = report.p_value;
          wmw.values(static_cast<Eigen::Index>(j),
                     static_cast<Eigen::Index>(i)) = report.p_value;
        }
      const fs::path wmw_rel = "wmw_h" + std::to_string(dim) + ".csv";
      write_table_csv((out_root / wmw_rel).string(), wmw);
      note_artifact(wmw_rel);
      const fs::path wmw_txt_rel = "wmw_h" + std::to_string(dim) + ".txt";
      {
        std::ofstream txt(out_root / wmw_txt_rel);
        txt << format_table_text(wmw);
      }
      note_artifact(wmw_txt_rel);
      // landscape permutation tests between sets, per requested method
      for (const std::string& method : config.permutation_methods) {
        const size_t m = static_cast<size_t>(
            std::find(config.methods.begin(), config.methods.end(), method) -
            config.methods.begin());
        nlohmann::json reports = nlohmann::json::array();
        for (size_t i = 0; i < n_sets; ++i)
          for (size_t j = i + 1; j < n_sets; ++j) {
            std::vector<PersistenceDiagram> ga, gb;
            for (size_t ch = 0; ch < n_channels; ++ch) {
              ga.push_back(results[i * n_channels + ch].diagrams[m]);
              gb.push_back(results[j * n_channels + ch].diagrams[m]);
            }
            TestReport report = permutation_test(
                ga, gb, dim, config.n_perm,
                derive_seed(config.seed, "permtest/" + method + "/" +
                                             config.sets[i].label + "/" +
                                             config.sets[j].label + "/h" +
                                             std::to_string(dim)));
            report.groups = {config.sets[i].label, config.sets[j].label};
            reports.push_back(to_json(report));
          }
        const fs::path perm_rel =
            "permutation_" + method + "_h" + std::to_string(dim) + ".json";
        {
          std::ofstream out(out_root / perm_rel);
          out << reports.dump(2) << '\n';
        }
        note_artifact(perm_rel);
      }
    }
  });

  // ---- manifest ----------------------------------------------------------
  std::sort(artifact_paths.begin(), artifact_paths.end());
  for (const auto& rel : artifact_paths)
    manifest.artifacts.emplace_back(rel,
                                    sha256_file((out_root / rel).string()));
  const auto t_end = std::chrono::steady_clock::now();
  manifest.timings_ms.emplace_back(
      "total", std::chrono::duration<double, std::milli>(t_end - t_start).count());
  {
    std::ofstream out(out_root / "manifest.json");
    if (!out) throw io_error("cannot write manifest");
    out << manifest.to_json().dump(2) << '\n';
  }
  return manifest;
}

}  // namespace homotop
