// homotop: time series -> delay embeddings -> dimension reduction ->
// Vietoris-Rips persistence -> diagram distances and hypothesis tests.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "homotop/homotop.hpp"

using namespace homotop;

namespace {

void print_warnings(const Warnings& warnings) {
  for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

Eigen::MatrixXd load_points(const std::string& path) {
  // accepts either a bare point-per-row CSV or an embedding CSV
  std::ifstream probe(path);
  if (!probe) throw io_error("cannot open '" + path + "'");
  std::string first_line;
  std::getline(probe, first_line);
  probe.close();
  if (first_line.rfind("method,", 0) == 0)
    return read_embedding_csv(path).coords;
  return read_matrix_csv(path).values;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> values;
  for (const auto& cell : split_csv_line(csv)) {
    const auto v = parse_double(cell);
    if (!v) throw validation_error("bad number '" + cell + "'");
    values.push_back(*v);
  }
  return values;
}

MetricSpec metric_from_flags(const std::string& name, double p, bool root) {
  MetricSpec spec;
  if (name == "bottleneck") {
    spec.kind = MetricSpec::Kind::kBottleneck;
  } else if (name == "wasserstein") {
    spec.kind = MetricSpec::Kind::kWasserstein;
    spec.p = p;
    spec.root = root;
  } else {
    throw validation_error("unknown metric '" + name + "'");
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homotop: persistent-homology comparison of dimension "
               "reduction methods on time-series data"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string out_path;
  std::string config_path;
  int threads = 0;
  app.add_option("--seed", seed, "master seed for all randomized stages");
  app.add_option("--out", out_path, "output file or directory");
  app.add_option("--config", config_path, "pipeline config JSON");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  // ---- ingest ------------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "load segments or a CSV matrix, optionally select channels");
  std::string bonn_file, bonn_dir, csv_file, orientation = "columns",
              set_label = "S";
  double rate = kBonnRateHz;
  int select_count = 0;
  ingest->add_option("--bonn", bonn_file, "one segment file, one sample/line");
  ingest->add_option("--bonn-dir", bonn_dir, "directory of segment files");
  ingest->add_option("--csv", csv_file, "numeric CSV matrix");
  ingest->add_option("--orientation", orientation, "columns|rows are channels");
  ingest->add_option("--rate", rate, "sampling rate in Hz");
  ingest->add_option("--select", select_count, "channels to draw (seeded)");
  ingest->add_option("--label", set_label, "set label");

  // ---- embed ---------------------------------------------------------------
  auto* embed = app.add_subcommand(
      "embed", "delay-embed one channel of a channel CSV (or a segment file)");
  std::string embed_input, embed_bonn;
  int channel_index = 0, embed_dim = 12, embed_lag = 1;
  bool run_fnn = false;
  int fnn_max_dim = 15;
  double fnn_ratio_tol = 10.0, fnn_abs_tol = -1.0, fnn_threshold = 0.01;
  embed->add_option("--csv", embed_input, "channel CSV (columns=channels)");
  embed->add_option("--bonn", embed_bonn, "segment file instead of CSV");
  embed->add_option("--channel", channel_index, "channel index (0-based)");
  embed->add_option("--dim", embed_dim, "embedding dimension d");
  embed->add_option("--lag", embed_lag, "delay in samples");
  embed->add_flag("--fnn", run_fnn, "estimate d by false nearest neighbors");
  embed->add_option("--fnn-max-dim", fnn_max_dim, "largest d to scan");
  embed->add_option("--fnn-ratio-tol", fnn_ratio_tol, "distance-ratio tolerance");
  embed->add_option("--fnn-abs-tol", fnn_abs_tol,
                    "absolute tolerance (default 2x signal std)");
  embed->add_option("--fnn-threshold", fnn_threshold,
                    "false-neighbor fraction cutoff");

  // ---- reduce --------------------------------------------------------------
  auto* reduce = app.add_subcommand("reduce",
                                    "apply a dimension-reduction method");
  std::string reduce_points, method = "isomap";
  int target_dim = 3, k_neighbors = 10;
  double sigma = 1.0, lambda = 1e-3, epsilon = 0.0;
  std::string kernel = "gaussian", contrast = "logcosh";
  double alpha = 1.0, perplexity = 30.0, eta = 100.0;
  int iterations = 500;
  bool symmetrize = false, largest_component = false;
  reduce->add_option("--points", reduce_points, "point cloud CSV")->required();
  reduce->add_option("--method", method,
                     "isomap|krr|fastica|leim|tsne|mds");
  reduce->add_option("--m", target_dim, "target dimension");
  reduce->add_option("--k", k_neighbors, "neighbor count (isomap/leim)");
  reduce->add_option("--epsilon", epsilon, "neighbor ball radius (0 = off)");
  reduce->add_option("--sigma", sigma, "gaussian bandwidth (leim/krr kernel)");
  reduce->add_option("--lambda", lambda, "ridge penalty (krr)");
  reduce->add_option("--kernel", kernel, "linear|gaussian (krr)");
  reduce->add_option("--contrast", contrast, "logcosh|gauss|quartic (fastica)");
  reduce->add_option("--alpha", alpha, "logcosh contrast parameter");
  reduce->add_option("--perplexity", perplexity, "tsne perplexity");
  reduce->add_option("--eta", eta, "tsne learning rate");
  reduce->add_option("--iterations", iterations, "tsne iterations");
  reduce->add_flag("--symmetrize", symmetrize,
                   "tsne: conventional symmetrized affinities");
  reduce->add_flag("--largest-component", largest_component,
                   "isomap: keep the largest component instead of failing");

  // ---- rips ----------------------------------------------------------------
  auto* rips = app.add_subcommand("rips", "build a Vietoris-Rips filtration");
  std::string rips_points, rips_distances;
  int rips_max_dim = 3, rips_max_points = 200;
  double rips_max_scale = 0.0;
  rips->add_option("--points", rips_points, "point cloud CSV");
  rips->add_option("--distances", rips_distances, "distance matrix CSV");
  rips->add_option("--max-dim", rips_max_dim, "largest simplex dimension");
  rips->add_option("--max-scale", rips_max_scale,
                   "scale bound (0 = half max pairwise distance)");
  rips->add_option("--max-points", rips_max_points,
                   "maxmin landmark cap before rips");

  // ---- persist ---------------------------------------------------------------
  auto* persist =
      app.add_subcommand("persist", "compute a persistence diagram");
  std::string persist_filtration, persist_points;
  int max_hom_dim = 2;
  bool keep_zero = false;
  int persist_max_dim = 3, persist_max_points = 200;
  double persist_max_scale = 0.0;
  persist->add_option("--filtration", persist_filtration,
                      "filtration text file");
  persist->add_option("--points", persist_points,
                      "point cloud CSV (rips is built first)");
  persist->add_option("--max-hom-dim", max_hom_dim, "largest homology dim");
  persist->add_flag("--keep-zero", keep_zero, "keep zero-persistence pairs");
  persist->add_option("--max-dim", persist_max_dim, "rips simplex dimension");
  persist->add_option("--max-scale", persist_max_scale, "rips scale (0=auto)");
  persist->add_option("--max-points", persist_max_points, "landmark cap");

  // ---- dist ----------------------------------------------------------------
  auto* dist = app.add_subcommand(
      "dist", "pairwise distances between persistence diagrams");
  std::vector<std::string> diagram_paths;
  std::string labels_csv, metric_name = "bottleneck";
  int dist_dim = 1;
  double wasserstein_p = 2.0;
  bool wasserstein_root = false;
  dist->add_option("diagrams", diagram_paths, "diagram CSV files")
      ->expected(-2);
  dist->add_option("--labels", labels_csv, "comma-separated labels");
  dist->add_option("--dim", dist_dim, "homology dimension");
  dist->add_option("--metric", metric_name, "bottleneck|wasserstein");
  dist->add_option("--p", wasserstein_p, "wasserstein order");
  dist->add_flag("--root", wasserstein_root, "return the p-th root");

  // ---- stats ---------------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "hypothesis tests");
  stats->require_subcommand(1);
  auto* wmw = stats->add_subcommand(
      "wmw", "two-sided Wilcoxon-Mann-Whitney on two samples");
  std::string sample_a, sample_b;
  wmw->add_option("--a", sample_a, "comma-separated sample A")->required();
  wmw->add_option("--b", sample_b, "comma-separated sample B")->required();
  auto* perm = stats->add_subcommand(
      "perm", "landscape permutation test between diagram groups");
  std::vector<std::string> group_a, group_b;
  int perm_dim = 1, n_perm = 999;
  perm->add_option("--group-a", group_a, "diagram CSVs")->required();
  perm->add_option("--group-b", group_b, "diagram CSVs")->required();
  perm->add_option("--dim", perm_dim, "homology dimension");
  perm->add_option("--n-perm", n_perm, "permutation count");
  auto* median = stats->add_subcommand(
      "median", "cell-wise median of distance tables");
  std::vector<std::string> table_paths;
  median->add_option("tables", table_paths, "table CSVs")->expected(-1);

  // ---- plot ----------------------------------------------------------------
  auto* plot = app.add_subcommand("plot", "render an SVG figure");
  std::string kind = "barcode", plot_input;
  double cap = 0.0;
  plot->add_option("--kind", kind,
                   "barcode|diagram|scatter3|distance-series");
  plot->add_option("--input", plot_input, "payload file")->required();
  plot->add_option("--cap", cap, "essential-bar cap (0 = 1.05x max death)");

  // ---- run -----------------------------------------------------------------
  auto* run_cmd =
      app.add_subcommand("run", "full pipeline from a JSON config");
  bool verify_only = false;
  std::string verify_manifest_path;
  run_cmd->add_flag("--verify", verify_only,
                    "verify the manifest of a finished run instead");
  run_cmd->add_option("--manifest", verify_manifest_path,
                      "manifest to verify (with --verify)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  Warnings warnings;
  try {
    if (*ingest) {
      ChannelSet set;
      if (!bonn_file.empty()) {
        set.set_label = set_label;
        set.channels.push_back(load_bonn_segment(bonn_file, rate));
      } else if (!bonn_dir.empty()) {
        set.set_label = set_label;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(bonn_dir))
          if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files)
          set.channels.push_back(load_bonn_segment(file.string(), rate));
        if (set.channels.empty())
          throw validation_error("no files in '" + bonn_dir + "'");
      } else if (!csv_file.empty()) {
        set = load_csv_matrix(csv_file,
                              orientation == "rows"
                                  ? Orientation::kRowsAreChannels
                                  : Orientation::kColumnsAreChannels,
                              rate);
        set.set_label = set_label;
      } else {
        throw validation_error("ingest: need --bonn, --bonn-dir or --csv");
      }
      if (select_count > 0)
        set = select_channels(set, select_count,
                              derive_seed(seed, "channels/" + set.set_label));
      if (out_path.empty()) throw validation_error("ingest: need --out");
      write_channelset_csv(out_path, set);
      std::printf("wrote %zu channels x %d samples to %s\n",
                  set.channels.size(), set.channels.front().length(),
                  out_path.c_str());
    } else if (*embed) {
      TimeSeries series;
      if (!embed_bonn.empty()) {
        series = load_bonn_segment(embed_bonn, rate);
      } else if (!embed_input.empty()) {
        const ChannelSet set = load_csv_matrix(
            embed_input, Orientation::kColumnsAreChannels, rate);
        if (channel_index < 0 ||
            channel_index >= static_cast<int>(set.channels.size()))
          throw validation_error("embed: channel index out of range");
        series = set.channels[static_cast<size_t>(channel_index)];
      } else {
        throw validation_error("embed: need --csv or --bonn");
      }
      if (run_fnn) {
        const FnnResult fnn = false_nearest_neighbors(
            series, fnn_max_dim, embed_lag, fnn_ratio_tol, fnn_abs_tol,
            fnn_threshold);
        if (!fnn.plateau_found)
          warnings.push_back("fnn: no plateau below the threshold; reporting "
                             "max_dim");
        std::printf("estimated_dim,%d\n", fnn.estimated_dim);
        for (size_t d = 0; d < fnn.fractions.size(); ++d)
          std::printf("fnn_fraction_d%zu,%s\n", d + 1,
                      format_double(fnn.fractions[d]).c_str());
      }
      const PointCloud cloud =
          takens_embed(series, {embed_dim, embed_lag});
      if (!out_path.empty()) {
        write_matrix_csv(out_path, cloud);
        std::printf("wrote %lld points x %d dims to %s\n",
                    static_cast<long long>(cloud.rows()), embed_dim,
                    out_path.c_str());
      }
    } else if (*reduce) {
      const Eigen::MatrixXd cloud = load_points(reduce_points);
      NeighborhoodParams nbr{k_neighbors,
                             epsilon > 0
                                 ? epsilon
                                 : std::numeric_limits<double>::infinity()};
      Embedding embedding;
      if (method == "isomap") {
        embedding = isomap(cloud, nbr, target_dim, largest_component,
                           &warnings);
      } else if (method == "mds") {
        embedding =
            classical_mds(pairwise_distances(cloud), target_dim, &warnings);
      } else if (method == "leim") {
        embedding =
            laplacian_eigenmaps(cloud, nbr, sigma, target_dim, &warnings);
      } else if (method == "krr") {
        const KernelSpec spec{kernel == "linear" ? KernelSpec::Kind::kLinear
                                                 : KernelSpec::Kind::kGaussian,
                              sigma};
        embedding = krr_reduce(cloud, target_dim, spec, lambda, &warnings);
      } else if (method == "fastica") {
        FastIcaOptions opt;
        opt.contrast.alpha = alpha;
        opt.contrast.sigma = sigma;
        if (contrast == "gauss") opt.contrast.kind = Contrast::Kind::kGauss;
        else if (contrast == "quartic")
          opt.contrast.kind = Contrast::Kind::kQuartic;
        embedding = fastica_reduce(cloud, target_dim, opt,
                                   derive_seed(seed, "fastica"), &warnings);
      } else if (method == "tsne") {
        TsneParams params;
        params.perplexity = perplexity;
        params.eta = eta;
        params.iterations = iterations;
        params.symmetrize = symmetrize;
        embedding = tsne(cloud, target_dim, params,
                         derive_seed(seed, "tsne"), &warnings);
      } else {
        throw validation_error("reduce: unknown method '" + method + "'");
      }
      if (out_path.empty()) throw validation_error("reduce: need --out");
      write_embedding_csv(out_path, embedding);
      write_embedding_sidecar(out_path + ".json", embedding);
      std::printf("wrote %s embedding (%lld x %lld) to %s\n",
                  embedding.method.c_str(),
                  static_cast<long long>(embedding.coords.rows()),
                  static_cast<long long>(embedding.coords.cols()),
                  out_path.c_str());
    } else if (*rips) {
      Eigen::MatrixXd distances;
      if (!rips_distances.empty()) {
        distances = read_matrix_csv(rips_distances).values;
      } else if (!rips_points.empty()) {
        distances = pairwise_distances(load_points(rips_points));
      } else {
        throw validation_error("rips: need --points or --distances");
      }
      const int cap_points = effective_max_points(rips_max_points);
      if (distances.rows() > cap_points) {
        const auto landmarks = maxmin_landmarks(distances, cap_points);
        Eigen::MatrixXd sub(landmarks.size(), landmarks.size());
        for (size_t i = 0; i < landmarks.size(); ++i)
          for (size_t j = 0; j < landmarks.size(); ++j)
            sub(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                distances(landmarks[i], landmarks[j]);
        distances.swap(sub);
        warnings.push_back("rips: subsampled to " +
                           std::to_string(cap_points) + " maxmin landmarks");
      }
      const double scale =
          rips_max_scale > 0 ? rips_max_scale : default_max_scale(distances);
      const FilteredComplex fc =
          rips_filtration(distances, rips_max_dim, scale);
      if (out_path.empty()) throw validation_error("rips: need --out");
      write_filtration(out_path, fc);
      std::printf("wrote %zu simplices (max_dim %d, max_scale %s) to %s\n",
                  fc.simplices.size(), rips_max_dim,
                  format_double(scale).c_str(), out_path.c_str());
    } else if (*persist) {
      FilteredComplex fc;
      if (!persist_filtration.empty()) {
        fc = read_filtration(persist_filtration);
      } else if (!persist_points.empty()) {
        Eigen::MatrixXd distances =
            pairwise_distances(load_points(persist_points));
        const int cap_points = effective_max_points(persist_max_points);
        if (distances.rows() > cap_points) {
          const auto landmarks = maxmin_landmarks(distances, cap_points);
          Eigen::MatrixXd sub(landmarks.size(), landmarks.size());
          for (size_t i = 0; i < landmarks.size(); ++i)
            for (size_t j = 0; j < landmarks.size(); ++j)
              sub(static_cast<Eigen::Index>(i),
                  static_cast<Eigen::Index>(j)) =
                  distances(landmarks[i], landmarks[j]);
          distances.swap(sub);
        }
        const double scale = persist_max_scale > 0
                                 ? persist_max_scale
                                 : default_max_scale(distances);
        fc = rips_filtration(distances, persist_max_dim, scale);
      } else {
        throw validation_error("persist: need --filtration or --points");
      }
      const PersistenceDiagram diagram =
          persistence_diagram(fc, max_hom_dim, keep_zero, &warnings);
      if (out_path.empty()) throw validation_error("persist: need --out");
      write_diagram_csv(out_path, diagram);
      size_t total = 0;
      for (const auto& points : diagram.by_dim) total += points.size();
      std::printf("wrote %zu diagram points to %s\n", total, out_path.c_str());
    } else if (*dist) {
      std::vector<std::pair<std::string, PersistenceDiagram>> labeled;
      std::vector<std::string> labels;
      if (!labels_csv.empty())
        for (const auto& cell : split_csv_line(labels_csv))
          labels.push_back(trim(cell));
      for (size_t i = 0; i < diagram_paths.size(); ++i) {
        const std::string label =
            i < labels.size()
                ? labels[i]
                : std::filesystem::path(diagram_paths[i]).stem().string();
        labeled.emplace_back(label, read_diagram_csv(diagram_paths[i]));
      }
      const DistanceTable table = pairwise_table(
          labeled, dist_dim,
          metric_from_flags(metric_name, wasserstein_p, wasserstein_root));
      std::fputs(format_table_text(table).c_str(), stdout);
      if (!out_path.empty()) write_table_csv(out_path, table);
    } else if (*stats) {
      TestReport report;
      if (*wmw) {
        report = wilcoxon_mann_whitney(parse_number_list(sample_a),
                                       parse_number_list(sample_b));
        report.groups = {"a", "b"};
      } else if (*perm) {
        std::vector<PersistenceDiagram> ga, gb;
        for (const auto& p : group_a) ga.push_back(read_diagram_csv(p));
        for (const auto& p : group_b) gb.push_back(read_diagram_csv(p));
        report = permutation_test(ga, gb, perm_dim, n_perm,
                                  derive_seed(seed, "permtest"));
        report.groups = {"group_a", "group_b"};
      } else if (*median) {
        std::vector<DistanceTable> tables;
        for (const auto& p : table_paths) tables.push_back(read_table_csv(p));
        const DistanceTable med = median_table(tables);
        std::fputs(format_table_text(med).c_str(), stdout);
        if (!out_path.empty()) write_table_csv(out_path, med);
        print_warnings(warnings);
        return 0;
      }
      const nlohmann::json j = to_json(report);
      std::printf("%s\n", j.dump(2).c_str());
      if (!out_path.empty()) write_report_json(out_path, report);
    } else if (*plot) {
      if (out_path.empty()) throw validation_error("plot: need --out");
      if (kind == "barcode" || kind == "diagram") {
        const PersistenceDiagram diagram = read_diagram_csv(plot_input);
        if (kind == "barcode") {
          const double bar_cap = cap > 0 ? cap : default_barcode_cap(diagram);
          render_barcode(barcode_of(diagram, bar_cap), out_path);
        } else {
          render_diagram(diagram, out_path);
        }
      } else if (kind == "scatter3") {
        render_scatter3(load_points(plot_input).leftCols(3), out_path);
      } else if (kind == "distance-series") {
        // input: CSV, one column per homology dimension, header "h<d>"
        const CsvMatrix csv = read_matrix_csv(plot_input);
        std::vector<DistanceSeries> series;
        for (Eigen::Index c = 0; c < csv.values.cols(); ++c) {
          DistanceSeries s;
          s.dim = csv.header.size() == static_cast<size_t>(csv.values.cols()) &&
                          csv.header[static_cast<size_t>(c)].size() > 1
                      ? std::atoi(csv.header[static_cast<size_t>(c)].c_str() + 1)
                      : static_cast<int>(c + 1);
          for (Eigen::Index r = 0; r < csv.values.rows(); ++r)
            s.values.push_back(csv.values(r, c));
          series.push_back(std::move(s));
        }
        render_distance_series(series, out_path);
      } else {
        throw validation_error("plot: unknown kind '" + kind + "'");
      }
      std::printf("wrote %s\n", out_path.c_str());
    } else if (*run_cmd) {
      if (verify_only) {
        if (verify_manifest_path.empty())
          throw validation_error("run --verify: need --manifest");
        verify_manifest(verify_manifest_path);
        std::printf("manifest ok: %s\n", verify_manifest_path.c_str());
        print_warnings(warnings);
        return 0;
      }
      if (config_path.empty()) throw validation_error("run: need --config");
      std::ifstream in(config_path);
      if (!in) throw io_error("cannot open '" + config_path + "'");
      PipelineConfig config = config_from_json(nlohmann::json::parse(in));
      for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--seed") config.seed = seed;
        if (arg == "--out") config.out_dir = out_path;
        if (arg == "--threads") config.threads = threads;
      }
      const RunManifest manifest = run(config);
      std::printf("run complete: %zu artifacts under %s\n",
                  manifest.artifacts.size(), config.out_dir.c_str());
    }
  } catch (const validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  print_warnings(warnings);
  return 0;
}
