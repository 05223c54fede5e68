// Command-line front end: persistence diagrams, diagram distances, structure alignment,
// mixture fitting, sample scoring and the training harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "topoalign/topoalign.hpp"

namespace {

using namespace topoalign;
using nlohmann::ordered_json;

constexpr int kUserError = 1;
constexpr int kInternalError = 2;

std::string twelve_digits(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Writes to `path`, or stdout when empty.
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write(out);
  if (!out) throw Error("failed writing '" + path + "'");
}

PersistenceDiagram load_diagram(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_diagram(in);
}

std::vector<double> load_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    double v = 0.0;
    if (!detail::parse_double(t, v)) throw ParseError("invalid number '" + std::string(t) + "'", line_no);
    values.push_back(v);
  }
  return values;
}

ordered_json gum_to_json(const GumParams& g) {
  ordered_json j;
  j["pi"] = g.pi;
  j["sigma"] = g.sigma;
  j["omega"] = g.omega;
  j["log_likelihood"] = g.log_likelihood;
  j["iterations"] = g.iterations;
  j["degenerate"] = g.degenerate;
  return j;
}

struct ReportSummary {
  std::size_t epochs = 0;
  double final_discrepancy = 0.0;
  double final_accuracy = 0.0;
  bool tail_non_increasing = true;
};

/// Final values of a report CSV and whether the second half of the discrepancy curve
/// never rises by more than 5% from one epoch to the next.
ReportSummary summarize_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(in, header) || header.rfind("epoch,", 0) != 0) throw ParseError("missing report header", 1);
  std::vector<std::vector<double>> rows;
  detail::for_each_csv_row(in, [&](std::size_t line_no, std::vector<double> v) {
    if (v.size() != 8) throw ParseError("report rows need 8 columns", line_no + 1);
    rows.push_back(std::move(v));
  });
  if (rows.empty()) throw ParseError("report has no rows", 2);
  ReportSummary s;
  s.epochs = rows.size();
  s.final_discrepancy = rows.back()[3];
  s.final_accuracy = rows.back()[4];
  for (std::size_t e = rows.size() / 2 + 1; e < rows.size(); ++e)
    if (rows[e][3] > rows[e - 1][3] * 1.05) s.tail_non_increasing = false;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological structure alignment and hard-sample scoring toolkit"};
  app.require_subcommand(1);

  // diagram
  auto* diagram = app.add_subcommand("diagram", "Vietoris-Rips persistence diagram of a CSV point cloud");
  std::string diagram_input, diagram_out;
  int max_dim = 0;
  double max_scale = std::numeric_limits<double>::infinity();
  std::size_t budget = kDefaultSimplexBudget;
  diagram->add_option("input", diagram_input, "Point cloud CSV")->required();
  diagram->add_option("--max-dim", max_dim, "Highest homology dimension")->check(CLI::NonNegativeNumber);
  diagram->add_option("--max-scale", max_scale, "Largest simplex diameter (dimensions >= 1)");
  diagram->add_option("--budget", budget, "Simplex budget for dimensions >= 1");
  diagram->add_option("--out", diagram_out, "Output file (default: stdout)");

  // distance
  auto* distance = app.add_subcommand("distance", "Bottleneck or Wasserstein distance between two diagram files");
  std::string d1_path, d2_path, metric = "bottleneck";
  double p = 1.0;
  int dist_dim = 0;
  distance->add_option("first", d1_path, "Diagram file")->required();
  distance->add_option("second", d2_path, "Diagram file")->required();
  distance->add_option("--metric", metric, "bottleneck or wasserstein")
      ->check(CLI::IsMember({"bottleneck", "wasserstein"}));
  distance->add_option("--p", p, "Wasserstein order (>= 1)");
  distance->add_option("--dim", dist_dim, "Homology dimension to compare")->check(CLI::NonNegativeNumber);

  // align
  auto* align = app.add_subcommand("align", "Structure-alignment discrepancy between two clouds of equal size");
  std::string x_path, z_path;
  align->add_option("x", x_path, "Input-space cloud CSV")->required();
  align->add_option("z", z_path, "Latent-space cloud CSV")->required();

  // gum
  auto* gum = app.add_subcommand("gum", "Fit the Gaussian-uniform mixture to newline-separated entropies");
  std::string entropy_path;
  GumFitOptions gum_options;
  gum->add_option("entropies", entropy_path, "Text file with one entropy per line")->required();
  gum->add_option("--tol", gum_options.tol, "Log-likelihood convergence tolerance");
  gum->add_option("--max-iter", gum_options.max_iter, "Maximum EM iterations");

  // score
  auto* score = app.add_subcommand("score", "Structure damage scores for classifier predictions");
  std::string predictions_path, score_out;
  double score_lambda = 1.0;
  score->add_option("predictions", predictions_path, "CSV rows: label,p_1,...,p_K")->required();
  score->add_option("--lambda", score_lambda, "Temperature of the uncertainty factor");
  score->add_option("--out", score_out, "Output CSV (default: stdout)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the encoder and emit a per-epoch report CSV");
  std::string dataset_path, config_path, mode = "topofr", report_out, dump_path;
  bool synthetic = false;
  std::optional<std::uint64_t> seed;
  std::uint64_t data_seed = 2024;
  std::size_t heldout_size = 1000;
  std::size_t train_size = 4000;
  auto* dataset_opt = train_cmd->add_option("--dataset", dataset_path, "Labeled CSV: label,x_1,...,x_d");
  auto* synthetic_opt = train_cmd->add_flag("--synthetic", synthetic, "Use the bundled blob generator");
  dataset_opt->excludes(synthetic_opt);
  train_cmd->add_option("--config", config_path, "key=value training configuration")->required();
  train_cmd->add_option("--mode", mode, "baseline, ptsa, topofr, or a '+' list of rsp/isa/w1/w2");
  train_cmd->add_option("--seed", seed, "Override the configured rng_seed");
  train_cmd->add_option("--data-seed", data_seed, "Seed of the synthetic generator");
  train_cmd->add_option("--heldout", heldout_size, "Held-out rows taken from the end of the data");
  train_cmd->add_option("--train-size", train_size, "Training rows drawn by --synthetic");
  train_cmd->add_option("--out", report_out, "Report CSV (default: stdout)");
  train_cmd->add_option("--dump-dataset", dump_path, "Also write the data set used, as labeled CSV");

  // report
  auto* report = app.add_subcommand("report", "Summarize report CSVs; with two, compare baseline and candidate");
  std::vector<std::string> report_paths;
  report->add_option("reports", report_paths, "Report CSV files")->required()->expected(1, 2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUserError;
  }

  try {
    if (*diagram) {
      const auto cloud = load_point_cloud(diagram_input);
      const auto m = pairwise_distances(cloud);
      const auto d = max_dim == 0 ? h0_persistence(m).diagram : rips_persistence(m, max_dim, max_scale, budget);
      emit(diagram_out, [&](std::ostream& out) { write_diagram(out, d); });
    } else if (*distance) {
      const auto a = load_diagram(d1_path).restricted(dist_dim, true);
      const auto b = load_diagram(d2_path).restricted(dist_dim, true);
      const double value = metric == "bottleneck" ? bottleneck_distance(a, b) : wasserstein_distance(a, b, p);
      std::cout << twelve_digits(value) << '\n';
    } else if (*align) {
      const auto x = load_point_cloud(x_path);
      const auto z = load_point_cloud(z_path);
      std::cout << twelve_digits(structure_discrepancy(x, z)) << '\n';
    } else if (*gum) {
      const auto values = load_values(entropy_path);
      std::cout << gum_to_json(gum_fit(values, gum_options)).dump(2) << '\n';
    } else if (*score) {
      const auto data = train::load_labeled_data(predictions_path);
      std::vector<PredictionRecord> records;
      std::vector<double> entropies;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.x.point(i);
        records.push_back(make_prediction_record(std::vector<double>(row.begin(), row.end()), data.labels[i]));
        entropies.push_back(records.back().entropy);
      }
      const auto params = gum_fit(entropies);
      emit(score_out, [&](std::ostream& out) {
        out << "entropy,gt_prob,h,w1,w2,sds\n";
        for (const auto& r : records) {
          const auto s = structure_damage_score(gum_posterior(r.entropy, params), r.gt_prob, score_lambda);
          out << format_real(r.entropy) << ',' << format_real(r.gt_prob) << ',' << format_real(s.h) << ','
              << format_real(s.w1) << ',' << format_real(s.w2) << ',' << format_real(s.sds) << '\n';
        }
      });
    } else if (*train_cmd) {
      if (dataset_path.empty() && !synthetic) throw InvalidArgument("train needs --dataset or --synthetic");
      auto cfg = train::load_config(config_path);
      if (seed) cfg.rng_seed = *seed;
      const auto comp = train::parse_mode(mode);
      train::LabeledData data;
      if (synthetic) {
        train::BlobSpec spec;
        spec.samples = train_size + heldout_size;
        data = train::make_blobs(spec, data_seed);
      } else {
        data = train::load_labeled_data(dataset_path);
      }
      if (heldout_size < 1 || heldout_size + 2 > data.size())
        throw InvalidArgument("--heldout must leave at least two training rows");
      if (!dump_path.empty()) emit(dump_path, [&](std::ostream& out) { train::write_labeled_data(out, data); });
      const auto split = data.size() - heldout_size;
      const auto result = train::run_experiment(data.slice(0, split), data.slice(split, data.size()), cfg, comp);
      emit(report_out, [&](std::ostream& out) { train::write_report_csv(out, result); });
    } else if (*report) {
      ordered_json j;
      std::vector<ReportSummary> summaries;
      for (const auto& path : report_paths) {
        const auto s = summarize_report(path);
        summaries.push_back(s);
        ordered_json r;
        r["file"] = path;
        r["epochs"] = s.epochs;
        r["final_discrepancy"] = s.final_discrepancy;
        r["final_accuracy"] = s.final_accuracy;
        r["tail_non_increasing"] = s.tail_non_increasing;
        j["reports"].push_back(r);
      }
      if (summaries.size() == 2 && summaries[0].final_discrepancy > 0.0)
        j["discrepancy_ratio"] = summaries[1].final_discrepancy / summaries[0].final_discrepancy;
      std::cout << j.dump(2) << '\n';
    }
  } catch (const topoalign::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return 0;
}
