/*
 * Copyright 2026 The pidforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pidforest/baseline.hpp"
#include "pidforest/data.hpp"
#include "pidforest/eval.hpp"
#include "pidforest/forest.hpp"
#include "pidforest/oracle.hpp"

namespace {

using namespace pidforest;

// Exit codes, also listed in --help:
//   0 success, 2 usage error, 3 file error, 4 schema/version mismatch,
//   5 malformed or invalid data.
constexpr int kExitUsage = 2;
constexpr int kExitFile = 3;
constexpr int kExitSchema = 4;
constexpr int kExitData = 5;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output file '" + path + "'");
  out << content;
}

Dataset load_input(const std::string& input, const std::string& schema_path) {
  if (schema_path.empty()) return load_csv_auto(input);
  return load_csv(input, Schema::from_json_file(schema_path));
}

std::string inf_aware(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

// Scores file: the "score" column if present, otherwise a single column.
std::vector<double> read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) header.push_back(f);
  }
  std::size_t col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == "score") col = j;
  if (col == header.size()) {
    if (header.size() != 1)
      throw schema_error("scores file needs a 'score' column");
    col = 0;
  }
  std::vector<double> scores;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::size_t j = 0;
    bool got = false;
    while (std::getline(ss, f, ',')) {
      if (j++ == col) {
        try {
          scores.push_back(std::stod(f));
        } catch (const std::exception&) {
          throw data_error("row " + std::to_string(row) + ": bad score '" + f + "'");
        }
        got = true;
      }
    }
    if (!got) throw data_error("row " + std::to_string(row) + ": missing score");
  }
  if (scores.empty()) throw data_error("empty input");
  return scores;
}

// Labels file: the label column of a dataset CSV, or a single 0/1 column.
std::vector<std::uint8_t> read_labels(const std::string& path) {
  const Dataset ds = load_csv_auto(path);
  if (ds.has_labels()) return ds.labels;
  if (ds.d == 1) {
    std::vector<std::uint8_t> labels(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
      const double v = ds.at(i, 0);
      if (v != 0.0 && v != 1.0) throw data_error("labels must be 0 or 1");
      labels[i] = static_cast<std::uint8_t>(v);
    }
    return labels;
  }
  throw schema_error("labels file needs a 'label' or 'anomaly' column");
}

std::string witness_header(std::size_t count) {
  std::string h;
  for (std::size_t w = 1; w <= count; ++w) {
    h += ",witness" + std::to_string(w) + "_column";
    h += ",witness" + std::to_string(w) + "_lo";
    h += ",witness" + std::to_string(w) + "_hi";
  }
  return h;
}

std::string column_label(const std::vector<AttributeSpec>& columns,
                         std::size_t j) {
  return columns[j].name.empty() ? "c" + std::to_string(j) : columns[j].name;
}

int run_fit(const std::string& input, const std::string& schema_path,
            const HyperParams& params, unsigned threads,
            const std::string& out) {
  const Dataset ds = load_input(input, schema_path);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const Forest forest = fit(ds, params, threads);
  write_file(out, serialize(forest));
  std::cout << "fitted " << params.num_trees << " trees on " << ds.n
            << " points, model written to " << out << "\n";
  return 0;
}

int run_score(const std::string& model_path, const std::string& input,
              const std::string& schema_path, const std::string& out,
              const std::string& score_by, const std::string& format,
              std::size_t witness_count) {
  const Forest forest = deserialize(read_file(model_path));
  const Dataset ds = load_input(input, schema_path);
  const ScoreBy by =
      score_by == "depth" ? ScoreBy::kDepth : ScoreBy::kSparsity;
  const auto reports = score_with_witness(forest, ds, by);

  std::ostringstream os;
  if (format == "jsonl") {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      nlohmann::json j;
      j["row_id"] = i;
      j["score"] = reports[i].score;
      nlohmann::json ranges = nlohmann::json::array();
      for (const WitnessRange& r : reports[i].ranges) {
        nlohmann::json jr;
        jr["column"] = column_label(forest.columns, r.coord);
        if (r.categorical) {
          jr["codes"] = r.codes;
        } else {
          jr["lo"] = inf_aware(r.lo);
          jr["hi"] = inf_aware(r.hi);
        }
        ranges.push_back(std::move(jr));
      }
      j["witness"] = std::move(ranges);
      os << j.dump() << '\n';
    }
  } else {
    os << "row_id,score" << witness_header(witness_count) << '\n';
    for (std::size_t i = 0; i < reports.size(); ++i) {
      os << i << ',' << format_double(reports[i].score);
      for (std::size_t w = 0; w < witness_count; ++w) {
        if (w < reports[i].ranges.size()) {
          const WitnessRange& r = reports[i].ranges[w];
          os << ',' << column_label(forest.columns, r.coord) << ','
             << inf_aware(r.lo) << ',' << inf_aware(r.hi);
        } else {
          os << ",,,";
        }
      }
      os << '\n';
    }
  }
  write_file(out, os.str());
  return 0;
}

int run_eval(const std::string& scores_path, const std::string& labels_path,
             const std::string& metric, double fraction,
             const std::string& roc_out) {
  const auto scores = read_scores(scores_path);
  const auto labels = read_labels(labels_path);
  if (scores.size() != labels.size())
    throw data_error("scores and labels disagree on row count");
  if (metric == "auc") {
    std::cout << format_double(auc(scores, labels)) << "\n";
  } else if (metric == "topfrac") {
    std::cout << format_double(top_fraction_accuracy(scores, labels, fraction))
              << "\n";
  } else if (metric == "recall") {
    std::cout << format_double(recall_at_fraction(scores, labels, fraction))
              << "\n";
  } else {
    throw std::invalid_argument("unknown metric '" + metric + "'");
  }
  if (!roc_out.empty()) {
    std::ostringstream os;
    os << "threshold,fpr,tpr\n";
    for (const RocPoint& p : roc_points(scores, labels))
      os << inf_aware(p.threshold) << ',' << format_double(p.fpr) << ','
         << format_double(p.tpr) << '\n';
    write_file(roc_out, os.str());
  }
  return 0;
}

void write_sidecar(const std::string& out, const nlohmann::json& meta) {
  write_file(out + ".meta.json", meta.dump(1) + "\n");
}

int run_synth_masking(std::uint64_t seed, const std::string& out) {
  const Dataset ds = gen_masking(seed);
  write_csv(ds, out);
  write_sidecar(out, {{"generator", "masking"},
                      {"seed", seed},
                      {"n", ds.n},
                      {"d", ds.d},
                      {"anomalies", 30}});
  return 0;
}

int run_synth_gaussian(std::size_t noise_dims, double noise_lo,
                       double noise_hi, std::uint64_t seed,
                       const std::string& out) {
  GaussianMixtureMeta meta;
  const Dataset ds = gen_gaussian_mixture(noise_dims, noise_lo, noise_hi, seed, &meta);
  write_csv(ds, out);
  write_sidecar(out, {{"generator", "gaussian_mixture"},
                      {"seed", seed},
                      {"n", ds.n},
                      {"noise_dims", noise_dims},
                      {"noise_lo", noise_lo},
                      {"noise_hi", noise_hi},
                      {"mean1", meta.mean1},
                      {"mean2", meta.mean2},
                      {"cov1", meta.cov1},
                      {"cov2", meta.cov2},
                      {"anomalies", 100}});
  return 0;
}

int run_synth_sine(std::size_t length, double sigma, std::size_t shingle_width,
                   std::uint64_t seed, const std::string& out) {
  const SineSeries series = gen_sine_anomalies(seed, length, sigma);
  if (shingle_width > 0) {
    const Dataset ds = shingle(series.values, series.labels, shingle_width);
    write_csv(ds, out);
  } else {
    std::ostringstream os;
    os << "t,value,label\n";
    for (std::size_t i = 0; i < series.values.size(); ++i)
      os << i << ',' << format_double(series.values[i]) << ','
         << static_cast<int>(series.labels[i]) << '\n';
    write_file(out, os.str());
  }
  write_sidecar(out, {{"generator", "sine"},
                      {"seed", seed},
                      {"length", length},
                      {"sigma", sigma},
                      {"shingle", shingle_width},
                      {"anomaly_starts", series.anomaly_starts}});
  return 0;
}

int run_oracle_pid1d(const std::string& input, const std::string& out) {
  const Dataset ds = load_csv_auto(input);
  if (ds.d != 1) throw schema_error("pid1d oracle expects a single column");
  std::vector<double> values(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) values[i] = ds.at(i, 0);
  std::vector<std::size_t> order(ds.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> sorted(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) sorted[i] = values[order[i]];
  const auto scored = pidscore_1d(sorted);

  std::vector<ScoredInterval> by_row(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) by_row[order[i]] = scored[i];
  std::ostringstream os;
  os << "row_id,score_log2,witness_lo,witness_hi\n";
  for (std::size_t i = 0; i < ds.n; ++i)
    os << i << ',' << format_double(by_row[i].log2_score) << ','
       << format_double(by_row[i].lo) << ',' << format_double(by_row[i].hi)
       << '\n';
  write_file(out, os.str());
  return 0;
}

int run_oracle_boolean(const std::string& input, const std::string& out) {
  const Dataset ds = load_csv_auto(input);
  std::vector<std::vector<int>> rows(ds.n, std::vector<int>(ds.d));
  for (std::size_t i = 0; i < ds.n; ++i)
    for (std::size_t j = 0; j < ds.d; ++j) {
      const double v = ds.at(i, j);
      if (v != 0.0 && v != 1.0)
        throw data_error("row " + std::to_string(i + 1) +
                         ": boolean oracle expects 0/1 values");
      rows[i][j] = static_cast<int>(v);
    }
  const BooleanDataset data = BooleanDataset::from_rows(rows);
  const bool dups = data.has_duplicates();
  std::ostringstream os;
  os << "row_id,pid_length,pid_witness,max_sparsity_log2,id_length\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    const PidResult pid = pid_length_boolean(data, i);
    const BooleanSparsity sp = max_boolean_subcube_sparsity(data, i);
    os << i << ',' << format_double(pid.length) << ',';
    for (std::size_t w = 0; w < pid.witness.size(); ++w)
      os << (w ? "|" : "") << pid.witness[w];
    os << ',' << format_double(sp.log2_value()) << ',';
    if (!dups) os << id_length(data, i);
    os << '\n';
  }
  write_file(out, os.str());
  return 0;
}

int run_oracle_subcube(const std::string& input, const std::string& out) {
  const Dataset ds = load_csv_auto(input);
  const auto scored = pidscore_bruteforce_all(ds);
  std::ostringstream os;
  os << "row_id,score_log2";
  for (std::size_t j = 0; j < ds.d; ++j) {
    const std::string name = column_label(ds.columns, j);
    os << ",witness_" << name << "_lo,witness_" << name << "_hi";
  }
  os << '\n';
  for (std::size_t i = 0; i < ds.n; ++i) {
    os << i << ',' << format_double(scored[i].log2_score);
    for (const Interval& iv : scored[i].witness.intervals)
      os << ',' << format_double(iv.lo()) << ',' << format_double(iv.hi());
    os << '\n';
  }
  write_file(out, os.str());
  return 0;
}

int run_baseline(const std::string& input, const std::string& schema_path,
                 std::size_t trees, std::size_t samples, std::uint64_t seed,
                 const std::string& out) {
  const Dataset ds = load_input(input, schema_path);
  const IsoForest forest = iforest_fit(ds, trees, samples, seed);
  const auto scores = iforest_score(forest, ds);
  std::ostringstream os;
  os << "row_id,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i)
    os << i << ',' << format_double(scores[i]) << '\n';
  write_file(out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PIDForest anomaly detection"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 2 usage error, 3 file error,\n"
      "            4 schema or model-version mismatch, 5 invalid data.");

  // fit
  std::string fit_input, fit_schema, fit_out;
  HyperParams params;
  unsigned threads = 0;
  auto* fit_cmd = app.add_subcommand("fit", "fit a PIDForest model");
  fit_cmd->add_option("--input", fit_input, "input CSV")->required();
  fit_cmd->add_option("--schema", fit_schema, "schema JSON (default: all continuous)");
  fit_cmd->add_option("--trees", params.num_trees, "number of trees");
  fit_cmd->add_option("--samples", params.samples_per_tree, "sample size per tree");
  fit_cmd->add_option("--degree", params.max_degree, "max intervals per split");
  fit_cmd->add_option("--depth", params.max_depth, "max tree depth");
  fit_cmd->add_option("--seed", params.rng_seed, "random seed");
  fit_cmd->add_option("--threads", threads, "fitting threads (0 = all cores)");
  fit_cmd->add_option("--out", fit_out, "model output path")->required();

  // score
  std::string score_model, score_input, score_schema, score_out;
  std::string score_by = "sparsity", score_format = "csv";
  std::size_t witness_count = 3;
  auto* score_cmd = app.add_subcommand("score", "score points with a model");
  score_cmd->add_option("--model", score_model, "model path")->required();
  score_cmd->add_option("--input", score_input, "input CSV")->required();
  score_cmd->add_option("--schema", score_schema, "schema JSON");
  score_cmd->add_option("--out", score_out, "scores output CSV")->required();
  score_cmd->add_option("--score-by", score_by, "sparsity|depth")
      ->check(CLI::IsMember({"sparsity", "depth"}));
  score_cmd->add_option("--format", score_format, "csv|jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  score_cmd->add_option("--witness", witness_count, "witness ranges per row (csv)");

  // eval
  std::string eval_scores, eval_labels, eval_metric = "auc", eval_roc;
  double eval_fraction = 0.05;
  auto* eval_cmd = app.add_subcommand("eval", "compute metrics from scores");
  eval_cmd->add_option("--scores", eval_scores, "scores CSV")->required();
  eval_cmd->add_option("--labels", eval_labels, "labels CSV")->required();
  eval_cmd->add_option("--metric", eval_metric, "auc|topfrac|recall")
      ->check(CLI::IsMember({"auc", "topfrac", "recall"}));
  eval_cmd->add_option("--fraction", eval_fraction, "top fraction for topfrac/recall");
  eval_cmd->add_option("--roc-out", eval_roc, "write ROC points CSV");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "synthetic dataset generators");
  synth_cmd->require_subcommand(1);
  std::uint64_t synth_seed = 0;
  std::string synth_out;

  auto* masking_cmd = synth_cmd->add_subcommand("masking", "masked duplicate anomalies");
  masking_cmd->add_option("--seed", synth_seed, "random seed");
  masking_cmd->add_option("--out", synth_out, "output CSV")->required();

  std::size_t g_noise_dims = 10;
  double g_noise_lo = -2.0, g_noise_hi = 2.0;
  auto* gaussian_cmd = synth_cmd->add_subcommand("gaussian", "Gaussian mixture plus noise dims");
  gaussian_cmd->add_option("--seed", synth_seed, "random seed");
  gaussian_cmd->add_option("--noise-dims", g_noise_dims, "uniform noise dimensions");
  gaussian_cmd->add_option("--noise-lo", g_noise_lo, "noise range lower bound");
  gaussian_cmd->add_option("--noise-hi", g_noise_hi, "noise range upper bound");
  gaussian_cmd->add_option("--out", synth_out, "output CSV")->required();

  std::size_t s_length = 4000, s_shingle = 0;
  double s_sigma = 0.05;
  auto* sine_cmd = synth_cmd->add_subcommand("sine", "sine wave with frozen segments");
  sine_cmd->add_option("--seed", synth_seed, "random seed");
  sine_cmd->add_option("--length", s_length, "series length");
  sine_cmd->add_option("--sigma", s_sigma, "Gaussian noise sigma");
  sine_cmd->add_option("--shingle", s_shingle, "emit shingled rows of this width (0 = raw series)");
  sine_cmd->add_option("--out", synth_out, "output CSV")->required();

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force ground truth");
  oracle_cmd->require_subcommand(1);
  std::string oracle_input, oracle_out;
  auto* pid1d_cmd = oracle_cmd->add_subcommand("pid1d", "exact 1-d scores (values in [0,1])");
  pid1d_cmd->add_option("--input", oracle_input, "input CSV")->required();
  pid1d_cmd->add_option("--out", oracle_out, "output CSV")->required();
  auto* boolean_cmd = oracle_cmd->add_subcommand("boolean", "Boolean id/pid lengths (d <= 20)");
  boolean_cmd->add_option("--input", oracle_input, "input CSV")->required();
  boolean_cmd->add_option("--out", oracle_out, "output CSV")->required();
  auto* subcube_cmd = oracle_cmd->add_subcommand("subcube", "exact subcube search (d <= 3, values in [0,1])");
  subcube_cmd->add_option("--input", oracle_input, "input CSV")->required();
  subcube_cmd->add_option("--out", oracle_out, "output CSV")->required();

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "reference detectors");
  baseline_cmd->require_subcommand(1);
  std::string b_input, b_schema, b_out;
  std::size_t b_trees = 100, b_samples = 256;
  std::uint64_t b_seed = 0;
  auto* iforest_cmd = baseline_cmd->add_subcommand("iforest", "isolation forest fit+score");
  iforest_cmd->add_option("--input", b_input, "input CSV")->required();
  iforest_cmd->add_option("--schema", b_schema, "schema JSON");
  iforest_cmd->add_option("--trees", b_trees, "number of trees");
  iforest_cmd->add_option("--samples", b_samples, "sample size per tree");
  iforest_cmd->add_option("--seed", b_seed, "random seed");
  iforest_cmd->add_option("--out", b_out, "scores output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit_cmd)
      return run_fit(fit_input, fit_schema, params, threads, fit_out);
    if (*score_cmd)
      return run_score(score_model, score_input, score_schema, score_out,
                       score_by, score_format, witness_count);
    if (*eval_cmd)
      return run_eval(eval_scores, eval_labels, eval_metric, eval_fraction,
                      eval_roc);
    if (*masking_cmd) return run_synth_masking(synth_seed, synth_out);
    if (*gaussian_cmd)
      return run_synth_gaussian(g_noise_dims, g_noise_lo, g_noise_hi,
                                synth_seed, synth_out);
    if (*sine_cmd)
      return run_synth_sine(s_length, s_sigma, s_shingle, synth_seed, synth_out);
    if (*pid1d_cmd) return run_oracle_pid1d(oracle_input, oracle_out);
    if (*boolean_cmd) return run_oracle_boolean(oracle_input, oracle_out);
    if (*subcube_cmd) return run_oracle_subcube(oracle_input, oracle_out);
    if (*iforest_cmd)
      return run_baseline(b_input, b_schema, b_trees, b_samples, b_seed, b_out);
  } catch (const io_error& e) {
    std::cerr << "error: file: " << e.what() << "\n";
    return kExitFile;
  } catch (const schema_error& e) {
    std::cerr << "error: schema: " << e.what() << "\n";
    return kExitSchema;
  } catch (const data_error& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
