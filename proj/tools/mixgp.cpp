// Command-line front end: correlation builders, designs, test functions, GP
// fitting and the benchmark driver.

#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csv_util.hpp"
#include "mixgp/bench.hpp"
#include "mixgp/corrparam.hpp"
#include "mixgp/design.hpp"
#include "mixgp/errors.hpp"
#include "mixgp/gpcore.hpp"
#include "mixgp/model_io.hpp"
#include "mixgp/testbed.hpp"

namespace {

using namespace mixgp;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& cell : csv::split(text)) out.push_back(csv::to_double(cell));
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (const auto& cell : csv::split(text)) out.push_back(csv::to_int(cell));
  return out;
}

// "l:u,l:u"
std::vector<Interval> parse_bounds(const std::string& text) {
  std::vector<Interval> out;
  for (const auto& cell : csv::split(text)) {
    const auto parts = csv::split(cell, ':');
    if (parts.size() != 2) throw FormatError("bounds must look like 'lower:upper,...'");
    out.push_back({csv::to_double(parts[0]), csv::to_double(parts[1])});
  }
  return out;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << csv::num(m(i, j));
    os << '\n';
  }
  return os.str();
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (const auto& line : csv::lines(read_text(path))) {
    std::vector<double> row;
    for (const auto& cell : csv::split(line)) row.push_back(csv::to_double(cell));
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
      throw FormatError(path + " is not a square matrix");
    }
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

// "LRC" with --rank 3 means "LRC3".
FamilySpec parse_spec(std::string label, int rank, int s) {
  if (rank > 0 && !label.empty() && !std::isdigit(static_cast<unsigned char>(label.back()))) {
    label += std::to_string(rank);
  }
  return FamilySpec::parse(label, s);
}

// Rows "slice,x1..xq[,y]" with a header line.
struct PointTable {
  std::vector<MixedPoint> points;
  std::vector<double> y;
};

PointTable read_points(const std::string& path, bool with_y) {
  const auto rows = csv::lines(read_text(path));
  if (rows.empty()) throw FormatError(path + " is empty");
  const auto header = csv::split(rows.front());
  if (header.empty() || header.front() != "slice") throw FormatError(path + ": first column must be 'slice'");
  const std::size_t q = header.size() - 1 - (with_y ? 1 : 0);
  PointTable t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cells = csv::split(rows[r]);
    if (cells.size() != header.size()) throw FormatError(path + ": row " + std::to_string(r) + " has the wrong column count");
    MixedPoint p;
    p.level = csv::to_int(cells[0]);
    for (std::size_t k = 1; k <= q; ++k) p.x.push_back(csv::to_double(cells[k]));
    t.points.push_back(std::move(p));
    if (with_y) t.y.push_back(csv::to_double(cells.back()));
  }
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian process models for mixed continuous and categorical inputs"};
  app.require_subcommand(1);

  // corr
  auto* corr = app.add_subcommand("corr", "Cross-correlation matrices");
  corr->require_subcommand(1);
  auto* corr_build = corr->add_subcommand("build", "Print the matrix of a parameter vector as CSV");
  std::string family_label;
  int s = 0;
  int rank = 0;
  std::string params;
  bool regularized = false;
  corr_build->add_option("--family", family_label, "EC, MC, UC or LRC")->required();
  corr_build->add_option("--s", s, "Number of levels")->required();
  corr_build->add_option("--rank", rank, "LRC rank");
  corr_build->add_option("--params", params, "Comma-separated parameters")->required();
  corr_build->add_flag("--regularize", regularized, "Apply the default nugget");
  corr_build->callback([&] {
    const FamilySpec spec = parse_spec(family_label, rank, s);
    const auto values = parse_list(params);
    CorrMatrix p = build_corr(spec, values);
    if (regularized) p = regularize(p);
    std::cout << matrix_csv(p.matrix());
  });

  // design
  auto* design = app.add_subcommand("design", "Latin hypercube designs");
  design->require_subcommand(1);
  int n = 0;
  int q = 2;
  std::uint64_t seed = 0;
  bool centered = false;
  std::string out_path;
  std::string bounds_text;
  auto* design_lhd = design->add_subcommand("lhd", "Latin hypercube design");
  auto* design_cslhd = design->add_subcommand("cslhd", "Clustered sliced Latin hypercube design");
  for (auto* sub : {design_lhd, design_cslhd}) {
    sub->add_option("--n", n, "Points (per slice for cslhd)")->required();
    sub->add_option("--q", q, "Continuous dimensions");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_flag("--centered", centered, "Place points at bin midpoints");
    sub->add_option("--bounds", bounds_text, "Problem bounds 'l:u,l:u' for extra columns");
    sub->add_option("--out", out_path, "Output file (default stdout)");
  }
  design_cslhd->add_option("--s", s, "Number of slices")->required();
  auto emit_design = [&](const Design& d) {
    std::optional<std::vector<Interval>> bounds;
    if (!bounds_text.empty()) bounds = parse_bounds(bounds_text);
    write_text(out_path, design_to_csv(d, bounds));
  };
  design_lhd->callback([&] { emit_design(lhd(n, q, seed, centered)); });
  design_cslhd->callback([&] { emit_design(cslhd(n, s, q, seed, centered).design); });
  std::string in_path;
  auto* design_validate = design->add_subcommand("validate", "Check a design CSV");
  design_validate->add_option("--in", in_path, "Design CSV")->required();
  design_validate->callback([&] {
    const Design d = design_from_csv(read_text(in_path));
    std::cout << "valid: " << d.points.size() << " points, " << d.s << " slices, " << d.q << " dimensions\n";
  });

  // testbed
  auto* testbed = app.add_subcommand("testbed", "Sliced benchmark functions");
  testbed->require_subcommand(1);
  std::string fn_name;
  std::string upend_text;
  int resolution = 100;
  auto* tb_list = testbed->add_subcommand("list", "List the reference functions");
  tb_list->callback([&] {
    for (const auto& f : make_reference_testbed()) std::cout << f.name() << ",s=" << f.s() << '\n';
  });
  auto* tb_positions = testbed->add_subcommand("positions", "Slice positions of a function");
  tb_positions->add_option("--fn", fn_name, "ackley, alpine, dcs or doublesum")->required();
  tb_positions->add_option("--s", s, "Number of slices")->required();
  tb_positions->callback([&] {
    const SlicedFunction f(standard_function(fn_name), s);
    const auto& pos = f.positions();
    for (std::size_t i = 0; i < pos.size(); ++i) std::cout << (i ? "," : "") << csv::num(pos[i]);
    std::cout << '\n';
  });
  auto* tb_corr = testbed->add_subcommand("corr", "Empirical cross-correlation matrix as CSV");
  tb_corr->add_option("--fn", fn_name, "Base function, or <base>-upended for the reference upend set")->required();
  tb_corr->add_option("--s", s, "Number of slices")->required();
  tb_corr->add_option("--upend", upend_text, "Comma-separated slices to upend");
  tb_corr->add_option("--resolution", resolution, "Grid points per dimension");
  tb_corr->callback([&] {
    const SlicedFunction f = upend_text.empty()
                                 ? make_testbed_function(fn_name, s)
                                 : SlicedFunction(standard_function(fn_name), s, parse_int_list(upend_text));
    const auto est = empirical_cross_corr(f, resolution);
    for (const auto& w : est.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << matrix_csv(est.matrix);
  });

  // gp
  auto* gp = app.add_subcommand("gp", "Fit and evaluate models");
  gp->require_subcommand(1);
  std::string data_path;
  std::string model_path;
  int starts = 10;
  auto* gp_fit = gp->add_subcommand("fit", "Maximum-likelihood fit; writes a model file");
  gp_fit->add_option("--data", data_path, "CSV slice,x1..xq,y")->required();
  gp_fit->add_option("--levels", s, "Number of categorical levels")->required();
  gp_fit->add_option("--bounds", bounds_text, "Bounds 'l:u,l:u'")->required();
  gp_fit->add_option("--family", family_label, "EC, MC, UC or LRC (omit for continuous only)");
  gp_fit->add_option("--rank", rank, "LRC rank");
  gp_fit->add_option("--starts", starts, "Optimizer starts");
  gp_fit->add_option("--seed", seed, "Optimizer seed");
  gp_fit->add_option("--out", model_path, "Model file")->required();
  gp_fit->callback([&] {
    const auto table = read_points(data_path, true);
    const TrainingSet train(table.points, table.y, parse_bounds(bounds_text), s);
    std::optional<FamilySpec> spec;
    if (!family_label.empty()) {
      spec = parse_spec(family_label, rank, s);
    }
    FitOptions opts;
    opts.starts = starts;
    opts.seed = seed;
    const GPFit model = fit(train, spec, opts);
    for (const auto& w : model.warnings()) std::cerr << "warning: " << w << '\n';
    save_model(model, model_path);
    std::cout << "objective " << csv::num(model.neg_log_lik()) << (model.fallback() ? " (fallback nugget)" : "")
              << '\n';
  });
  auto* gp_predict = gp->add_subcommand("predict", "Predict at query points");
  gp_predict->add_option("--model", model_path, "Model file")->required();
  gp_predict->add_option("--data", data_path, "CSV slice,x1..xq")->required();
  gp_predict->callback([&] {
    const GPFit model = load_model(model_path);
    const auto table = read_points(data_path, false);
    const Eigen::VectorXd y = predict(model, table.points);
    std::cout << "prediction\n";
    for (Eigen::Index i = 0; i < y.size(); ++i) std::cout << csv::num(y(i)) << '\n';
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Simulation study");
  bench->require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  bool quiet = false;
  auto* bench_run = bench->add_subcommand("run", "Run the study and write records.csv and summary.csv");
  bench_run->add_option("--config", config_path, "JSON configuration")->required();
  bench_run->add_option("--out", out_dir, "Output directory")->required();
  bench_run->add_option("--jobs", jobs, "Worker threads");
  bench_run->add_flag("--quiet", quiet, "No progress output");
  bench_run->callback([&] {
    const ExperimentConfig cfg = load_config(config_path);
    RunOptions opts;
    opts.jobs = jobs;
    if (!quiet) opts.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
    const auto records = run_experiment(cfg, std::filesystem::path(out_dir), opts);
    std::cout << records.size() << " records written to " << out_dir << '\n';
  });
  std::string records_path;
  auto* bench_summarize = bench->add_subcommand("summarize", "Summary table from a records file");
  bench_summarize->add_option("--records", records_path, "records.csv")->required();
  bench_summarize->add_option("--out", out_path, "Output file (default stdout)");
  bench_summarize->callback([&] {
    write_text(out_path, summary_to_csv(summarize(records_from_csv(read_text(records_path)))));
  });
  std::string estimate_path;
  std::string target_path;
  auto* bench_rmse = bench->add_subcommand("corr-rmse", "Root sum of squared lower-triangle differences");
  bench_rmse->add_option("--estimate", estimate_path, "Estimated matrix CSV")->required();
  bench_rmse->add_option("--target", target_path, "Reference matrix CSV")->required();
  bench_rmse->callback([&] {
    std::cout << csv::num(rmse_corr(read_matrix_csv(estimate_path), read_matrix_csv(target_path))) << '\n';
  });
  auto* bench_q2 = bench->add_subcommand("q2", "Q^2 from a CSV with columns y_true,y_pred");
  bench_q2->add_option("--data", data_path, "CSV file")->required();
  bench_q2->callback([&] {
    std::vector<double> yt;
    std::vector<double> yp;
    const auto rows = csv::lines(read_text(data_path));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto cells = csv::split(rows[r]);
      if (cells.size() != 2) throw FormatError("expected two columns y_true,y_pred");
      yt.push_back(csv::to_double(cells[0]));
      yp.push_back(csv::to_double(cells[1]));
    }
    std::cout << csv::num(q_squared(yt, yp)) << '\n';
  });
  auto* bench_validate = bench->add_subcommand("validate-config", "Check a configuration file");
  bench_validate->add_option("--config", config_path, "JSON configuration")->required();
  bench_validate->callback([&] {
    const ExperimentConfig cfg = load_config(config_path);
    std::cout << config_to_json(cfg) << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const mixgp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
