#include "mixgp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mixgp/errors.hpp"

namespace mixgp {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "mixgp-model";
constexpr int kVersion = 1;

}  // namespace

std::string serialize_model(const GPFit& fit) {
  const auto& cfg = fit.config();
  const auto& train = fit.training();
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["levels"] = train.levels();
  j["bounds"] = json::array();
  for (const auto& b : train.bounds()) j["bounds"].push_back({b.lower, b.upper});
  if (cfg.family) {
    j["family"] = {{"name", std::string(family_name(cfg.family->family))},
                   {"s", cfg.family->s},
                   {"rank", cfg.family->rank}};
  } else {
    j["family"] = nullptr;
  }
  j["lengthscales"] = cfg.lengthscales;
  j["cat_params"] = cfg.cat_params;
  j["nugget"] = cfg.nugget;
  j["corr_nugget"] = cfg.corr_nugget;
  j["standardize"] = fit.standardized();
  j["mu_hat"] = fit.mu_hat();
  j["sigma2_hat"] = fit.sigma2_hat();
  j["neg_log_lik"] = fit.neg_log_lik();
  json pts = json::array();
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& p = train.points()[i];
    pts.push_back({{"x", p.x}, {"level", p.level}, {"y", train.responses()[static_cast<Eigen::Index>(i)]}});
  }
  j["training"] = std::move(pts);
  return j.dump(2);
}

GPFit deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw FormatError("not a mixgp model file");
    if (j.at("version").get<int>() != kVersion) throw FormatError("unsupported model version");

    std::vector<Interval> bounds;
    for (const auto& b : j.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    std::vector<MixedPoint> pts;
    std::vector<double> ys;
    for (const auto& p : j.at("training")) {
      pts.push_back({p.at("x").get<std::vector<double>>(), p.at("level").get<int>()});
      ys.push_back(p.at("y").get<double>());
    }
    TrainingSet train(std::move(pts), std::move(ys), std::move(bounds), j.at("levels").get<int>());

    KernelConfig cfg;
    cfg.lengthscales = j.at("lengthscales").get<std::vector<double>>();
    cfg.cat_params = j.at("cat_params").get<std::vector<double>>();
    cfg.nugget = j.at("nugget").get<double>();
    cfg.corr_nugget = j.at("corr_nugget").get<double>();
    if (!j.at("family").is_null()) {
      const auto& f = j.at("family");
      cfg.family = FamilySpec{parse_family(f.at("name").get<std::string>()), f.at("s").get<int>(),
                              f.at("rank").get<int>()};
      cfg.family->validate();
    }
    cfg.validate();
    return condition(train, cfg, j.at("standardize").get<bool>());
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const GPFit& fit, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << serialize_model(fit) << '\n';
}

GPFit load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace mixgp
