#include "coldstart/sweep_config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace coldstart {

namespace {

namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) {
  throw ParseError(0, "[" + section + "] " + key + ": " + what);
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

template <typename T>
T number(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string text = trimmed(raw);
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    fail(section, key, "expected a number, got '" + raw + "'");
  }
  return value;
}

bool boolean(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string text = trimmed(raw);
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  fail(section, key, "expected true or false, got '" + raw + "'");
}

std::vector<std::string> list(const std::string& raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= raw.size()) {
    const auto comma = raw.find(',', start);
    const std::string piece = trimmed(raw.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Visits every key of `section`, rejecting those not in `known`.
template <typename Fn>
void each_key(const pt::ptree& tree, const std::string& section,
              const std::set<std::string>& known, Fn&& fn) {
  for (const auto& [key, node] : tree) {
    if (!node.empty()) fail(section, key, "nested keys are not supported");
    if (!known.empty() && !known.count(key)) fail(section, key, "unknown key");
    const std::string value = node.template get_value<std::string>();
    try {
      fn(key, value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(section, key, e.what());
    }
  }
}

void read_sweep(const pt::ptree& tree, SweepConfig& sweep) {
  const std::string s = "sweep";
  each_key(tree, s,
           {"budgets", "methods", "estimator", "items", "repeats", "seed", "selection_ridge",
            "estimation_ridge", "similarity_gamma", "clamp", "thinning_cap", "cluster_mode",
            "clusters", "whiten"},
           [&](const std::string& key, const std::string& value) {
             if (key == "budgets") {
               sweep.budgets.clear();
               for (const auto& b : list(value)) {
                 // FIRST:LAST:STEP expands to an inclusive range.
                 const auto c1 = b.find(':');
                 if (c1 == std::string::npos) {
                   sweep.budgets.push_back(number<std::size_t>(s, key, b));
                   continue;
                 }
                 const auto c2 = b.find(':', c1 + 1);
                 if (c2 == std::string::npos) fail(s, key, "range '" + b + "' needs FIRST:LAST:STEP");
                 const auto first = number<std::size_t>(s, key, b.substr(0, c1));
                 const auto last = number<std::size_t>(s, key, b.substr(c1 + 1, c2 - c1 - 1));
                 const auto step = number<std::size_t>(s, key, b.substr(c2 + 1));
                 if (step == 0 || last < first) fail(s, key, "empty range '" + b + "'");
                 for (std::size_t v = first; v <= last; v += step) sweep.budgets.push_back(v);
               }
             } else if (key == "methods") {
               sweep.methods.clear();
               for (const auto& m : list(value)) sweep.methods.push_back(parse_method(m));
             } else if (key == "estimator") {
               sweep.estimator = parse_estimator(trimmed(value));
             } else if (key == "items") {
               sweep.n_items_evaluated = number<std::size_t>(s, key, value);
             } else if (key == "repeats") {
               sweep.repeats = number<std::size_t>(s, key, value);
             } else if (key == "seed") {
               sweep.seed = number<std::uint64_t>(s, key, value);
             } else if (key == "selection_ridge") {
               sweep.selection_ridge = number<double>(s, key, value);
             } else if (key == "estimation_ridge") {
               sweep.estimation_ridge = number<double>(s, key, value);
             } else if (key == "similarity_gamma") {
               sweep.similarity_gamma = number<double>(s, key, value);
             } else if (key == "clamp") {
               sweep.clamp_predictions = boolean(s, key, value);
             } else if (key == "thinning_cap") {
               sweep.thinning_cap = number<std::size_t>(s, key, value);
             } else if (key == "cluster_mode") {
               const std::string mode = trimmed(value);
               if (mode == "proportional") sweep.cluster_mode = ClusterMode::proportional;
               else if (mode == "one_per_cluster") sweep.cluster_mode = ClusterMode::one_per_cluster;
               else fail(s, key, "expected proportional or one_per_cluster");
             } else if (key == "clusters") {
               sweep.clusters = number<std::size_t>(s, key, value);
             } else if (key == "whiten") {
               sweep.whiten = boolean(s, key, value);
             }
           });
}

void read_training(const std::string& s, const std::string& key, const std::string& value,
                   TrainConfig& training) {
  if (key == "train_k") training.k = number<std::size_t>(s, key, value);
  else if (key == "train_epochs") training.epochs = number<std::size_t>(s, key, value);
  else if (key == "train_learning_rate") training.base_learning_rate = number<double>(s, key, value);
  else if (key == "train_l2") training.l2_penalty = number<double>(s, key, value);
  else if (key == "train_seed") training.seed = number<std::uint64_t>(s, key, value);
}

const std::set<std::string> kTrainingKeys = {"train_k", "train_epochs", "train_learning_rate",
                                             "train_l2", "train_seed"};

SyntheticSweepConfig read_synthetic(const pt::ptree& tree) {
  const std::string s = "synthetic";
  SyntheticSweepConfig out;
  std::set<std::string> known = {"users", "items", "new_items", "k", "raters_per_item", "noise",
                                 "sigma", "sigma_min", "sigma_max", "factor_scale", "isotropic",
                                 "quantize", "seed", "split_seed", "true_variances", "train_model"};
  known.insert(kTrainingKeys.begin(), kTrainingKeys.end());
  auto& d = out.data;
  each_key(tree, s, known, [&](const std::string& key, const std::string& value) {
    if (key == "users") d.n_users = number<std::size_t>(s, key, value);
    else if (key == "items") d.n_items = number<std::size_t>(s, key, value);
    else if (key == "new_items") out.new_items = number<std::size_t>(s, key, value);
    else if (key == "k") d.k = number<std::size_t>(s, key, value);
    else if (key == "raters_per_item") d.raters_per_item = number<std::size_t>(s, key, value);
    else if (key == "noise") {
      const std::string kind = trimmed(value);
      if (kind == "iid") d.noise = NoiseKind::iid;
      else if (kind == "per_user") d.noise = NoiseKind::per_user;
      else fail(s, key, "expected iid or per_user");
    } else if (key == "sigma") d.sigma = number<double>(s, key, value);
    else if (key == "sigma_min") d.sigma_min = number<double>(s, key, value);
    else if (key == "sigma_max") d.sigma_max = number<double>(s, key, value);
    else if (key == "factor_scale") d.factor_scale = number<double>(s, key, value);
    else if (key == "isotropic") d.isotropic = boolean(s, key, value);
    else if (key == "quantize") d.quantize = boolean(s, key, value);
    else if (key == "seed") d.seed = number<std::uint64_t>(s, key, value);
    else if (key == "split_seed") out.split_seed = number<std::uint64_t>(s, key, value);
    else if (key == "true_variances") out.true_variances = boolean(s, key, value);
    else if (key == "train_model") out.train_model = boolean(s, key, value);
    else read_training(s, key, value, out.training);
  });
  return out;
}

DataSource read_data(const pt::ptree& tree) {
  const std::string s = "data";
  DataSource out;
  std::set<std::string> known = {"ratings", "format", "scale", "heldout_items", "split_seed", "model"};
  known.insert(kTrainingKeys.begin(), kTrainingKeys.end());
  each_key(tree, s, known, [&](const std::string& key, const std::string& value) {
    if (key == "ratings") out.ratings = trimmed(value);
    else if (key == "format") out.format = parse_format(trimmed(value));
    else if (key == "scale") out.scale = parse_scale(trimmed(value));
    else if (key == "heldout_items") out.heldout_items = number<std::size_t>(s, key, value);
    else if (key == "split_seed") out.split_seed = number<std::uint64_t>(s, key, value);
    else if (key == "model") out.model = std::filesystem::path(trimmed(value));
    else read_training(s, key, value, out.training);
  });
  if (out.ratings.empty()) fail(s, "ratings", "missing");
  if (out.heldout_items == 0) fail(s, "heldout_items", "missing or zero");
  return out;
}

}  // namespace

SweepFile parse_sweep_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.line(), e.message());
  }
  SweepFile out;
  bool saw_sweep = false;
  for (const auto& [section, tree] : root) {
    if (tree.empty()) throw ParseError(0, "key '" + section + "' outside any section");
    if (section == "sweep") {
      read_sweep(tree, out.sweep);
      saw_sweep = true;
    } else if (section == "estimators") {
      each_key(tree, section, {}, [&](const std::string& key, const std::string& value) {
        out.sweep.estimator_by_method[parse_method(key)] = parse_estimator(trimmed(value));
      });
    } else if (section == "synthetic") {
      out.synthetic = read_synthetic(tree);
    } else if (section == "data") {
      out.data = read_data(tree);
    } else {
      throw ParseError(0, "unknown section [" + section + "]");
    }
  }
  if (!saw_sweep) throw ParseError(0, "missing [sweep] section");
  if (out.synthetic && out.data) throw ParseError(0, "give either [synthetic] or [data], not both");
  try {
    validate(out.sweep);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, std::string("[sweep] ") + e.what());
  }
  return out;
}

SweepFile load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_sweep_config(in);
}

}  // namespace coldstart
