#include "erc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "erc/errors.hpp"

namespace erc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    auto t = trim(cur);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

}  // namespace

LabelMap RunConfig::label_map() const {
  if (dataset == "custom") {
    if (labels.empty()) throw ConfigError("dataset = custom needs a 'labels' list");
    std::optional<std::string> ex;
    if (!excluded_label.empty()) ex = excluded_label;
    return LabelMap(labels, ex);
  }
  if (!labels.empty()) throw ConfigError("'labels' is only allowed with dataset = custom");
  return LabelMap::preset(dataset);
}

void RunConfig::validate() const {
  (void)label_map();
  loss_weights().validate();
  if (window < 2) throw ConfigError("window must be >= 2");
  if (d_model == 0 || heads == 0 || d_model % heads != 0) throw ConfigError("heads must divide d_model");
  if (ff_dim == 0) throw ConfigError("ff_dim must be positive");
  if (max_len < 3) throw ConfigError("max_len must be >= 3");
  if (position_encoding != "learned" && position_encoding != "sinusoidal") {
    throw ConfigError("position_encoding must be 'learned' or 'sinusoidal'");
  }
  if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) throw ConfigError("warmup_ratio must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0 (0 disables clipping)");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (min_freq == 0) throw ConfigError("min_freq must be >= 1");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "train_path = " << train_path.string() << '\n'
     << "dev_path = " << dev_path.string() << '\n'
     << "test_path = " << test_path.string() << '\n'
     << "dataset = " << dataset << '\n'
     << "labels = " << join(labels) << '\n'
     << "excluded_label = " << excluded_label << '\n'
     << "min_freq = " << min_freq << '\n'
     << "max_len = " << max_len << '\n'
     << "d_model = " << d_model << '\n'
     << "encoder_layers = " << encoder_layers << '\n'
     << "decoder_layers = " << decoder_layers << '\n'
     << "heads = " << heads << '\n'
     << "ff_dim = " << ff_dim << '\n'
     << "position_encoding = " << position_encoding << '\n'
     << "dialog_layers = " << dialog_layers << '\n'
     << "dialog_positions = " << b(dialog_positions) << '\n'
     << "window = " << window << '\n'
     << "alpha = " << fmt_double(alpha) << '\n'
     << "beta = " << fmt_double(beta) << '\n'
     << "tau = " << fmt_double(tau) << '\n'
     << "scl_variant = " << to_string(scl_variant) << '\n'
     << "scl_normalize = " << b(scl_normalize) << '\n'
     << "lr = " << fmt_double(lr) << '\n'
     << "warmup_ratio = " << fmt_double(warmup_ratio) << '\n'
     << "weight_decay = " << fmt_double(weight_decay) << '\n'
     << "adam_beta1 = " << fmt_double(adam_beta1) << '\n'
     << "adam_beta2 = " << fmt_double(adam_beta2) << '\n'
     << "adam_eps = " << fmt_double(adam_eps) << '\n'
     << "clip_norm = " << fmt_double(clip_norm) << '\n'
     << "epochs = " << epochs << '\n'
     << "shuffle = " << b(shuffle) << '\n';
  os << "seeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
  os << '\n'
     << "use_gen = " << b(toggles.use_gen) << '\n'
     << "use_scl = " << b(toggles.use_scl) << '\n'
     << "use_speaker = " << b(toggles.use_speaker) << '\n'
     << "use_dialog_trans = " << b(toggles.use_dialog_trans) << '\n'
     << "out_dir = " << out_dir.string() << '\n';
  return os.str();
}

RunConfig RunConfig::from_text(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig c;
  auto path_of = [&](const std::string& v) -> std::filesystem::path {
    if (v.empty()) return {};
    std::filesystem::path p(v);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
  };
  using Setter = std::function<void(const std::string& key, const std::string& v)>;
  auto size_setter = [](std::size_t& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_uint(k, v); };
  };
  auto double_setter = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_double(k, v); };
  };
  auto bool_setter = [](bool& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = parse_bool(k, v); };
  };
  const std::map<std::string, Setter> setters{
      {"train_path", [&](const std::string&, const std::string& v) { c.train_path = path_of(v); }},
      {"dev_path", [&](const std::string&, const std::string& v) { c.dev_path = path_of(v); }},
      {"test_path", [&](const std::string&, const std::string& v) { c.test_path = path_of(v); }},
      {"out_dir", [&](const std::string&, const std::string& v) { c.out_dir = path_of(v); }},
      {"dataset", [&](const std::string&, const std::string& v) { c.dataset = v; }},
      {"labels", [&](const std::string&, const std::string& v) { c.labels = split_list(v); }},
      {"excluded_label", [&](const std::string&, const std::string& v) { c.excluded_label = v; }},
      {"position_encoding", [&](const std::string&, const std::string& v) { c.position_encoding = v; }},
      {"scl_variant", [&](const std::string&, const std::string& v) { c.scl_variant = parse_scl_variant(v); }},
      {"seeds",
       [&](const std::string& k, const std::string& v) {
         c.seeds.clear();
         for (const auto& s : split_list(v)) c.seeds.push_back(parse_uint(k, s));
       }},
      {"min_freq", size_setter(c.min_freq)},
      {"max_len", size_setter(c.max_len)},
      {"d_model", size_setter(c.d_model)},
      {"encoder_layers", size_setter(c.encoder_layers)},
      {"decoder_layers", size_setter(c.decoder_layers)},
      {"heads", size_setter(c.heads)},
      {"ff_dim", size_setter(c.ff_dim)},
      {"dialog_layers", size_setter(c.dialog_layers)},
      {"window", size_setter(c.window)},
      {"epochs", size_setter(c.epochs)},
      {"alpha", double_setter(c.alpha)},
      {"beta", double_setter(c.beta)},
      {"tau", double_setter(c.tau)},
      {"lr", double_setter(c.lr)},
      {"warmup_ratio", double_setter(c.warmup_ratio)},
      {"weight_decay", double_setter(c.weight_decay)},
      {"adam_beta1", double_setter(c.adam_beta1)},
      {"adam_beta2", double_setter(c.adam_beta2)},
      {"adam_eps", double_setter(c.adam_eps)},
      {"clip_norm", double_setter(c.clip_norm)},
      {"dialog_positions", bool_setter(c.dialog_positions)},
      {"scl_normalize", bool_setter(c.scl_normalize)},
      {"shuffle", bool_setter(c.shuffle)},
      {"use_gen", bool_setter(c.toggles.use_gen)},
      {"use_scl", bool_setter(c.toggles.use_scl)},
      {"use_speaker", bool_setter(c.toggles.use_speaker)},
      {"use_dialog_trans", bool_setter(c.toggles.use_dialog_trans)},
  };

  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto value = trim(std::string_view(t).substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second(key, value);
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path.parent_path());
}

}  // namespace erc
