#include "unlrec/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "unlrec/errors.hpp"

namespace unlrec {

namespace {

double parse_double(const std::string& key, const std::string& val, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ParseError("config line " + std::to_string(line) + ": bad value for " + key +
                     ": \"" + val + "\"");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& val, int line) {
  std::int64_t out = 0;
  const auto* first = val.data();
  const auto* last = val.data() + val.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ParseError("config line " + std::to_string(line) + ": bad value for " + key +
                     ": \"" + val + "\"");
  return out;
}

void apply_kv(ExperimentConfig& cfg, const std::string& key, const std::string& val,
              int line) {
  if (key == "dataset") cfg.dataset = val;
  else if (key == "test_fraction") cfg.test_fraction = parse_double(key, val, line);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, val, line));
  else if (key == "backbone") cfg.backbone.kind = backbone_kind_from_string(val);
  else if (key == "embed_dim") cfg.backbone.embed_dim = static_cast<int>(parse_int(key, val, line));
  else if (key == "layers") cfg.backbone.layers = static_cast<int>(parse_int(key, val, line));
  else if (key == "ssl_tau") cfg.backbone.ssl_tau = parse_double(key, val, line);
  else if (key == "ssl_weight") cfg.backbone.ssl_weight = parse_double(key, val, line);
  else if (key == "sgl_drop_rate") cfg.backbone.sgl_drop_rate = parse_double(key, val, line);
  else if (key == "simgcl_eps") cfg.backbone.simgcl_eps = parse_double(key, val, line);
  else if (key == "l2_reg") cfg.backbone.l2_reg = parse_double(key, val, line);
  else if (key == "iem_layers") cfg.encoder.iem_layers = static_cast<int>(parse_int(key, val, line));
  else if (key == "weighted_layers") cfg.encoder.weighted_layers = static_cast<int>(parse_int(key, val, line));
  else if (key == "mlp_layers") cfg.encoder.mlp_layers = static_cast<int>(parse_int(key, val, line));
  else if (key == "lambda_u") cfg.weights.lambda_u = parse_double(key, val, line);
  else if (key == "lambda_p") cfg.weights.lambda_p = parse_double(key, val, line);
  else if (key == "lambda_c") cfg.weights.lambda_c = parse_double(key, val, line);
  else if (key == "tau_p") cfg.weights.tau_p = parse_double(key, val, line);
  else if (key == "tau_c") cfg.weights.tau_c = parse_double(key, val, line);
  else if (key == "idm_dropout_rho") cfg.weights.dropout_rho = parse_double(key, val, line);
  else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, val, line));
  else if (key == "train_epochs") cfg.train_epochs = static_cast<int>(parse_int(key, val, line));
  else if (key == "train_lr") cfg.train_lr = parse_double(key, val, line);
  else if (key == "attack_percent") cfg.attack_percent = parse_double(key, val, line);
  else if (key == "rho_sim") cfg.rho_sim = parse_double(key, val, line);
  else if (key == "n_pretrain") cfg.n_pretrain = static_cast<int>(parse_int(key, val, line));
  else if (key == "n_train") cfg.n_train = static_cast<int>(parse_int(key, val, line));
  else if (key == "pretrain_lr") cfg.pretrain_lr = parse_double(key, val, line);
  else if (key == "finetune_epochs") cfg.finetune_epochs = static_cast<int>(parse_int(key, val, line));
  else if (key == "finetune_lr") cfg.finetune_lr = parse_double(key, val, line);
  else if (key == "top_n") cfg.top_n = static_cast<int>(parse_int(key, val, line));
  else if (key == "unlearn_edges") cfg.unlearn_edges = val;
  else
    throw ParseError("config line " + std::to_string(line) + ": unknown key \"" + key +
                     "\"");
}

void apply_line(ExperimentConfig& cfg, const std::string& raw, int line,
                const std::string& source) {
  std::string s = raw;
  if (const auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  s = s.substr(start);
  if (s.empty()) return;
  const auto eq = s.find('=');
  if (eq == std::string::npos)
    throw ParseError(source + " line " + std::to_string(line) + ": expected key=value");
  apply_kv(cfg, s.substr(0, eq), s.substr(eq + 1), line);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& source,
                                   const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    apply_line(cfg, line, line_no, source);
  }
  int ov_no = 0;
  for (const auto& ov : overrides) {
    ++ov_no;
    apply_line(cfg, ov, ov_no, "override");
  }

  if (cfg.backbone.embed_dim <= 0) throw ParseError("embed_dim must be positive");
  if (cfg.backbone.layers < 1) throw ParseError("layers must be >= 1");
  if (cfg.backbone.ssl_tau <= 0.0) throw ParseError("ssl_tau must be positive");
  if (cfg.weights.tau_p <= 0.0 || cfg.weights.tau_c <= 0.0)
    throw ParseError("temperatures must be positive");
  if (cfg.weights.lambda_u < 0 || cfg.weights.lambda_p < 0 || cfg.weights.lambda_c < 0)
    throw ParseError("loss weights must be nonnegative");
  if (cfg.weights.dropout_rho < 0.0 || cfg.weights.dropout_rho >= 1.0)
    throw ParseError("idm_dropout_rho must be in [0,1)");
  return cfg;
}

ExperimentConfig parse_config(const std::string& path,
                              const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path, overrides);
}

namespace {
std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}
}  // namespace

KvList echo_config(const ExperimentConfig& cfg) {
  KvList kv;
  kv.emplace_back("dataset", cfg.dataset);
  kv.emplace_back("test_fraction", fmt(cfg.test_fraction));
  kv.emplace_back("seed", std::to_string(cfg.seed));
  kv.emplace_back("backbone", to_string(cfg.backbone.kind));
  kv.emplace_back("embed_dim", std::to_string(cfg.backbone.embed_dim));
  kv.emplace_back("layers", std::to_string(cfg.backbone.layers));
  kv.emplace_back("ssl_tau", fmt(cfg.backbone.ssl_tau));
  kv.emplace_back("ssl_weight", fmt(cfg.backbone.ssl_weight));
  kv.emplace_back("sgl_drop_rate", fmt(cfg.backbone.sgl_drop_rate));
  kv.emplace_back("simgcl_eps", fmt(cfg.backbone.simgcl_eps));
  kv.emplace_back("l2_reg", fmt(cfg.backbone.l2_reg));
  kv.emplace_back("iem_layers", std::to_string(cfg.encoder.iem_layers));
  kv.emplace_back("weighted_layers", std::to_string(cfg.encoder.weighted_layers));
  kv.emplace_back("mlp_layers", std::to_string(cfg.encoder.mlp_layers));
  kv.emplace_back("lambda_u", fmt(cfg.weights.lambda_u));
  kv.emplace_back("lambda_p", fmt(cfg.weights.lambda_p));
  kv.emplace_back("lambda_c", fmt(cfg.weights.lambda_c));
  kv.emplace_back("tau_p", fmt(cfg.weights.tau_p));
  kv.emplace_back("tau_c", fmt(cfg.weights.tau_c));
  kv.emplace_back("idm_dropout_rho", fmt(cfg.weights.dropout_rho));
  kv.emplace_back("batch_size", std::to_string(cfg.batch_size));
  kv.emplace_back("train_epochs", std::to_string(cfg.train_epochs));
  kv.emplace_back("train_lr", fmt(cfg.train_lr));
  kv.emplace_back("attack_percent", fmt(cfg.attack_percent));
  kv.emplace_back("rho_sim", fmt(cfg.rho_sim));
  kv.emplace_back("n_pretrain", std::to_string(cfg.n_pretrain));
  kv.emplace_back("n_train", std::to_string(cfg.n_train));
  kv.emplace_back("pretrain_lr", fmt(cfg.pretrain_lr));
  kv.emplace_back("finetune_epochs", std::to_string(cfg.finetune_epochs));
  kv.emplace_back("finetune_lr", fmt(cfg.finetune_lr));
  kv.emplace_back("top_n", std::to_string(cfg.top_n));
  kv.emplace_back("unlearn_edges", cfg.unlearn_edges);
  return kv;
}

}  // namespace unlrec
