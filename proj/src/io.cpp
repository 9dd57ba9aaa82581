#include "stinla/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace stinla {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
  throw ParseError(name + ":" + std::to_string(line) + ": " + what);
}

double to_double(const std::string& s, const std::string& name, int line) {
  try {
    size_t used = 0;
    const double value = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    parse_fail(name, line, "expected a number, got '" + s + "'");
  }
}

long to_long(const std::string& s, const std::string& name, int line) {
  try {
    size_t used = 0;
    const long value = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    parse_fail(name, line, "expected an integer, got '" + s + "'");
  }
}

std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

GraphSpec parse_graph(std::istream& in, const std::string& name) {
  std::string line;
  int lineno = 0;
  GraphSpec g;
  if (!std::getline(in, line)) parse_fail(name, 1, "empty graph file");
  ++lineno;
  g.n_nodes = to_long(trim(line), name, lineno);
  if (g.n_nodes < 1) parse_fail(name, lineno, "n_nodes must be >= 1");
  g.adjacency.resize(g.n_nodes);
  std::vector<bool> seen(size_t(g.n_nodes), false);
  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = trim(line);
    if (content.empty()) continue;
    std::stringstream ss(content);
    long node = 0, degree = 0;
    if (!(ss >> node >> degree)) parse_fail(name, lineno, "expected 'node degree neighbors...'");
    if (node < 1 || node > g.n_nodes) parse_fail(name, lineno, "node index out of range");
    if (seen[size_t(node - 1)]) parse_fail(name, lineno, "duplicate node " + std::to_string(node));
    seen[size_t(node - 1)] = true;
    for (long k = 0; k < degree; ++k) {
      long nb = 0;
      if (!(ss >> nb)) parse_fail(name, lineno, "fewer neighbors than declared");
      if (nb < 1 || nb > g.n_nodes) parse_fail(name, lineno, "neighbor index out of range");
      g.adjacency[size_t(node - 1)].push_back(nb - 1);
    }
    long extra = 0;
    if (ss >> extra) parse_fail(name, lineno, "more neighbors than declared");
  }
  for (Index i = 0; i < g.n_nodes; ++i)
    if (!seen[size_t(i)]) throw InvalidGraph(name + ": node " + std::to_string(i + 1) + " has no adjacency line");
  for (auto& list : g.adjacency) std::sort(list.begin(), list.end());
  g.validate();
  return g;
}

GraphSpec parse_graph_file(const std::string& path) {
  auto in = open_or_fail(path);
  return parse_graph(in, path);
}

void write_graph_file(const std::string& path, const GraphSpec& graph) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << graph.n_nodes << "\n";
  for (Index i = 0; i < graph.n_nodes; ++i) {
    out << (i + 1) << " " << graph.adjacency[size_t(i)].size();
    for (Index nb : graph.adjacency[size_t(i)]) out << " " << (nb + 1);
    out << "\n";
  }
}

DataTable parse_data(std::istream& in, const std::string& offset_column, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(name, 1, "missing header");
  const auto header = split(trim(line), ',');
  auto column = [&](const std::string& want) -> std::optional<size_t> {
    for (size_t c = 0; c < header.size(); ++c)
      if (lower(header[c]) == lower(want)) return c;
    return std::nullopt;
  };
  const auto time_col = column("time"), space_col = column("space"), y_col = column("y");
  const auto offset_col = column(offset_column);
  if (!time_col || !space_col || !y_col) parse_fail(name, 1, "header must contain time, space, y");
  if (!offset_col) parse_fail(name, 1, "offset column '" + offset_column + "' not found in header");

  std::vector<size_t> covariate_cols;
  for (size_t c = 0; c < header.size(); ++c) {
    if (c == *time_col || c == *space_col || c == *y_col || c == *offset_col) continue;
    covariate_cols.push_back(c);
  }

  std::vector<double> ys, es;
  std::vector<ObsIndex> obs;
  std::vector<std::vector<double>> covs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto fields = split(content, ',');
    if (fields.size() != header.size()) parse_fail(name, lineno, "wrong number of fields");
    ObsIndex ix;
    ix.time = to_long(fields[*time_col], name, lineno);
    ix.space = to_long(fields[*space_col], name, lineno);
    if (ix.time < 1 || ix.space < 1) parse_fail(name, lineno, "indices are 1-based");
    obs.push_back(ix);
    ys.push_back(to_double(fields[*y_col], name, lineno));
    es.push_back(to_double(fields[*offset_col], name, lineno));
    std::vector<double> z;
    for (size_t c : covariate_cols) z.push_back(to_double(fields[c], name, lineno));
    covs.push_back(std::move(z));
  }
  if (obs.empty()) parse_fail(name, lineno, "no data rows");

  DataTable table;
  const Index d = Index(obs.size());
  table.data.y = Eigen::Map<Vector>(ys.data(), d);
  table.data.expected = Eigen::Map<Vector>(es.data(), d);
  table.data.obs = std::move(obs);
  table.covariates.resize(d, Index(covariate_cols.size()));
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < table.covariates.cols(); ++c) table.covariates(r, c) = covs[size_t(r)][size_t(c)];
  for (const auto& ix : table.data.obs) {
    table.n = std::max(table.n, ix.time);
    table.max_space = std::max(table.max_space, ix.space);
  }
  table.data.validate();
  return table;
}

DataTable parse_data_csv(const std::string& path, const std::string& offset_column) {
  auto in = open_or_fail(path);
  return parse_data(in, offset_column, path);
}

void write_data_csv(const std::string& path, const CountData& data) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "time,space,y,E\n";
  for (Index k = 0; k < data.size(); ++k)
    out << data.obs[size_t(k)].time << "," << data.obs[size_t(k)].space << "," << (long long)(data.y(k)) << ","
        << format_double(data.expected(k)) << "\n";
}

void RunConfig::validate() const {
  if (lower(likelihood) != "poisson") throw InvalidData("likelihood must be Poisson");
  if (strategy != "GA") throw Unsupported("strategy must be GA");
  if (threads < 1) throw InvalidData("threads must be >= 1");
  int interactions = 0;
  bool has_rw = false, has_besag = false;
  for (const auto& b : blocks) {
    const std::string t = lower(b.type);
    if (t.rfind("interaction", 0) == 0) ++interactions;
    if (t == "rw1" || t == "rw2") has_rw = true;
    if (t == "besag") has_besag = true;
  }
  if (interactions != 1) throw InvalidData("config must declare exactly one interaction block");
  if (!has_rw || !has_besag)
    throw InvalidData("an interaction block requires temporal (RW1/RW2) and spatial (besag) blocks");
}

int RunConfig::interaction_type() const {
  for (const auto& b : blocks) {
    const std::string t = lower(b.type);
    if (t.rfind("interaction", 0) == 0) {
      if (t.size() != 12 || t[11] < '1' || t[11] > '4') throw InvalidData("interaction type must be 1..4");
      return t[11] - '0';
    }
  }
  throw InvalidData("no interaction block");
}

int RunConfig::temporal_order() const {
  for (const auto& b : blocks) {
    const std::string t = lower(b.type);
    if (t == "rw1") return 1;
    if (t == "rw2") return 2;
  }
  throw InvalidData("no RW block");
}

RunConfig parse_config(std::istream& in, const std::string& name) {
  RunConfig config;
  std::string line;
  int lineno = 0;
  bool joint = true;
  std::vector<PcTail> tails;
  while (std::getline(in, line)) {
    ++lineno;
    std::string content = trim(line);
    const auto comment = content.find('#');
    if (comment != std::string::npos) content = trim(content.substr(0, comment));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) parse_fail(name, lineno, "expected key = value");
    const std::string key = lower(trim(content.substr(0, eq)));
    const std::string value = trim(content.substr(eq + 1));
    if (key == "block") {
      std::stringstream ss(value);
      BlockConfig block;
      ss >> block.type;
      std::string option;
      while (ss >> option) {
        const auto oeq = option.find('=');
        if (oeq == std::string::npos) parse_fail(name, lineno, "block option must be key=value");
        const std::string okey = lower(option.substr(0, oeq));
        const std::string oval = option.substr(oeq + 1);
        if (okey == "rankdef")
          block.rankdef = to_long(oval, name, lineno);
        else if (okey == "structure")
          block.structure_file = oval;
        else
          parse_fail(name, lineno, "unknown block option '" + okey + "'");
      }
      if (block.type.empty()) parse_fail(name, lineno, "block needs a type");
      config.blocks.push_back(std::move(block));
    } else if (key == "likelihood") {
      config.likelihood = value;
    } else if (key == "offset") {
      config.offset_column = value;
    } else if (key == "strategy") {
      config.strategy = value;
    } else if (key == "threads") {
      config.threads = int(to_long(value, name, lineno));
    } else if (key == "seed") {
      config.seed = std::uint64_t(to_long(value, name, lineno));
    } else if (key == "prior") {
      const std::string kind = lower(value);
      if (kind == "pc_joint")
        joint = true;
      else if (kind == "pc_independent")
        joint = false;
      else
        parse_fail(name, lineno, "prior must be pc_joint or pc_independent");
    } else if (key == "prior_u1") {
      config.prior.u1 = to_double(value, name, lineno);
    } else if (key == "prior_u2") {
      config.prior.u2 = to_double(value, name, lineno);
    } else if (key == "prior_a1") {
      config.prior.a1 = to_double(value, name, lineno);
    } else if (key == "prior_a2") {
      config.prior.a2 = to_double(value, name, lineno);
    } else if (key == "prior_tail") {
      const auto parts = split(value, ' ');
      std::vector<std::string> nums;
      for (const auto& p : parts)
        if (!p.empty()) nums.push_back(p);
      if (nums.size() != 2) parse_fail(name, lineno, "prior_tail needs 'u a'");
      tails.push_back({to_double(nums[0], name, lineno), to_double(nums[1], name, lineno)});
    } else if (key == "intercept_prec") {
      config.intercept_prec = to_double(value, name, lineno);
    } else if (key == "drop_threshold") {
      config.drop_threshold = to_double(value, name, lineno);
    } else if (key == "z_step") {
      config.z_step = to_double(value, name, lineno);
    } else if (key == "max_newton_iter") {
      config.max_newton_iter = int(to_long(value, name, lineno));
    } else {
      parse_fail(name, lineno, "unknown key '" + key + "'");
    }
  }
  config.prior.kind = joint ? PriorKind::PcJoint : PriorKind::PcIndependent;
  if (!joint) {
    if (tails.empty()) tails.assign(5, PcTail{1.0, 0.01});
    if (tails.size() == 1) tails.assign(5, tails[0]);
    config.prior.per_precision = std::move(tails);
  }
  config.validate();
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  auto in = open_or_fail(path);
  return parse_config(in, path);
}

SymMatrix parse_structure_file(const std::string& path) {
  auto in = open_or_fail(path);
  long dim = 0;
  if (!(in >> dim) || dim < 1) throw ParseError(path + ": first entry must be the dimension");
  Matrix m(dim, dim);
  for (long i = 0; i < dim; ++i)
    for (long j = 0; j < dim; ++j)
      if (!(in >> m(i, j))) throw ParseError(path + ": expected " + std::to_string(dim * dim) + " matrix entries");
  return SymMatrix(m);
}

FitArtifacts write_fit_artifacts(const std::string& out_dir, const LatentModel& model, const FitResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  FitArtifacts artifacts;

  artifacts.marginals_csv = (fs::path(out_dir) / "marginals.csv").string();
  {
    std::ofstream out(artifacts.marginals_csv);
    if (!out) throw ParseError("cannot write " + artifacts.marginals_csv);
    out << "element,block,index,mean,sd,q025,q50,q975\n";
    for (const auto& block : model.layout.blocks)
      for (Index i = 0; i < block.size; ++i) {
        const Index e = block.offset + i;
        out << (e + 1) << "," << block.name << "," << (i + 1) << "," << format_double(result.latent.mean(e)) << ","
            << format_double(result.latent.sd(e)) << "," << format_double(result.latent.q025(e)) << ","
            << format_double(result.latent.q50(e)) << "," << format_double(result.latent.q975(e)) << "\n";
      }
  }

  artifacts.hyper_csv = (fs::path(out_dir) / "hyper.csv").string();
  {
    std::ofstream out(artifacts.hyper_csv);
    if (!out) throw ParseError("cannot write " + artifacts.hyper_csv);
    out << "point,axis,step";
    for (int h = 0; h < model.n_hyper; ++h) out << ",theta" << (h + 1);
    out << ",log_post,weight\n";
    for (size_t k = 0; k < result.points.size(); ++k) {
      const auto& p = result.points[k];
      out << (k + 1) << "," << p.axis << "," << p.step;
      for (int h = 0; h < model.n_hyper; ++h) out << "," << format_double(p.theta(h));
      out << "," << format_double(p.log_post) << "," << format_double(p.weight) << "\n";
    }
  }

  using nlohmann::json;
  artifacts.criteria_json = (fs::path(out_dir) / "criteria.json").string();
  {
    json j;
    j["dic"] = result.dic;
    j["log_mlik"] = result.log_mlik;
    j["theta_mode"] = std::vector<double>(result.theta_mode.data(), result.theta_mode.data() + result.theta_mode.size());
    j["runtime"] = {{"optimize_s", result.runtime.optimize_s},
                    {"explore_s", result.runtime.explore_s},
                    {"marginals_s", result.runtime.marginals_s},
                    {"criteria_s", result.runtime.criteria_s},
                    {"total_s", result.runtime.total_s}};
    std::ofstream out(artifacts.criteria_json);
    out << j.dump(2) << "\n";
  }

  artifacts.diagnostics_json = (fs::path(out_dir) / "diagnostics.json").string();
  {
    json j;
    j["optimizer_iterations"] = result.diagnostics.optimizer_iterations;
    j["optimizer_converged"] = result.diagnostics.optimizer_converged;
    j["gradient_inf_norm"] = result.diagnostics.gradient_inf_norm;
    j["dropped_points"] = result.diagnostics.dropped_points;
    j["newton_iterations_at_mode"] = result.diagnostics.newton_iterations_at_mode;
    j["n_theta_points"] = result.points.size();
    std::ofstream out(artifacts.diagnostics_json);
    out << j.dump(2) << "\n";
  }
  return artifacts;
}

void write_truth_csv(const std::string& path, const LatentLayout& layout, const Vector& truth) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "block,index,value\n";
  for (const auto& block : layout.blocks)
    for (Index i = 0; i < block.size; ++i)
      out << block.name << "," << (i + 1) << "," << format_double(truth(block.offset + i)) << "\n";
}

void write_plot_csvs(const std::string& marginals_csv, const std::string& out_dir) {
  namespace fs = std::filesystem;
  auto in = open_or_fail(marginals_csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(marginals_csv + ": empty file");
  const auto header = split(trim(line), ',');
  std::map<std::string, size_t> col;
  for (size_t c = 0; c < header.size(); ++c) col[lower(header[c])] = c;
  for (const char* want : {"block", "index", "mean", "q025", "q50", "q975"})
    if (col.find(want) == col.end()) throw ParseError(marginals_csv + ": missing column " + want);

  fs::create_directories(out_dir);
  std::ofstream temporal((fs::path(out_dir) / "temporal.csv").string());
  std::ofstream spatial((fs::path(out_dir) / "spatial.csv").string());
  temporal << "component,index,mean,q025,q50,q975\n";
  spatial << "component,index,mean,q025,q50,q975\n";
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != header.size()) parse_fail(marginals_csv, lineno, "wrong number of fields");
    const std::string block = fields[col["block"]];
    std::ostream* target = nullptr;
    if (block == "alpha" || block == "gamma") target = &temporal;
    if (block == "delta" || block == "phi") target = &spatial;
    if (target == nullptr) continue;
    *target << block << "," << fields[col["index"]] << "," << fields[col["mean"]] << "," << fields[col["q025"]]
            << "," << fields[col["q50"]] << "," << fields[col["q975"]] << "\n";
  }
}

}  // namespace stinla
