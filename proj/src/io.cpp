#include "drot/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace drot::io {

namespace {

using OrderedJson = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream input(path, std::ios::binary);
  if (!input) {
    throw InvalidProblem("cannot open file: " + path);
  }
  std::ostringstream buffer;
  buffer << input.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream output(path, std::ios::binary);
  if (!output) {
    throw InvalidProblem("cannot write file: " + path);
  }
  output << content;
}

Vector parse_vector(const OrderedJson& node, const std::string& field) {
  if (!node.is_array() || node.empty()) {
    throw InvalidProblem("field '" + field + "' must be a nonempty array of numbers");
  }
  Vector out(node.size());
  Index i = 0;
  for (const auto& item : node) {
    if (!item.is_number()) {
      throw InvalidProblem("field '" + field + "' entry " + std::to_string(i) +
                           " is not a number");
    }
    out[i++] = item.get<double>();
  }
  return out;
}

Matrix parse_matrix(const OrderedJson& node, const std::string& field) {
  if (!node.is_array() || node.empty()) {
    throw InvalidProblem("field '" + field + "' must be a nonempty array of rows");
  }
  const Index rows = static_cast<Index>(node.size());
  Index cols = -1;
  Matrix out;
  Index i = 0;
  for (const auto& row : node) {
    const Vector values = parse_vector(row, field + "[" + std::to_string(i) + "]");
    if (cols < 0) {
      cols = values.size();
      out.resize(rows, cols);
    } else if (values.size() != cols) {
      throw InvalidProblem("field '" + field + "' row " + std::to_string(i) +
                           " has inconsistent length");
    }
    out.row(i++) = values.transpose();
  }
  return out;
}

OrderedJson vector_to_json(const Vector& values) {
  OrderedJson out = OrderedJson::array();
  for (Index i = 0; i < values.size(); ++i) out.push_back(values[i]);
  return out;
}

OrderedJson matrix_to_json(const Matrix& values) {
  OrderedJson out = OrderedJson::array();
  for (Index i = 0; i < values.rows(); ++i) {
    out.push_back(vector_to_json(values.row(i).transpose()));
  }
  return out;
}

OrderedJson parse_json(const std::string& text) {
  try {
    return OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw InvalidProblem("parse error at byte " + std::to_string(err.byte) + ": " + err.what());
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  const std::to_chars_result result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

ProblemInstance parse_problem(const std::string& text) {
  const OrderedJson root = parse_json(text);
  if (!root.is_object()) throw InvalidProblem("problem file must be a JSON object");
  for (const char* field : {"a", "b", "cost"}) {
    if (!root.contains(field)) {
      throw InvalidProblem(std::string("missing field '") + field + "'");
    }
  }
  Measure a{parse_vector(root["a"], "a")};
  Measure b{parse_vector(root["b"], "b")};

  const OrderedJson& cost_node = root["cost"];
  if (!cost_node.is_object()) {
    throw InvalidProblem("field 'cost' must be an object with 'dense' or 'sqeuclidean'");
  }
  if (cost_node.contains("dense")) {
    return make_problem(std::move(a), std::move(b),
                        CostMatrix(parse_matrix(cost_node["dense"], "cost.dense")));
  }
  if (cost_node.contains("sqeuclidean")) {
    const OrderedJson& points = cost_node["sqeuclidean"];
    if (!points.is_object() || !points.contains("x") || !points.contains("y")) {
      throw InvalidProblem("field 'cost.sqeuclidean' needs point lists 'x' and 'y'");
    }
    return make_problem(std::move(a), std::move(b),
                        sqeuclidean_cost(parse_matrix(points["x"], "cost.sqeuclidean.x"),
                                         parse_matrix(points["y"], "cost.sqeuclidean.y")));
  }
  throw InvalidProblem("field 'cost' must contain 'dense' or 'sqeuclidean'");
}

ProblemInstance read_problem(const std::string& path) { return parse_problem(read_file(path)); }

void write_problem(const std::string& path, const ProblemInstance& problem) {
  OrderedJson root;
  root["a"] = vector_to_json(problem.a.weights());
  root["b"] = vector_to_json(problem.b.weights());
  root["cost"] = OrderedJson{{"dense", matrix_to_json(problem.cost.entries())}};
  write_file(path, root.dump(2) + "\n");
}

void write_plan_csv(const std::string& path, const TransportPlan& plan) {
  std::string content = "i,j,value\n";
  for (const TransportPlan::Entry& e : plan.entries()) {
    content += std::to_string(e.i);
    content += ',';
    content += std::to_string(e.j);
    content += ',';
    content += format_double(e.value);
    content += '\n';
  }
  write_file(path, content);
}

TransportPlan read_plan_csv(const std::string& path, Index rows, Index cols) {
  std::istringstream input(read_file(path));
  std::string line;
  if (!std::getline(input, line) || line != "i,j,value") {
    throw InvalidProblem("plan file must start with header 'i,j,value': " + path);
  }
  std::vector<TransportPlan::Entry> entries;
  long line_number = 1;
  while (std::getline(input, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    if (first == std::string::npos || second == std::string::npos) {
      throw InvalidProblem("malformed plan line " + std::to_string(line_number));
    }
    TransportPlan::Entry entry{};
    try {
      entry.i = std::stol(line.substr(0, first));
      entry.j = std::stol(line.substr(first + 1, second - first - 1));
    } catch (const std::exception&) {
      throw InvalidProblem("malformed plan indices on line " + std::to_string(line_number));
    }
    const std::string value_text = line.substr(second + 1);
    const char* begin = value_text.data();
    const char* end = begin + value_text.size();
    const std::from_chars_result parsed = std::from_chars(begin, end, entry.value);
    if (parsed.ec != std::errc() || parsed.ptr != end) {
      throw InvalidProblem("malformed plan value on line " + std::to_string(line_number));
    }
    entries.push_back(entry);
  }
  return TransportPlan::from_triplets(rows, cols, std::move(entries));
}

Summary make_summary(const ProblemInstance& problem, const SolveResult& result) {
  Summary summary;
  summary.primal_objective = result.primal_objective;
  summary.dual_objective = result.dual_objective;
  summary.feasibility_error = result.feasibility_error;
  summary.sweeps = result.sweeps;
  summary.nnz = result.plan.nnz();
  const Vector dev_a = problem.a.weights() - result.plan.row_sums();
  for (Index i = 0; i < dev_a.size(); ++i) {
    summary.mass_destroyed += std::max(dev_a[i], 0.0);
    summary.mass_created += std::max(-dev_a[i], 0.0);
  }
  return summary;
}

void write_summary_json(const std::string& path, const Summary& summary) {
  OrderedJson root;
  root["primal_objective"] = summary.primal_objective;
  root["dual_objective"] = summary.dual_objective;
  root["feasibility_error"] = summary.feasibility_error;
  root["sweeps"] = summary.sweeps;
  root["nnz"] = summary.nnz;
  root["mass_created"] = summary.mass_created;
  root["mass_destroyed"] = summary.mass_destroyed;
  write_file(path, root.dump(2) + "\n");
}

void write_potentials_json(const std::string& path, const DualPotentials& potentials) {
  OrderedJson root;
  root["f"] = vector_to_json(potentials.f);
  root["g"] = vector_to_json(potentials.g);
  if (potentials.c1) root["c1"] = vector_to_json(*potentials.c1);
  if (potentials.c2) root["c2"] = vector_to_json(*potentials.c2);
  write_file(path, root.dump(2) + "\n");
}

DualPotentials read_potentials_json(const std::string& path) {
  const OrderedJson root = parse_json(read_file(path));
  if (!root.is_object() || !root.contains("f") || !root.contains("g")) {
    throw InvalidProblem("potentials file needs fields 'f' and 'g'");
  }
  DualPotentials out;
  out.f = parse_vector(root["f"], "f");
  out.g = parse_vector(root["g"], "g");
  if (root.contains("c1")) out.c1 = parse_vector(root["c1"], "c1");
  if (root.contains("c2")) out.c2 = parse_vector(root["c2"], "c2");
  return out;
}

std::string diagnostics_to_json(const DiagnosticsReport& report) {
  OrderedJson root;
  root["kkt_stationarity_f"] = report.kkt_stationarity_f;
  root["kkt_stationarity_g"] = report.kkt_stationarity_g;
  root["complementary_slackness"] = report.complementary_slackness;
  root["duality_gap"] = report.duality_gap;
  root["feasibility_error"] = report.feasibility_error;
  root["marginal_dev_a"] = vector_to_json(report.marginal_dev_a);
  root["marginal_dev_b"] = vector_to_json(report.marginal_dev_b);
  root["mass_created"] = report.mass_created;
  root["mass_destroyed"] = report.mass_destroyed;
  root["support_size"] = report.support_size;
  return root.dump(2);
}

}  // namespace drot::io
