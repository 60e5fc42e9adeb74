#include "smci/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace smci::io {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(strip(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(strip(cur));
  return out;
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!strip(line).empty()) out.push_back(strip(line));
  }
  return out;
}

int parse_int(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + what + ": '" +
                                s + "'");
  }
}

double parse_double(const std::string& s, const char* what) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("cannot parse ") + what + ": '" +
                                s + "'");
  }
}

std::string point_list(const std::vector<space::SamplePoint>& pts) {
  std::string out;
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += space::to_string(pts[i]);
  }
  return out;
}

std::string limit_list(const std::vector<double>& vs) {
  std::string out;
  for (size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ' ';
    out += fixed6(vs[i]);
  }
  return out;
}

json require(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw std::invalid_argument(std::string("missing JSON key: ") + key);
  }
  return j.at(key);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json parse_json(const std::string& text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot write file: " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw std::invalid_argument("cannot write file: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::invalid_argument("cannot move file into place: " + path);
  }
}

json partition_to_json(const space::OrderedPartition& partition) {
  json blocks = json::array();
  for (const auto& b : partition.blocks) {
    json jb = json::array();
    for (const auto& z : b) jb.push_back(json::array({z.x, z.y}));
    blocks.push_back(std::move(jb));
  }
  return blocks;
}

space::OrderedPartition partition_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument("partition JSON must be a nonempty array of "
                                "blocks");
  }
  std::vector<space::Block> blocks;
  int n = 0;
  int m = 0;
  for (const auto& jb : j) {
    if (!jb.is_array() || jb.empty()) {
      throw std::invalid_argument("each block must be a nonempty array of "
                                  "[x, y] pairs");
    }
    space::Block b;
    for (const auto& jp : jb) {
      if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number_integer() ||
          !jp[1].is_number_integer()) {
        throw std::invalid_argument("each point must be an [x, y] integer "
                                    "pair");
      }
      const int x = jp[0].get<int>();
      const int y = jp[1].get<int>();
      if (x < 0 || y < 0) {
        throw std::invalid_argument("point coordinates must be >= 0");
      }
      n = std::max(n, x);
      m = std::max(m, y);
      b.push_back({x, y});
    }
    blocks.push_back(std::move(b));
  }
  return space::explicit_partition(space::SampleSpace(n, m), blocks);
}

space::OrderedPartition load_partition(const std::string& path) {
  return partition_from_json(parse_json(read_text(path), path));
}

std::string table_to_csv(const engine::LowerLimitTable& table) {
  const space::SampleSpace s(table.n, table.m);
  std::string out = "x,y,lower\n";
  for (int i = 0; i < s.size(); ++i) {
    const auto& z = s.points()[i];
    out += std::to_string(z.x) + "," + std::to_string(z.y) + "," +
           fixed6(table.point_limits[i]) + "\n";
  }
  return out;
}

engine::LowerLimitTable table_from_csv(const std::string& text) {
  const auto lines = nonempty_lines(text);
  if (lines.empty() || split_line(lines[0]) !=
                           std::vector<std::string>{"x", "y", "lower"}) {
    throw std::invalid_argument("table CSV must start with header x,y,lower");
  }
  std::map<std::pair<int, int>, double> cells;
  int n = 0;
  int m = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_line(lines[i]);
    if (f.size() != 3) {
      throw std::invalid_argument("table CSV rows need 3 fields, line " +
                                  std::to_string(i + 1));
    }
    const int x = parse_int(f[0], "x");
    const int y = parse_int(f[1], "y");
    if (x < 0 || y < 0) {
      throw std::invalid_argument("coordinates must be >= 0, line " +
                                  std::to_string(i + 1));
    }
    if (!cells.emplace(std::make_pair(x, y), parse_double(f[2], "lower"))
             .second) {
      throw std::invalid_argument("duplicate point, line " +
                                  std::to_string(i + 1));
    }
    n = std::max(n, x);
    m = std::max(m, y);
  }
  if (n < 1 || m < 1) {
    throw std::invalid_argument("table CSV describes a degenerate design");
  }
  const space::SampleSpace s(n, m);
  if (static_cast<int>(cells.size()) != s.size()) {
    throw std::invalid_argument("table CSV does not cover the full lattice");
  }

  engine::LowerLimitTable t;
  t.n = n;
  t.m = m;
  t.alpha = std::numeric_limits<double>::quiet_NaN();
  t.point_limits.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const auto& z = s.points()[i];
    t.point_limits[i] = cells.at({z.x, z.y});
  }
  // CSV carries no block structure; regroup by equal limit, descending.
  std::vector<double> values = t.point_limits;
  std::sort(values.begin(), values.end(), std::greater<>());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  t.partition.n = n;
  t.partition.m = m;
  for (double v : values) {
    space::Block b;
    for (int i = 0; i < s.size(); ++i) {
      if (t.point_limits[i] == v) b.push_back(s.points()[i]);
    }
    t.partition.blocks.push_back(std::move(b));
    t.block_limits.push_back(v);
  }
  return t;
}

json table_to_json(const engine::LowerLimitTable& table) {
  json j;
  j["shape"] = {{"n", table.n}, {"m", table.m}};
  j["alpha"] = table.alpha;
  j["partition"] = partition_to_json(table.partition);
  j["limits"] = table.block_limits;
  return j;
}

engine::LowerLimitTable table_from_json(const json& j) {
  const json shape = require(j, "shape");
  engine::LowerLimitTable t;
  t.n = require(shape, "n").get<int>();
  t.m = require(shape, "m").get<int>();
  t.alpha = require(j, "alpha").get<double>();
  t.partition = partition_from_json(require(j, "partition"));
  if (t.partition.n != t.n || t.partition.m != t.m) {
    throw std::invalid_argument("partition does not match the declared shape");
  }
  const json limits = require(j, "limits");
  if (!limits.is_array() ||
      static_cast<int>(limits.size()) != t.partition.block_count()) {
    throw std::invalid_argument("need exactly one limit per block");
  }
  for (const auto& v : limits) {
    if (!v.is_number()) throw std::invalid_argument("limits must be numbers");
    t.block_limits.push_back(v.get<double>());
  }
  const space::SampleSpace s(t.n, t.m);
  const auto bix = space::block_index_by_point(s, t.partition);
  t.point_limits.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    t.point_limits[i] = t.block_limits[bix[i]];
  }
  return t;
}

engine::LowerLimitTable load_table(const std::string& path) {
  const std::string text = read_text(path);
  if (ends_with(path, ".json")) return table_from_json(parse_json(text, path));
  return table_from_csv(text);
}

std::string trace_to_csv(const std::vector<barnard::BuildStep>& steps) {
  std::string out =
      "step,block,neighbors,candidates,candidate_limits,tie_merged,limit\n";
  for (const auto& st : steps) {
    out += std::to_string(st.step) + ",\"" + point_list(st.block) + "\",\"" +
           point_list(st.neighbors) + "\",\"" + point_list(st.candidates) +
           "\",\"" + limit_list(st.candidate_limits) + "\"," +
           (st.tie_merged ? "1" : "0") + "," + fixed6(st.block_limit) + "\n";
  }
  return out;
}

std::string study_to_csv(const med::DoseStudy& study) {
  std::string out = "dose,x,n\n";
  out += "0," + std::to_string(study.control.y) + "," +
         std::to_string(study.control.m) + "\n";
  for (size_t i = 0; i < study.doses.size(); ++i) {
    out += std::to_string(i + 1) + "," + std::to_string(study.doses[i].x) +
           "," + std::to_string(study.doses[i].n) + "\n";
  }
  return out;
}

med::DoseStudy study_from_csv(const std::string& text) {
  const auto lines = nonempty_lines(text);
  const std::vector<std::string> hdr =
      lines.empty() ? std::vector<std::string>{} : split_line(lines[0]);
  if (hdr != std::vector<std::string>{"dose", "x", "n"} &&
      hdr != std::vector<std::string>{"dose_index", "x", "n"}) {
    throw std::invalid_argument("study CSV must start with header dose,x,n");
  }
  std::map<int, std::pair<int, int>> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_line(lines[i]);
    if (f.size() != 3) {
      throw std::invalid_argument("study CSV rows need 3 fields, line " +
                                  std::to_string(i + 1));
    }
    const int dose = parse_int(f[0], "dose");
    if (!rows.emplace(dose, std::make_pair(parse_int(f[1], "x"),
                                           parse_int(f[2], "n")))
             .second) {
      throw std::invalid_argument("duplicate dose row, line " +
                                  std::to_string(i + 1));
    }
  }
  if (!rows.count(0)) {
    throw std::invalid_argument("study CSV needs a control row (dose 0)");
  }
  med::DoseStudy study;
  study.control.y = rows.at(0).first;
  study.control.m = rows.at(0).second;
  for (int d = 1; rows.count(d); ++d) {
    study.doses.push_back({rows.at(d).first, rows.at(d).second});
  }
  if (rows.size() != study.doses.size() + 1) {
    throw std::invalid_argument("dose indices must run 0..k without gaps");
  }
  return study;
}

json study_to_json(const med::DoseStudy& study) {
  json doses = json::array();
  for (const auto& d : study.doses) {
    doses.push_back({{"x", d.x}, {"n", d.n}});
  }
  return {{"doses", std::move(doses)},
          {"control", {{"y", study.control.y}, {"m", study.control.m}}},
          {"delta", study.delta},
          {"alpha", study.alpha}};
}

med::DoseStudy study_from_json(const json& j) {
  med::DoseStudy study;
  const json doses = require(j, "doses");
  if (!doses.is_array() || doses.empty()) {
    throw std::invalid_argument("study JSON needs a nonempty doses array");
  }
  for (const auto& d : doses) {
    study.doses.push_back(
        {require(d, "x").get<int>(), require(d, "n").get<int>()});
  }
  const json control = require(j, "control");
  study.control.y = require(control, "y").get<int>();
  study.control.m = require(control, "m").get<int>();
  study.delta = j.value("delta", 0.0);
  study.alpha = j.value("alpha", 0.05);
  return study;
}

med::DoseStudy load_study(const std::string& path) {
  const std::string text = read_text(path);
  if (ends_with(path, ".json")) return study_from_json(parse_json(text, path));
  return study_from_csv(text);
}

json med_result_to_json(const med::MedResult& result,
                        const med::DoseStudy& study) {
  json doses = json::array();
  for (size_t i = 0; i < study.doses.size(); ++i) {
    doses.push_back({{"dose", i + 1},
                     {"x", study.doses[i].x},
                     {"n", study.doses[i].n},
                     {"lower", result.dose_limits[i]},
                     {"rejected", static_cast<bool>(result.rejections[i])}});
  }
  json j;
  j["alpha"] = study.alpha;
  j["delta"] = study.delta;
  j["control"] = {{"y", study.control.y}, {"m", study.control.m}};
  j["doses"] = std::move(doses);
  if (result.med > 0) {
    j["med"] = result.med;
  } else {
    j["med"] = nullptr;
  }
  return j;
}

json poisson_report_to_json(const poisson::PoissonReport& report) {
  json j;
  j["x"] = report.x;
  j["y"] = report.y;
  j["alpha"] = report.alpha;
  j["L"] = report.lower_single;
  j["U"] = report.upper_single;
  j["L1"] = report.naive;
  j["LG"] = report.improved;
  j["g_table"] = report.g_table;
  return j;
}

const char* dominance_name(verify::Dominance verdict) {
  switch (verdict) {
    case verify::Dominance::Equal:
      return "equal";
    case verify::Dominance::ADominates:
      return "A_dominates";
    case verify::Dominance::BDominates:
      return "B_dominates";
    case verify::Dominance::Incomparable:
      return "incomparable";
  }
  throw std::logic_error("unknown verdict");
}

json dominance_to_json(const verify::DominanceVerdict& verdict) {
  json j;
  j["verdict"] = dominance_name(verdict.verdict);
  if (verdict.a_strict) {
    j["a_strict"] = json::array({verdict.a_strict->x, verdict.a_strict->y});
  } else {
    j["a_strict"] = nullptr;
  }
  if (verdict.b_strict) {
    j["b_strict"] = json::array({verdict.b_strict->x, verdict.b_strict->y});
  } else {
    j["b_strict"] = nullptr;
  }
  return j;
}

json coverage_report_to_json(const verify::CoverageProfile& profile,
                             double floor) {
  json violations = json::array();
  for (size_t i = 0; i < profile.deltas.size(); ++i) {
    if (profile.coverage[i] < floor) {
      violations.push_back(
          {{"delta", profile.deltas[i]}, {"coverage", profile.coverage[i]}});
    }
  }
  json j;
  j["min_coverage"] = profile.min_coverage;
  j["argmin"] = profile.argmin_delta;
  j["violations"] = std::move(violations);
  return j;
}

json fwer_to_json(const verify::FwerEstimate& estimate) {
  json j;
  j["estimate"] = estimate.estimate;
  j["std_error"] = estimate.std_error;
  j["errors"] = estimate.errors;
  j["replicates"] = estimate.replicates;
  j["seed"] = estimate.seed;
  return j;
}

}  // namespace smci::io
