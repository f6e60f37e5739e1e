#include "vpt/jobgen.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "vpt/diagnostic.hpp"

namespace vpt {
namespace {

constexpr std::uint64_t kMaxJobs = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

[[noreturn]] void corrupt(std::string message) { throw Error(code::kCorrupt, std::move(message)); }

// ---- TextV1 reading ---------------------------------------------------------

// Splits a line into whitespace-separated words; a double quote opens a quoted
// section (with backslash escapes) that may contain spaces.
std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::string word;
    bool in_quote = false;
    while (i < line.size() && (in_quote || line[i] != ' ')) {
      const char c = line[i];
      if (c == '"') in_quote = !in_quote;
      if (in_quote && c == '\\' && i + 1 < line.size()) {
        word += c;
        word += line[i + 1];
        i += 2;
        continue;
      }
      word += c;
      ++i;
    }
    if (in_quote) corrupt("unterminated string in line: " + std::string(line));
    words.push_back(std::move(word));
  }
  return words;
}

std::string unquote(std::string_view q) {
  std::string out;
  for (std::size_t i = 1; i + 1 < q.size(); ++i) {
    char c = q[i];
    if (c == '\\' && i + 2 < q.size()) {
      const char e = q[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default:
          out += '\\';
          out += e;
      }
      continue;
    }
    out += c;
  }
  return out;
}

bool is_quoted(std::string_view s) { return s.size() >= 2 && s.front() == '"' && s.back() == '"'; }

ValueKind infer_kind(std::string_view literal) {
  if (is_quoted(literal)) return ValueKind::Text;
  return literal.find_first_of(".eEn") == std::string_view::npos ? ValueKind::Integer
                                                                 : ValueKind::Real;
}

Value read_literal(std::string_view literal, ValueKind kind) {
  if (kind == ValueKind::Text || kind == ValueKind::File) {
    if (!is_quoted(literal)) corrupt("expected quoted value, got " + std::string(literal));
    std::string s = unquote(literal);
    return kind == ValueKind::Text ? Value::text(std::move(s)) : Value::file(std::move(s));
  }
  if (kind == ValueKind::Integer) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), v);
    if (ec != std::errc() || p != literal.data() + literal.size())
      corrupt("bad integer value " + std::string(literal));
    return Value::integer(v);
  }
  double v = 0;
  auto [p, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), v);
  if (ec != std::errc() || p != literal.data() + literal.size() || !std::isfinite(v))
    corrupt("bad real value " + std::string(literal));
  return Value::real(v);
}

RunSpec parse_text(std::string_view text, const std::map<std::string, ValueKind>& kinds) {
  RunSpec rs;
  std::map<std::string, ValueKind> axis_kind_of;
  bool header = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> words = split_words(line);
    if (!header) {
      if (words.size() != 3 || words[0] != "runspec" || words[1] != "v1" ||
          !words[2].starts_with("seed="))
        corrupt("line 1: expected `runspec v1 seed=<n>`");
      const std::string_view num = std::string_view(words[2]).substr(5);
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), rs.seed);
      if (ec != std::errc() || p != num.data() + num.size()) corrupt("line 1: bad seed");
      header = true;
      continue;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (words[0] == "values") {
      if (words.size() < 3) corrupt(where + "values line without values");
      ValueAxis axis;
      axis.name = words[1];
      auto hint = kinds.find(axis.name);
      axis.kind = hint != kinds.end() ? hint->second : infer_kind(words[2]);
      if (hint == kinds.end() && axis.kind == ValueKind::Integer) {
        for (std::size_t i = 2; i < words.size(); ++i)
          if (infer_kind(words[i]) == ValueKind::Real) axis.kind = ValueKind::Real;
      }
      for (std::size_t i = 2; i < words.size(); ++i)
        axis.values.push_back(read_literal(words[i], axis.kind));
      axis_kind_of[axis.name] = axis.kind;
      rs.axes.push_back(std::move(axis));
    } else if (words[0] == "job") {
      if (words.size() < 2) corrupt(where + "job line without id");
      JobSpec job;
      job.id = words[1];
      for (std::size_t i = 2; i < words.size(); ++i) {
        const std::size_t eq = words[i].find('=');
        if (eq == std::string::npos) corrupt(where + "binding without '='");
        std::string name = words[i].substr(0, eq);
        std::string_view literal = std::string_view(words[i]).substr(eq + 1);
        auto k = axis_kind_of.find(name);
        ValueKind kind = k != axis_kind_of.end() ? k->second : infer_kind(literal);
        job.bindings.emplace_back(std::move(name), read_literal(literal, kind));
      }
      rs.jobs.push_back(std::move(job));
    } else {
      corrupt(where + "unknown record '" + words[0] + "'");
    }
  }
  if (!header) corrupt("missing runspec header");
  return rs;
}

// ---- JsonV1 -----------------------------------------------------------------

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Integer: return v.as_integer();
    case ValueKind::Real: return v.as_real();
    default: return v.as_string();
  }
}

Value from_json(const ordered_json& j, ValueKind kind, const std::string& path) {
  switch (kind) {
    case ValueKind::Integer:
      if (!j.is_number_integer()) corrupt(path + ": expected integer");
      return Value::integer(j.get<std::int64_t>());
    case ValueKind::Real:
      if (!j.is_number()) corrupt(path + ": expected number");
      return Value::real(j.get<double>());
    case ValueKind::Text:
      if (!j.is_string()) corrupt(path + ": expected string");
      return Value::text(j.get<std::string>());
    case ValueKind::File:
      if (!j.is_string()) corrupt(path + ": expected string");
      return Value::file(j.get<std::string>());
  }
  corrupt(path + ": bad kind");
}

ValueKind infer_json_kind(const ordered_json& j) {
  if (j.is_number_integer()) return ValueKind::Integer;
  if (j.is_number()) return ValueKind::Real;
  return ValueKind::Text;
}

std::string render_json(const RunSpec& rs) {
  ordered_json doc;
  doc["version"] = 1;
  doc["seed"] = rs.seed;
  doc["axes"] = ordered_json::array();
  for (const ValueAxis& axis : rs.axes) {
    ordered_json a;
    a["name"] = axis.name;
    a["kind"] = std::string(to_string(axis.kind));
    a["values"] = ordered_json::array();
    for (const Value& v : axis.values) a["values"].push_back(to_json(v));
    doc["axes"].push_back(std::move(a));
  }
  doc["jobs"] = ordered_json::array();
  for (const JobSpec& job : rs.jobs) {
    ordered_json j;
    j["id"] = job.id;
    j["bindings"] = ordered_json::object();
    for (const auto& [name, value] : job.bindings) j["bindings"][name] = to_json(value);
    doc["jobs"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

RunSpec parse_json(std::string_view text, const std::map<std::string, ValueKind>& kinds) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    corrupt(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) corrupt("$: expected object");
  if (!doc.contains("version") || doc["version"] != 1) corrupt("$.version: expected 1");
  if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) corrupt("$.seed: expected u64");
  RunSpec rs;
  rs.seed = doc["seed"].get<std::uint64_t>();
  if (!doc.contains("axes") || !doc["axes"].is_array()) corrupt("$.axes: expected array");
  if (!doc.contains("jobs") || !doc["jobs"].is_array()) corrupt("$.jobs: expected array");
  std::map<std::string, ValueKind> kind_of;
  for (std::size_t i = 0; i < doc["axes"].size(); ++i) {
    const ordered_json& a = doc["axes"][i];
    const std::string path = "$.axes[" + std::to_string(i) + "]";
    if (!a.is_object() || !a.contains("name") || !a["name"].is_string())
      corrupt(path + ".name: expected string");
    if (!a.contains("values") || !a["values"].is_array() || a["values"].empty())
      corrupt(path + ".values: expected non-empty array");
    ValueAxis axis;
    axis.name = a["name"].get<std::string>();
    if (a.contains("kind")) {
      if (!a["kind"].is_string() || !parse_value_kind(a["kind"].get<std::string>(), axis.kind))
        corrupt(path + ".kind: unknown kind");
    } else if (auto hint = kinds.find(axis.name); hint != kinds.end()) {
      axis.kind = hint->second;
    } else {
      axis.kind = infer_json_kind(a["values"][0]);
      for (const auto& v : a["values"])
        if (v.is_number_float()) axis.kind = ValueKind::Real;
    }
    for (std::size_t k = 0; k < a["values"].size(); ++k)
      axis.values.push_back(
          from_json(a["values"][k], axis.kind, path + ".values[" + std::to_string(k) + "]"));
    kind_of[axis.name] = axis.kind;
    rs.axes.push_back(std::move(axis));
  }
  for (std::size_t i = 0; i < doc["jobs"].size(); ++i) {
    const ordered_json& j = doc["jobs"][i];
    const std::string path = "$.jobs[" + std::to_string(i) + "]";
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      corrupt(path + ".id: expected string");
    if (!j.contains("bindings") || !j["bindings"].is_object())
      corrupt(path + ".bindings: expected object");
    JobSpec job;
    job.id = j["id"].get<std::string>();
    for (const auto& [name, value] : j["bindings"].items()) {
      auto k = kind_of.find(name);
      const ValueKind kind = k != kind_of.end() ? k->second : infer_json_kind(value);
      job.bindings.emplace_back(name, from_json(value, kind, path + ".bindings." + name));
    }
    rs.jobs.push_back(std::move(job));
  }
  return rs;
}

}  // namespace

std::uint64_t index_product(std::span<const std::uint64_t> counts) {
  std::uint64_t product = 1;
  for (std::uint64_t c : counts) {
    if (c == 0) return 0;
    if (product > kMaxJobs / c) throw Error(code::kOverflow, "job count exceeds 2^63-1");
    product *= c;
  }
  return product;
}

std::vector<IndexVector> enumerate_indices(std::span<const std::uint64_t> counts) {
  for (std::uint64_t c : counts)
    if (c == 0) throw Error(code::kType, "every axis count must be >= 1");
  const std::uint64_t total = index_product(counts);
  std::vector<IndexVector> out;
  out.reserve(total);
  IndexVector index(counts.size(), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    out.push_back(index);
    // Odometer increment, last position fastest.
    for (std::size_t k = counts.size(); k-- > 0;) {
      if (++index[k] < counts[k]) break;
      index[k] = 0;
    }
  }
  return out;
}

std::string job_id(std::uint64_t ordinal, std::uint64_t total) {
  const std::string digits = std::to_string(ordinal);
  const std::size_t width = std::to_string(total).size();
  return "j" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

const Value* JobSpec::find(std::string_view name) const {
  for (const auto& [n, v] : bindings)
    if (n == name) return &v;
  return nullptr;
}

namespace {
void ensure_runnable(const Plan& plan, const SweepSettings& settings) {
  const Diagnostics diags = validate_plan(plan);
  if (has_errors(diags)) throw Error(diags.front());
  check_overrides(plan, settings);
}
}  // namespace

std::uint64_t count_jobs(const Plan& plan, const SweepSettings& settings) {
  ensure_runnable(plan, settings);
  std::vector<std::uint64_t> counts;
  for (const ParamDef& p : plan.params) counts.push_back(axis_cardinality(p, settings));
  return index_product(counts);
}

RunSpec make_run_spec(const Plan& plan, const SweepSettings& settings) {
  ensure_runnable(plan, settings);
  RunSpec rs;
  rs.seed = settings.seed;
  std::vector<std::size_t> swept;
  std::vector<std::uint64_t> counts;
  for (const ParamDef& p : plan.params) {
    rs.axes.push_back(expand_domain(p, settings));
    if (rs.axes.back().swept()) {
      swept.push_back(rs.axes.size() - 1);
      counts.push_back(rs.axes.back().values.size());
    }
  }
  const std::vector<IndexVector> indices = enumerate_indices(counts);
  rs.jobs.reserve(indices.size());
  std::vector<std::size_t> pick(rs.axes.size(), 0);
  for (std::size_t n = 0; n < indices.size(); ++n) {
    for (std::size_t k = 0; k < swept.size(); ++k) pick[swept[k]] = indices[n][k];
    JobSpec job;
    job.id = job_id(n + 1, indices.size());
    job.bindings.reserve(rs.axes.size());
    for (std::size_t a = 0; a < rs.axes.size(); ++a)
      job.bindings.emplace_back(rs.axes[a].name, rs.axes[a].values[pick[a]]);
    rs.jobs.push_back(std::move(job));
  }
  return rs;
}

std::string make_run_step(const ParamDef& param, const ValueAxis& axis) {
  std::string out = "values " + param.name;
  for (const Value& v : axis.values) out += ' ' + format_literal(v);
  return out;
}

std::string render_run_spec(const RunSpec& rs, RunSpecFormat format) {
  if (format == RunSpecFormat::JsonV1) return render_json(rs);
  std::string out = "runspec v1 seed=" + std::to_string(rs.seed) + "\n";
  for (const ValueAxis& axis : rs.axes) {
    out += "values " + axis.name;
    for (const Value& v : axis.values) out += ' ' + format_literal(v);
    out += '\n';
  }
  for (const JobSpec& job : rs.jobs) {
    out += "job " + job.id;
    for (const auto& [name, value] : job.bindings) out += ' ' + name + '=' + format_literal(value);
    out += '\n';
  }
  return out;
}

RunSpec parse_run_spec(std::string_view text, RunSpecFormat format,
                       const std::map<std::string, ValueKind>& kinds) {
  return format == RunSpecFormat::JsonV1 ? parse_json(text, kinds) : parse_text(text, kinds);
}

std::map<std::string, ValueKind> axis_kinds(const Plan& plan) {
  std::map<std::string, ValueKind> kinds;
  for (const ParamDef& p : plan.params) kinds[p.name] = axis_kind(p);
  return kinds;
}

}  // namespace vpt
