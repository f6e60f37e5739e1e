#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpt/param_model.hpp"
#include "vpt/plan.hpp"

namespace vpt {

using IndexVector = std::vector<std::uint64_t>;

/// Product of `counts`. Throws Error(E_OVERFLOW) above 2^63-1.
std::uint64_t index_product(std::span<const std::uint64_t> counts);

/// Mixed-radix Cartesian product of [0, counts[i]) with the last axis varying
/// fastest. `{}` yields one empty vector. Every count must be >= 1.
std::vector<IndexVector> enumerate_indices(std::span<const std::uint64_t> counts);

/// `j` + ordinal zero-padded to the digit count of `total`.
std::string job_id(std::uint64_t ordinal, std::uint64_t total);

struct JobSpec {
  std::string id;
  std::vector<std::pair<std::string, Value>> bindings;  // plan declaration order

  const Value* find(std::string_view name) const;
  friend bool operator==(const JobSpec&, const JobSpec&) = default;
};

struct RunSpec {
  std::vector<ValueAxis> axes;
  std::vector<JobSpec> jobs;
  std::uint64_t seed = 0;
  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

/// Number of jobs make_run_spec would produce, without materializing them.
std::uint64_t count_jobs(const Plan& plan, const SweepSettings& settings);

/// Expands a valid plan into its run specification.
RunSpec make_run_spec(const Plan& plan, const SweepSettings& settings);

/// `values <name> <v1> <v2> ...`
std::string make_run_step(const ParamDef& param, const ValueAxis& axis);

enum class RunSpecFormat { TextV1, JsonV1 };

std::string render_run_spec(const RunSpec& rs, RunSpecFormat format);

/// Reads a rendered run spec back. TextV1 does not record value kinds, so
/// `kinds` (axis name -> kind) disambiguates Integer/Real and Text/File; when
/// an axis is missing from it the kind is inferred from the spelling. Throws
/// Error(E_CORRUPT).
RunSpec parse_run_spec(std::string_view text, RunSpecFormat format,
                       const std::map<std::string, ValueKind>& kinds = {});

/// Axis-name -> kind map for parse_run_spec, derived from a plan.
std::map<std::string, ValueKind> axis_kinds(const Plan& plan);

}  // namespace vpt
