#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "portastat/core.hpp"

namespace portastat::io {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

// Cohort CSV: `id,population,split,label,f0,...,f{D-1}`. The feature kind is
// not part of the file and must be supplied by the caller.
std::string write_cohort_csv(const Cohort& cohort);
Cohort read_cohort_csv(std::string_view text, FeatureKind kind);

// ScoredSet CSV: `id,population,label,score`. The model id is not part of the file.
std::string write_scored_csv(const ScoredSet& set);
ScoredSet read_scored_csv(std::string_view text, std::string model_id);

}  // namespace portastat::io
