#include "portastat/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace portastat::io {
namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + what);
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    fn(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
}

int parse_label(std::size_t line_no, std::string_view field) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  parse_fail(line_no, "label must be 0 or 1, got '" + std::string(field) + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) fail(ErrorKind::InvalidArgument, "cannot format double");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorKind::ParseError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::IoFailure, "short write to " + path.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot rename onto " + path.string() + ": " + ec.message());
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string write_cohort_csv(const Cohort& cohort) {
  std::string out = "id,population,split,label";
  for (Eigen::Index j = 0; j < cohort.dimension; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& r : cohort.records) {
    out += r.id;
    out += ',';
    out += to_string(r.population);
    out += ',';
    out += to_string(r.split);
    out += r.label ? ",1" : ",0";
    for (Eigen::Index j = 0; j < r.features.size(); ++j) {
      out += ',';
      out += format_double(r.features(j));
    }
    out += '\n';
  }
  return out;
}

Cohort read_cohort_csv(std::string_view text, FeatureKind kind) {
  Cohort cohort;
  cohort.feature_kind = kind;
  bool have_header = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 5 || fields[0] != "id" || fields[1] != "population" ||
          fields[2] != "split" || fields[3] != "label") {
        parse_fail(line_no, "expected header id,population,split,label,f0,...");
      }
      for (std::size_t j = 4; j < fields.size(); ++j) {
        if (fields[j] != "f" + std::to_string(j - 4)) {
          parse_fail(line_no, "feature column " + std::to_string(j - 4) + " misnamed");
        }
      }
      cohort.dimension = static_cast<Eigen::Index>(fields.size() - 4);
      have_header = true;
      return;
    }
    if (static_cast<Eigen::Index>(fields.size()) != cohort.dimension + 4) {
      parse_fail(line_no, "expected " + std::to_string(cohort.dimension + 4) + " fields, got " +
                              std::to_string(fields.size()));
    }
    Record r;
    r.id = std::string(fields[0]);
    try {
      r.population = parse_population(fields[1]);
      r.split = parse_split(fields[2]);
      r.features.resize(cohort.dimension);
      for (Eigen::Index j = 0; j < cohort.dimension; ++j) {
        r.features(j) = parse_double(fields[static_cast<std::size_t>(j) + 4]);
      }
    } catch (const Error& e) {
      parse_fail(line_no, e.what());
    }
    r.label = parse_label(line_no, fields[3]);
    cohort.records.push_back(std::move(r));
  });
  if (!have_header) fail(ErrorKind::ParseError, "empty cohort file");
  return cohort;
}

std::string write_scored_csv(const ScoredSet& set) {
  std::string out = "id,population,label,score\n";
  for (const auto& e : set.entries) {
    out += e.record_id;
    out += ',';
    out += to_string(e.population);
    out += e.label ? ",1," : ",0,";
    out += format_double(e.score);
    out += '\n';
  }
  return out;
}

ScoredSet read_scored_csv(std::string_view text, std::string model_id) {
  ScoredSet set{std::move(model_id), {}};
  bool have_header = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (line.empty()) return;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (line != "id,population,label,score") {
        parse_fail(line_no, "expected header id,population,label,score");
      }
      have_header = true;
      return;
    }
    if (fields.size() != 4) parse_fail(line_no, "expected 4 fields");
    ScoredEntry e;
    e.record_id = std::string(fields[0]);
    try {
      e.population = parse_population(fields[1]);
      e.score = parse_double(fields[3]);
    } catch (const Error& err) {
      parse_fail(line_no, err.what());
    }
    e.label = parse_label(line_no, fields[2]);
    if (!(e.score >= 0.0 && e.score <= 1.0)) {
      parse_fail(line_no, "score " + std::string(fields[3]) + " outside [0,1] for id '" +
                              e.record_id + "'");
    }
    set.entries.push_back(std::move(e));
  });
  if (!have_header) fail(ErrorKind::ParseError, "empty scored file");
  check_scored_set(set);
  return set;
}

}  // namespace portastat::io
