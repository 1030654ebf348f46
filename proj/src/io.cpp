#include "cnma/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "cnma/error.hpp"

namespace cnma {

namespace {

const std::vector<std::string> kArmHeader{"study", "treatment", "events", "total"};
const std::vector<std::string> kContrastHeader{"study", "baseline_treatment", "treatment",
                                               "y", "se", "se_baseline"};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::vector<std::string>> rows_of(std::string_view text,
                                              const std::vector<std::string>& header,
                                              const char* table) {
  auto rows = parse_csv(text);
  if (rows.empty()) {
    throw Error(ErrorCode::MalformedInput, std::string(table) + " table is empty");
  }
  std::vector<std::string> got;
  for (const auto& f : rows.front()) got.push_back(trim(f));
  if (got != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorCode::MalformedInput, std::string(table) + " table header must be '" + want + "'");
  }
  rows.erase(rows.begin());
  std::size_t line = 2;
  for (auto& r : rows) {
    if (r.size() != header.size()) {
      throw Error(ErrorCode::MalformedInput, "row " + std::to_string(line) + " has " +
                                                 std::to_string(r.size()) + " fields, expected " +
                                                 std::to_string(header.size()));
    }
    for (auto& f : r) f = trim(f);
    ++line;
  }
  return rows;
}

std::string label_of(const Treatment& t, const ComponentDictionary& components,
                     std::string_view separator) {
  return t.label.empty() ? format_treatment(t, components, separator) : t.label;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
    }
  }
  if (quoted) throw Error(ErrorCode::MalformedInput, "unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + dir.string() + "'");
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename onto '" + path.string() + "'");
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::MalformedInput, "bad number for " + std::string(what) + ": '" +
                                               std::string(text) + "'");
  }
  return v;
}

long parse_count(std::string_view text, std::string_view what) {
  long v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw Error(ErrorCode::MalformedInput, "bad count for " + std::string(what) + ": '" +
                                               std::string(text) + "'");
  }
  return v;
}

TableKind detect_table_kind(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::MalformedInput, "table is empty");
  std::vector<std::string> header;
  for (const auto& f : rows.front()) header.push_back(trim(f));
  if (header == kArmHeader) return TableKind::Arm;
  if (header == kContrastHeader) return TableKind::Contrast;
  throw Error(ErrorCode::MalformedInput, "unrecognized table header");
}

std::vector<Study> parse_arm_table(std::string_view text, ComponentDictionary& components,
                                   std::string_view separator) {
  const auto rows = rows_of(text, kArmHeader, "arm");
  if (rows.empty()) throw Error(ErrorCode::EmptyNetwork, "arm table has no data rows");
  std::vector<Study> studies;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    if (r[0].empty()) throw Error(ErrorCode::MalformedInput, "empty study id");
    auto [it, inserted] = index.emplace(r[0], studies.size());
    if (inserted) studies.push_back(Study{r[0], {}});
    ArmRecord arm;
    arm.treatment = parse_treatment(r[1], components, separator);
    arm.events = parse_count(r[2], "events");
    arm.total = parse_count(r[3], "total");
    studies[it->second].arms.push_back(std::move(arm));
  }
  for (const auto& s : studies) validate_study(s);
  return studies;
}

std::vector<Study> read_arm_table(const std::filesystem::path& path, ComponentDictionary& components,
                                  std::string_view separator) {
  return parse_arm_table(read_text_file(path), components, separator);
}

std::string format_arm_table(const std::vector<Study>& studies, const ComponentDictionary& components,
                             std::string_view separator) {
  std::string out = "study,treatment,events,total\n";
  for (const auto& s : studies) {
    for (const auto& a : s.arms) {
      out += csv_field(s.id) + "," + csv_field(label_of(a.treatment, components, separator)) + "," +
             std::to_string(a.events) + "," + std::to_string(a.total) + "\n";
    }
  }
  return out;
}

void write_arm_table(const std::filesystem::path& path, const std::vector<Study>& studies,
                     const ComponentDictionary& components, std::string_view separator) {
  write_file_atomic(path, format_arm_table(studies, components, separator));
}

std::vector<ContrastBlock> parse_contrast_table(std::string_view text,
                                                ComponentDictionary& components,
                                                std::string_view separator) {
  const auto rows = rows_of(text, kContrastHeader, "contrast");
  if (rows.empty()) throw Error(ErrorCode::EmptyNetwork, "contrast table has no data rows");
  struct Pending {
    std::string id;
    Treatment baseline;
    std::vector<Treatment> treatments;
    std::vector<double> y, se;
    std::vector<std::optional<double>> se_baseline;
  };
  std::vector<Pending> pending;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    if (r[0].empty()) throw Error(ErrorCode::MalformedInput, "empty study id");
    const Treatment base = parse_treatment(r[1], components, separator);
    auto [it, inserted] = index.emplace(r[0], pending.size());
    if (inserted) pending.push_back(Pending{r[0], base, {}, {}, {}, {}});
    auto& p = pending[it->second];
    if (!(p.baseline == base)) {
      throw Error(ErrorCode::MalformedInput, "study '" + p.id + "' uses more than one baseline");
    }
    p.treatments.push_back(parse_treatment(r[2], components, separator));
    p.y.push_back(parse_double(r[3], "y"));
    const double se = parse_double(r[4], "se");
    if (!(se > 0.0)) {
      throw Error(ErrorCode::ZeroStandardError, "study '" + p.id + "' has se <= 0");
    }
    p.se.push_back(se);
    p.se_baseline.push_back(r[5].empty() ? std::nullopt
                                         : std::optional<double>(parse_double(r[5], "se_baseline")));
  }
  std::vector<ContrastBlock> blocks;
  for (const auto& p : pending) {
    ContrastBlock b;
    b.study_id = p.id;
    b.baseline_arm = 0;
    b.treatments.push_back(p.baseline);
    for (const auto& t : p.treatments) b.treatments.push_back(t);
    const auto m = static_cast<Eigen::Index>(p.y.size());
    b.y_star = Eigen::Map<const Vector>(p.y.data(), m);
    b.se = Eigen::Map<const Vector>(p.se.data(), m);
    std::optional<double> sb;
    for (const auto& v : p.se_baseline) {
      if (!v) continue;
      if (sb && *sb != *v) {
        throw Error(ErrorCode::MalformedInput, "study '" + p.id + "' has inconsistent se_baseline");
      }
      sb = v;
    }
    if (m > 1 && (!sb || std::any_of(p.se_baseline.begin(), p.se_baseline.end(),
                                     [](const auto& v) { return !v.has_value(); }))) {
      throw Error(ErrorCode::MalformedInput, "study '" + p.id + "' needs se_baseline on every row");
    }
    b.se_baseline = sb.value_or(0.0);
    std::set<Treatment> seen(b.treatments.begin(), b.treatments.end());
    if (seen.size() != b.treatments.size()) {
      throw Error(ErrorCode::DuplicateTreatment, "study '" + p.id + "' repeats a treatment");
    }
    b.validate();
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<ContrastBlock> read_contrast_table(const std::filesystem::path& path,
                                               ComponentDictionary& components,
                                               std::string_view separator) {
  return parse_contrast_table(read_text_file(path), components, separator);
}

std::string format_contrast_table(const std::vector<ContrastBlock>& blocks,
                                  const ComponentDictionary& components,
                                  std::string_view separator) {
  std::string out = "study,baseline_treatment,treatment,y,se,se_baseline\n";
  for (const auto& b : blocks) {
    b.validate();
    const auto contrasts = b.contrast_treatments();
    const std::string base = csv_field(label_of(b.baseline(), components, separator));
    const bool write_sb = contrasts.size() > 1 || b.se_baseline > 0.0;
    for (std::size_t j = 0; j < contrasts.size(); ++j) {
      const auto e = static_cast<Eigen::Index>(j);
      out += csv_field(b.study_id) + "," + base + "," +
             csv_field(label_of(contrasts[j], components, separator)) + "," +
             format_double(b.y_star(e)) + "," + format_double(b.se(e)) + "," +
             (write_sb ? format_double(b.se_baseline) : std::string()) + "\n";
    }
  }
  return out;
}

void write_contrast_table(const std::filesystem::path& path, const std::vector<ContrastBlock>& blocks,
                          const ComponentDictionary& components, std::string_view separator) {
  write_file_atomic(path, format_contrast_table(blocks, components, separator));
}

std::vector<std::string> check_chd_shape(const std::vector<Study>& studies, const Network& network) {
  std::vector<std::string> problems;
  if (studies.size() != 36) {
    problems.push_back("expected 36 studies, found " + std::to_string(studies.size()));
  }
  const std::set<std::string> expected{"Usual", "Edu", "Beh", "Cog", "Rel", "Sup"};
  const std::set<std::string> got(network.components.names().begin(), network.components.names().end());
  if (got != expected) {
    std::string list;
    for (const auto& n : got) list += (list.empty() ? "" : ",") + n;
    problems.push_back("expected components Usual,Edu,Beh,Cog,Rel,Sup, found " + list);
  }
  if (!network.connected) problems.push_back("network is not connected");
  return problems;
}

}  // namespace cnma
