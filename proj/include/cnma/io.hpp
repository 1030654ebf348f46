#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cnma/network.hpp"

namespace cnma {

enum class TableKind { Arm, Contrast };

/// Rows of a comma-delimited file; double-quoted fields may contain commas
/// and doubled quotes. A UTF-8 byte-order mark is skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view value);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);
long parse_count(std::string_view text, std::string_view what);

/// Inspects the header row.
TableKind detect_table_kind(std::string_view text);

/// Header study,treatment,events,total. Rows are grouped by study in order
/// of first appearance; arm order follows row order.
std::vector<Study> parse_arm_table(std::string_view text, ComponentDictionary& components,
                                   std::string_view separator = kDefaultSeparator);
std::vector<Study> read_arm_table(const std::filesystem::path& path, ComponentDictionary& components,
                                  std::string_view separator = kDefaultSeparator);
std::string format_arm_table(const std::vector<Study>& studies, const ComponentDictionary& components,
                             std::string_view separator = kDefaultSeparator);
void write_arm_table(const std::filesystem::path& path, const std::vector<Study>& studies,
                     const ComponentDictionary& components,
                     std::string_view separator = kDefaultSeparator);

/// Header study,baseline_treatment,treatment,y,se,se_baseline. se_baseline
/// may be empty only for studies contributing a single row.
std::vector<ContrastBlock> parse_contrast_table(std::string_view text,
                                                ComponentDictionary& components,
                                                std::string_view separator = kDefaultSeparator);
std::vector<ContrastBlock> read_contrast_table(const std::filesystem::path& path,
                                               ComponentDictionary& components,
                                               std::string_view separator = kDefaultSeparator);
std::string format_contrast_table(const std::vector<ContrastBlock>& blocks,
                                  const ComponentDictionary& components,
                                  std::string_view separator = kDefaultSeparator);
void write_contrast_table(const std::filesystem::path& path, const std::vector<ContrastBlock>& blocks,
                          const ComponentDictionary& components,
                          std::string_view separator = kDefaultSeparator);

/// Shape expected of the coronary heart disease dataset: 36 studies over the
/// components Usual, Edu, Beh, Cog, Rel, Sup, connected. Returns the list of
/// problems found (empty when the data look right).
std::vector<std::string> check_chd_shape(const std::vector<Study>& studies, const Network& network);

}  // namespace cnma
