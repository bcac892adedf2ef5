#include <charconv>
#include <cstdio>
#include <string_view>
#include <vector>

#include "sigdiag/features.hpp"
#include "sigdiag/io_util.hpp"

namespace sigdiag {

namespace {

constexpr const char* kMeasureColumns[4] = {"area_6m", "thickness_6m", "area_12m",
                                            "thickness_12m"};

std::string expected_header() {
  std::string h = "subject_id,label,gender,volume_6m,volume_12m";
  for (const char* m : kMeasureColumns) {
    for (std::size_t r = 0; r < kRegionCount; ++r) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), ",%s_r%02zu", m, r);
      h += buf;
    }
  }
  return h;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') {
    line.remove_suffix(1);
  }
  return line;
}

}  // namespace

void write_subject_csv(const std::string& path, std::span<const SubjectRecord> records) {
  std::string out = expected_header();
  out += '\n';
  for (const SubjectRecord& rec : records) {
    rec.validate();
    if (rec.subject_id.empty() ||
        rec.subject_id.find_first_of(",\n\r") != std::string::npos) {
      throw SchemaError("subject id '" + rec.subject_id + "' is empty or contains separators");
    }
    out += rec.subject_id;
    out += ',';
    out += to_string(rec.label);
    out += ',';
    out += to_string(rec.gender);
    out += ',';
    out += format_double(rec.volume_6m);
    out += ',';
    out += format_double(rec.volume_12m);
    for (int m = 0; m < 4; ++m) {
      const std::array<double, kRegionCount>* cols[4] = {&rec.area_6m, &rec.thickness_6m,
                                                         &rec.area_12m, &rec.thickness_12m};
      for (std::size_t r = 0; r < kRegionCount; ++r) {
        out += ',';
        out += format_double((*cols[m])[r]);
      }
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<SubjectRecord> read_subject_csv(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<std::string_view> lines;
  {
    std::string_view rest = content;
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      if (nl == std::string_view::npos) {
        lines.push_back(chomp(rest));
        break;
      }
      lines.push_back(chomp(rest.substr(0, nl)));
      rest = rest.substr(nl + 1);
    }
    while (!lines.empty() && lines.back().empty()) {
      lines.pop_back();
    }
  }
  if (lines.empty()) {
    throw IoError(path + ": file is empty");
  }

  const std::string expected = expected_header();
  if (lines[0] != expected) {
    throw IoError(path + ":1: header does not match the subject schema");
  }
  const std::size_t n_cols = 5 + 4 * kRegionCount;

  std::vector<SubjectRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string where = path + ":" + std::to_string(li + 1);
    const std::vector<std::string_view> f = split_line(lines[li]);
    if (f.size() != n_cols) {
      throw IoError(where + ": expected " + std::to_string(n_cols) + " fields, got " +
                    std::to_string(f.size()));
    }
    SubjectRecord rec;
    rec.subject_id = std::string(f[0]);
    if (rec.subject_id.empty()) {
      throw IoError(where + ": column 'subject_id' is empty");
    }
    try {
      rec.label = label_from_string(std::string(f[1]));
    } catch (const SchemaError& e) {
      throw IoError(where + ": column 'label': " + e.what());
    }
    try {
      rec.gender = gender_from_string(std::string(f[2]));
    } catch (const SchemaError& e) {
      throw IoError(where + ": column 'gender': " + e.what());
    }
    rec.volume_6m = parse_double(f[3], where + ": column 'volume_6m'");
    rec.volume_12m = parse_double(f[4], where + ": column 'volume_12m'");
    std::array<double, kRegionCount>* cols[4] = {&rec.area_6m, &rec.thickness_6m, &rec.area_12m,
                                                 &rec.thickness_12m};
    std::size_t idx = 5;
    for (int m = 0; m < 4; ++m) {
      for (std::size_t r = 0; r < kRegionCount; ++r, ++idx) {
        char colname[48];
        std::snprintf(colname, sizeof(colname), "%s_r%02zu", kMeasureColumns[m], r);
        (*cols[m])[r] = parse_double(f[idx], where + ": column '" + colname + "'");
      }
    }
    try {
      rec.validate();
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace sigdiag
