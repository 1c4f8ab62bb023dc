#include "ordq/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ordq/error.hpp"

namespace ordq {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const std::string& where) {
  double value = 0.0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw DataError("not a number at " + where + ": '" + text + "'");
  }
  return value;
}

struct ParsedCsv {
  Matrix features;
  std::vector<int> labels;  // empty when no label column
};

ParsedCsv parse_feature_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t d = header.size() - (labeled ? 1 : 0);
  if (d == 0) throw DataError(path + ": no feature columns");
  for (std::size_t f = 0; f < d; ++f) {
    if (header[f] != "f" + std::to_string(f)) {
      throw DataError(path + ": unexpected header column '" + header[f] + "'");
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": wrong field count");
    }
    const std::string where = path + ":" + std::to_string(line_no);
    for (std::size_t f = 0; f < d; ++f) {
      values.push_back(parse_double(fields[f], where));
    }
    if (labeled) {
      const double label = parse_double(fields[d], where);
      if (label < 0 || label != std::floor(label)) {
        throw DataError(where + ": label must be a nonnegative integer");
      }
      labels.push_back(static_cast<int>(label));
    }
    ++rows;
  }
  ParsedCsv out;
  out.features.resize(static_cast<Index>(rows), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t f = 0; f < d; ++f) {
      out.features(static_cast<Index>(i), static_cast<Index>(f)) =
          values[i * d + f];
    }
  }
  out.labels = std::move(labels);
  return out;
}

}  // namespace

void write_dataset_csv(const LabeledDataset& data, const std::string& path) {
  std::string out;
  for (Index f = 0; f < data.dim(); ++f) {
    out += "f" + std::to_string(f) + ",";
  }
  out += "label\n";
  for (Index i = 0; i < data.size(); ++i) {
    for (Index f = 0; f < data.dim(); ++f) {
      out += format_double(data.features(i, f));
      out += ',';
    }
    out += std::to_string(data.labels[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  write_text_file(path, out);
}

LabeledDataset read_dataset_csv(const std::string& path) {
  ParsedCsv parsed = parse_feature_csv(path);
  if (parsed.labels.empty()) {
    throw DataError(path + ": missing label column");
  }
  LabeledDataset data;
  data.features = std::move(parsed.features);
  data.labels = std::move(parsed.labels);
  int max_label = 0;
  for (int label : data.labels) max_label = std::max(max_label, label);
  data.n_classes = max_label + 1;
  data.validate();
  return data;
}

Matrix read_features_csv(const std::string& path) {
  return parse_feature_csv(path).features;
}

void write_samples_json(const AppDraw& draw, const std::string& path) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["rejections"] = draw.rejections;
  nlohmann::json samples = nlohmann::json::array();
  for (const DrawnSample& s : draw.samples) {
    nlohmann::json one;
    one["indices"] = s.indices;
    nlohmann::json target = nlohmann::json::array();
    nlohmann::json realized = nlohmann::json::array();
    for (Index i = 0; i < s.target_prevalence.size(); ++i) {
      target.push_back(s.target_prevalence[i]);
      realized.push_back(s.realized_prevalence[i]);
    }
    one["target"] = std::move(target);
    one["realized"] = std::move(realized);
    one["size"] = static_cast<std::int64_t>(s.size);
    samples.push_back(std::move(one));
  }
  doc["samples"] = std::move(samples);
  write_text_file(path, doc.dump(2) + "\n");
}

AppDraw read_samples_json(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  try {
    AppDraw draw;
    draw.rejections = doc.at("rejections").get<long>();
    for (const auto& one : doc.at("samples")) {
      std::vector<Index> indices;
      for (const auto& idx : one.at("indices")) {
        indices.push_back(idx.get<Index>());
      }
      const auto to_distribution = [](const nlohmann::json& arr) {
        Vector v(static_cast<Index>(arr.size()));
        for (Index i = 0; i < v.size(); ++i) {
          v[i] = arr[static_cast<std::size_t>(i)].get<double>();
        }
        return Distribution(std::move(v));
      };
      draw.samples.push_back(DrawnSample{
          std::move(indices), to_distribution(one.at("target")),
          to_distribution(one.at("realized")),
          one.at("size").get<std::int64_t>()});
    }
    return draw;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": missing fields: " + e.what());
  }
}

}  // namespace ordq
