#pragma once

#include <string>

#include "ordq/dataset.hpp"
#include "ordq/protocols.hpp"

namespace ordq {

// Shortest round-trip decimal form of a double (via std::to_chars), used
// for every number written to disk so reruns are byte-identical and reads
// are lossless.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Dataset CSV: header "f0,...,f{d-1},label", decimal floats, 0-based
// integer labels, LF line endings.
void write_dataset_csv(const LabeledDataset& data, const std::string& path);
LabeledDataset read_dataset_csv(const std::string& path);

// Feature rows only; a trailing "label" column, when present, is ignored.
Matrix read_features_csv(const std::string& path);

// Drawn evaluation samples as JSON: indices plus target and realized
// prevalences per sample, and the draw's rejection count.
void write_samples_json(const AppDraw& draw, const std::string& path);
AppDraw read_samples_json(const std::string& path);

}  // namespace ordq
