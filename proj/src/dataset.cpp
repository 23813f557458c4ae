#include "coreselect/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "coreselect/rng.hpp"

namespace coreselect {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void fail(const std::string& name, std::size_t line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << name << ":" << line << ": " << what;
  throw DataError(msg.str());
}

double parse_double(const std::string& field, const std::string& name,
                    std::size_t line, const std::string& column) {
  if (field.empty()) fail(name, line, "missing value in column " + column);
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    fail(name, line, "malformed number '" + field + "' in column " + column);
  }
  if (!std::isfinite(value)) {
    fail(name, line, "non-finite value in column " + column);
  }
  return value;
}

std::int64_t parse_int(const std::string& field, const std::string& name,
                       std::size_t line, const std::string& column) {
  if (field.empty()) fail(name, line, "missing value in column " + column);
  std::int64_t value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    fail(name, line, "malformed integer '" + field + "' in column " + column);
  }
  return value;
}

void append_double(std::string& out, double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, result.ptr);
}

}  // namespace

int StreamDataset::num_classes() const {
  if (!labels.has_value() || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end());
}

StreamDataset parse_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(name + ":1: missing header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 2) {
    fail(name, 1, "need an epoch column and at least one feature column");
  }
  if (header[0] != "epoch") {
    fail(name, 1, "first column must be named 'epoch', got '" + header[0] +
                      "'");
  }
  const bool has_label = header.back() == "label";
  const std::size_t feature_cols = header.size() - 1 - (has_label ? 1 : 0);
  if (feature_cols == 0) {
    fail(name, 1, "need at least one feature column");
  }

  StreamDataset dataset;
  dataset.dims = static_cast<int>(feature_cols);
  if (has_label) dataset.labels.emplace();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // A trailing newline is fine; a blank row in the middle is not.
      if (in.peek() == std::char_traits<char>::eof()) break;
      fail(name, line_no, "blank row");
    }
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream what;
      what << "expected " << header.size() << " columns, got "
           << fields.size();
      fail(name, line_no, what.str());
    }
    const std::int64_t epoch = parse_int(fields[0], name, line_no, header[0]);
    if (!dataset.epochs.empty() && epoch <= dataset.epochs.back()) {
      fail(name, line_no, "epochs must be strictly increasing");
    }
    Eigen::VectorXd row(feature_cols);
    for (std::size_t c = 0; c < feature_cols; ++c) {
      row(static_cast<Eigen::Index>(c)) =
          parse_double(fields[1 + c], name, line_no, header[1 + c]);
    }
    if (has_label) {
      const std::int64_t label =
          parse_int(fields.back(), name, line_no, header.back());
      if (label < 1) {
        fail(name, line_no, "label must be a positive class id");
      }
      dataset.labels->push_back(static_cast<int>(label));
    }
    dataset.epochs.push_back(epoch);
    dataset.features.push_back(std::move(row));
  }
  return dataset;
}

StreamDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return parse_csv(in, path);
}

void write_csv(const StreamDataset& dataset, std::ostream& out) {
  std::string line = "epoch";
  for (int f = 1; f <= dataset.dims; ++f) {
    line += ",f" + std::to_string(f);
  }
  if (dataset.labels.has_value()) line += ",label";
  line += '\n';
  out << line;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    line = std::to_string(dataset.epochs[i]);
    for (int f = 0; f < dataset.dims; ++f) {
      line += ',';
      append_double(line, dataset.features[i](f));
    }
    if (dataset.labels.has_value()) {
      line += ',' + std::to_string((*dataset.labels)[i]);
    }
    line += '\n';
    out << line;
  }
}

void write_csv_file(const StreamDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  write_csv(dataset, out);
  out.flush();
  if (!out) throw DataError(path + ": write failed");
}

StreamDataset make_regime_stream(const RegimeStreamSpec& spec) {
  if (spec.length == 0) throw std::invalid_argument("length must be >= 1");
  if (spec.dims < 1) throw std::invalid_argument("dims must be >= 1");
  if (spec.class_shares.empty()) {
    throw std::invalid_argument("need at least one class share");
  }
  if (spec.min_dwell < 1 || spec.max_dwell < spec.min_dwell) {
    throw std::invalid_argument("dwell range must satisfy 1 <= min <= max");
  }
  double share_sum = 0.0;
  for (const double s : spec.class_shares) {
    if (s < 0.0) throw std::invalid_argument("class shares must be >= 0");
    share_sum += s;
  }
  if (share_sum <= 0.0) {
    throw std::invalid_argument("class shares must sum to > 0");
  }

  const int num_classes = static_cast<int>(spec.class_shares.size());
  std::vector<Eigen::VectorXd> centers(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(spec.dims);
    if (spec.dims == 1) {
      center(0) = spec.spread * c;
    } else {
      const double angle = 2.0 * M_PI * c / num_classes;
      center(0) = spec.spread * std::cos(angle);
      center(1) = spec.spread * std::sin(angle);
    }
    centers[c] = center;
  }

  // Exact per-class epoch budgets, remainder absorbed by the first class.
  std::vector<std::size_t> budget(num_classes);
  std::size_t assigned = 0;
  for (int c = 0; c < num_classes; ++c) {
    budget[c] = static_cast<std::size_t>(std::llround(
        spec.class_shares[c] / share_sum * static_cast<double>(spec.length)));
    assigned += budget[c];
  }
  while (assigned > spec.length) {
    for (int c = 0; c < num_classes && assigned > spec.length; ++c) {
      if (budget[c] > 0) {
        --budget[c];
        --assigned;
      }
    }
  }
  budget[0] += spec.length - assigned;

  Rng rng(spec.seed);
  struct Block {
    int cls;
    std::size_t count;
  };
  std::vector<Block> blocks;
  const std::uint64_t dwell_span =
      static_cast<std::uint64_t>(spec.max_dwell - spec.min_dwell + 1);
  for (int c = 0; c < num_classes; ++c) {
    std::size_t remaining = budget[c];
    while (remaining > 0) {
      const std::size_t dwell = static_cast<std::size_t>(
          spec.min_dwell + rng.uniform_below(dwell_span));
      const std::size_t take = std::min(dwell, remaining);
      blocks.push_back(Block{c, take});
      remaining -= take;
    }
  }
  for (std::size_t i = blocks.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(blocks[i - 1], blocks[j]);
  }

  StreamDataset dataset;
  dataset.dims = spec.dims;
  dataset.labels.emplace();
  dataset.epochs.reserve(spec.length);
  dataset.features.reserve(spec.length);
  std::int64_t epoch = 0;
  for (const Block& block : blocks) {
    for (std::size_t i = 0; i < block.count; ++i) {
      Eigen::VectorXd x = centers[block.cls];
      for (int f = 0; f < spec.dims; ++f) {
        x(f) += rng.normal(0.0, spec.jitter);
      }
      dataset.epochs.push_back(epoch++);
      dataset.features.push_back(std::move(x));
      dataset.labels->push_back(block.cls + 1);
    }
  }
  return dataset;
}

StreamDataset make_random_walk(std::size_t length, int dims,
                               double step_sigma, std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("length must be >= 1");
  if (dims < 1) throw std::invalid_argument("dims must be >= 1");
  if (step_sigma < 0.0) throw std::invalid_argument("step_sigma must be >= 0");
  StreamDataset dataset;
  dataset.dims = dims;
  dataset.epochs.reserve(length);
  dataset.features.reserve(length);
  Rng rng(seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dims);
  for (std::size_t i = 0; i < length; ++i) {
    dataset.epochs.push_back(static_cast<std::int64_t>(i));
    dataset.features.push_back(x);
    for (int f = 0; f < dims; ++f) x(f) += rng.normal(0.0, step_sigma);
  }
  return dataset;
}

}  // namespace coreselect
