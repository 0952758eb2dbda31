#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbn/bayesnet.hpp"
#include "cbn/dense.hpp"
#include "cbn/graph.hpp"
#include "cbn/model.hpp"
#include "cbn/samples.hpp"

namespace cbn {

using Json = nlohmann::json;

/// Parsed JSON plus the source line of every value, keyed by JSON pointer.
class JsonDoc {
 public:
  static JsonDoc parse(const std::string& text, const std::string& source);
  static JsonDoc load(const std::string& path);

  const Json& root() const { return root_; }
  const std::string& source() const { return source_; }
  /// Line of the value at `pointer`, or of its nearest recorded ancestor.
  int line(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const;

  const Json& at(const std::string& pointer) const;
  long long integer(const std::string& pointer, long long lo, long long hi) const;
  double number(const std::string& pointer) const;
  std::string string(const std::string& pointer) const;
  bool boolean(const std::string& pointer) const;
  std::size_t array_size(const std::string& pointer) const;
  bool has(const std::string& pointer) const;
  bool is_null(const std::string& pointer) const;

 private:
  Json root_;
  std::string source_;
  std::map<std::string, int> lines_;
};

std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: truncate then write.
void write_file(const std::string& path, const std::string& text);
std::string dump(const Json& j);

Json graph_to_json(const Admg& g);
Admg graph_from_json(const JsonDoc& doc, const std::string& at = "");
Admg read_graph(const std::string& path);

Json model_to_json(const GroundTruthCbn& m);
GroundTruthCbn model_from_json(const JsonDoc& doc);
GroundTruthCbn read_model(const std::string& path);

Json learned_to_json(const BayesNetModel& m);
BayesNetModel learned_from_json(const JsonDoc& doc);
BayesNetModel read_learned(const std::string& path);

Json dense_to_json(const DenseDistribution& d);
DenseDistribution dense_from_json(const JsonDoc& doc);
DenseDistribution read_dense(const std::string& path);

/// Header row of names, one row of symbols per line.
std::string samples_to_csv(const SampleBatch& b);
/// Columns are matched to g's nodes by name; every node must be present.
SampleBatch samples_from_csv(const std::string& text, const std::string& source, const Admg& g);
SampleBatch read_samples(const std::string& path, const Admg& g);

}  // namespace cbn
