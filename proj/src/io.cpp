#include "cbn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "cbn/errors.hpp"

namespace cbn {

namespace {

// Input iterator that remembers the line of the last non-space character
// consumed by the parser.
struct LineState {
  int line = 1;
  int last = 1;
};

class TrackingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  TrackingIterator() = default;
  TrackingIterator(const char* p, LineState* s) : p_(p), s_(s) {}

  reference operator*() const { return *p_; }
  TrackingIterator& operator++() {
    const char c = *p_;
    if (c == '\n') {
      ++s_->line;
    } else if (c != ' ' && c != '\t' && c != '\r') {
      s_->last = s_->line;
    }
    ++p_;
    return *this;
  }
  TrackingIterator operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  bool operator==(const TrackingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const TrackingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_ = nullptr;
  LineState* s_ = nullptr;
};

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i < end; ++i) line += text[i] == '\n';
  return line;
}

class Builder {
 public:
  Builder(const LineState& state, std::map<std::string, int>& lines, const std::string& source)
      : state_(state), lines_(lines), source_(source) {}

  Json root;
  std::string error;

  bool null() { return put(Json(nullptr)); }
  bool boolean(bool v) { return put(Json(v)); }
  bool number_integer(Json::number_integer_t v) { return put(Json(v)); }
  bool number_unsigned(Json::number_unsigned_t v) { return put(Json(v)); }
  bool number_float(Json::number_float_t v, const std::string&) { return put(Json(v)); }
  bool string(std::string& v) { return put(Json(v)); }
  bool binary(Json::binary_t&) { return put(Json(nullptr)); }
  bool start_object(std::size_t) { return open(Json::object()); }
  bool start_array(std::size_t) { return open(Json::array()); }
  bool end_object() { return close(); }
  bool end_array() { return close(); }
  bool key(std::string& k) {
    Frame& f = stack_.back();
    if (f.value->contains(k)) {
      error = source_ + ":" + std::to_string(state_.last) + ": duplicate key '" + k + "'";
      return false;
    }
    f.key = k;
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    error = ex.what();
    return false;
  }

 private:
  struct Frame {
    Json* value;
    std::string pointer;
    std::string key;
  };

  std::string child_pointer() const {
    if (stack_.empty()) return "";
    const Frame& f = stack_.back();
    if (f.value->is_object()) return f.pointer + "/" + escape_token(f.key);
    return f.pointer + "/" + std::to_string(f.value->size());
  }

  Json* insert(Json v) {
    if (stack_.empty()) {
      root = std::move(v);
      return &root;
    }
    Frame& f = stack_.back();
    if (f.value->is_object()) return &((*f.value)[f.key] = std::move(v));
    f.value->push_back(std::move(v));
    return &f.value->back();
  }

  bool put(Json v) {
    lines_[child_pointer()] = state_.last;
    insert(std::move(v));
    return true;
  }

  bool open(Json v) {
    const std::string ptr = child_pointer();
    lines_[ptr] = state_.last;
    Json* slot = insert(std::move(v));
    stack_.push_back({slot, ptr, {}});
    return true;
  }

  bool close() {
    stack_.pop_back();
    return true;
  }

  const LineState& state_;
  std::map<std::string, int>& lines_;
  const std::string& source_;
  std::vector<Frame> stack_;
};

std::string idx(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

std::vector<double> read_row(const JsonDoc& doc, const std::string& ptr, std::size_t expected) {
  if (doc.array_size(ptr) != expected) {
    doc.fail(ptr, "expected " + std::to_string(expected) + " probabilities, got " +
                      std::to_string(doc.array_size(ptr)));
  }
  std::vector<double> row;
  double s = 0.0;
  for (std::size_t i = 0; i < expected; ++i) {
    const double p = doc.number(idx(ptr, i));
    if (!(p >= 0.0) || p > 1.0) doc.fail(idx(ptr, i), "probability out of [0, 1]");
    row.push_back(p);
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-9) doc.fail(ptr, "probabilities sum to " + std::to_string(s));
  return row;
}

std::vector<std::string> read_names(const JsonDoc& doc, const std::string& ptr, std::size_t expected) {
  if (doc.array_size(ptr) != expected) {
    doc.fail(ptr, "expected " + std::to_string(expected) + " names, got " + std::to_string(doc.array_size(ptr)));
  }
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < expected; ++i) {
    names.push_back(doc.string(idx(ptr, i)));
    if (names.back().empty()) doc.fail(idx(ptr, i), "empty name");
    if (!seen.insert(names.back()).second) doc.fail(idx(ptr, i), "duplicate name '" + names.back() + "'");
  }
  return names;
}

std::vector<Edge> read_edges(const JsonDoc& doc, const std::string& ptr, int n, bool bidirected) {
  std::vector<Edge> edges;
  std::set<Edge> seen;
  for (std::size_t i = 0; i < doc.array_size(ptr); ++i) {
    const std::string e = idx(ptr, i);
    if (doc.array_size(e) != 2) doc.fail(e, "edge must be a pair [i, j]");
    const int a = static_cast<int>(doc.integer(e + "/0", 0, n - 1));
    const int b = static_cast<int>(doc.integer(e + "/1", 0, n - 1));
    if (a == b) doc.fail(e, "self-loop on node " + std::to_string(a));
    if (bidirected && a > b) doc.fail(e, "bidirected edge must be listed as [i, j] with i < j");
    if (!seen.insert({a, b}).second) doc.fail(e, "duplicate edge");
    edges.emplace_back(a, b);
  }
  return edges;
}

NodeSet read_node_list(const JsonDoc& doc, const std::string& ptr, int n) {
  NodeSet out;
  for (std::size_t i = 0; i < doc.array_size(ptr); ++i) {
    out.push_back(static_cast<int>(doc.integer(idx(ptr, i), 0, n - 1)));
    if (i > 0 && out[i] <= out[i - 1]) doc.fail(idx(ptr, i), "node list must be strictly ascending");
  }
  return out;
}

}  // namespace

JsonDoc JsonDoc::parse(const std::string& text, const std::string& source) {
  JsonDoc doc;
  doc.source_ = source;
  LineState state;
  Builder b(state, doc.lines_, doc.source_);
  TrackingIterator first(text.data(), &state), last(text.data() + text.size(), &state);
  bool ok = false;
  try {
    ok = Json::sax_parse(first, last, &b);
  } catch (const nlohmann::json::exception& ex) {
    b.error = ex.what();
  }
  if (!ok) {
    if (b.error.rfind(source + ":", 0) == 0) throw InputFormatError(b.error);
    // parse errors carry a byte offset in the message; map it to a line
    std::size_t byte = text.size();
    const auto pos = b.error.find("at line ");
    if (pos != std::string::npos) {
      throw InputFormatError(source + ":" + std::to_string(std::stoi(b.error.substr(pos + 8))) + ": " + b.error);
    }
    throw InputFormatError(source + ":" + std::to_string(line_of_byte(text, byte)) + ": " + b.error);
  }
  doc.root_ = std::move(b.root);
  return doc;
}

JsonDoc JsonDoc::load(const std::string& path) { return parse(read_file(path), path); }

int JsonDoc::line(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 1;
    p.erase(p.rfind('/'));
  }
}

void JsonDoc::fail(const std::string& pointer, const std::string& msg) const {
  const std::string where = pointer.empty() ? "" : " (at " + pointer + ")";
  throw InputFormatError(source_ + ":" + std::to_string(line(pointer)) + ": " + msg + where);
}

bool JsonDoc::has(const std::string& pointer) const {
  return root_.contains(Json::json_pointer(pointer));
}

const Json& JsonDoc::at(const std::string& pointer) const {
  if (!has(pointer)) fail(pointer, "missing field");
  return root_.at(Json::json_pointer(pointer));
}

bool JsonDoc::is_null(const std::string& pointer) const { return at(pointer).is_null(); }

long long JsonDoc::integer(const std::string& pointer, long long lo, long long hi) const {
  const Json& j = at(pointer);
  long long v = 0;
  if (j.is_number_unsigned()) {
    const auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(hi)) fail(pointer, "value out of range");
    v = static_cast<long long>(u);
  } else if (j.is_number_integer()) {
    v = j.get<long long>();
  } else {
    fail(pointer, "expected an integer");
  }
  if (v < lo || v > hi) {
    fail(pointer, "value " + std::to_string(v) + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

double JsonDoc::number(const std::string& pointer) const {
  const Json& j = at(pointer);
  if (!j.is_number()) fail(pointer, "expected a number");
  return j.get<double>();
}

std::string JsonDoc::string(const std::string& pointer) const {
  const Json& j = at(pointer);
  if (!j.is_string()) fail(pointer, "expected a string");
  return j.get<std::string>();
}

bool JsonDoc::boolean(const std::string& pointer) const {
  const Json& j = at(pointer);
  if (!j.is_boolean()) fail(pointer, "expected true or false");
  return j.get<bool>();
}

std::size_t JsonDoc::array_size(const std::string& pointer) const {
  const Json& j = at(pointer);
  if (!j.is_array()) fail(pointer, "expected an array");
  return j.size();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError(path + ":0: cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractError("cannot write " + path);
  out << text;
  if (!out) throw ContractError("write failed: " + path);
}

std::string dump(const Json& j) { return j.dump(1) + "\n"; }

// graph

Json graph_to_json(const Admg& g) {
  Json j;
  j["n"] = g.size();
  j["names"] = g.names();
  j["alphabet"] = g.alphabet();
  j["directed"] = Json::array();
  for (auto [a, b] : g.directed()) j["directed"].push_back({a, b});
  j["bidirected"] = Json::array();
  for (auto [a, b] : g.bidirected()) j["bidirected"].push_back({a, b});
  return j;
}

Admg graph_from_json(const JsonDoc& doc, const std::string& at) {
  if (!doc.at(at).is_object()) doc.fail(at, "expected a graph object");
  const int n = static_cast<int>(doc.integer(at + "/n", 1, 1 << 20));
  const int alphabet = static_cast<int>(doc.integer(at + "/alphabet", 2, 1 << 16));
  auto names = read_names(doc, at + "/names", static_cast<std::size_t>(n));
  auto dir = read_edges(doc, at + "/directed", n, false);
  auto bi = read_edges(doc, at + "/bidirected", n, true);
  try {
    topological_order(n, dir);
  } catch (const StructuralError& e) {
    doc.fail(at + "/directed", e.what());
  }
  try {
    return Admg(n, alphabet, std::move(dir), std::move(bi), std::move(names));
  } catch (const Error& e) {
    doc.fail(at, e.what());
  }
}

Admg read_graph(const std::string& path) { return graph_from_json(JsonDoc::load(path)); }

// ground-truth model

Json model_to_json(const GroundTruthCbn& m) {
  Json j;
  j["graph"] = graph_to_json(m.graph());
  j["hidden_domain"] = m.hidden_domain();
  j["hidden_priors"] = m.hidden_priors();
  j["cpts"] = m.cpts();
  return j;
}

GroundTruthCbn model_from_json(const JsonDoc& doc) {
  Admg g = graph_from_json(doc, "/graph");
  const int h = static_cast<int>(doc.integer("/hidden_domain", 2, 1 << 16));
  const std::size_t edges = g.bidirected().size();
  if (doc.array_size("/hidden_priors") != edges) {
    doc.fail("/hidden_priors", "expected one prior per bidirected edge (" + std::to_string(edges) + ")");
  }
  std::vector<GroundTruthCbn::Row> priors;
  for (std::size_t e = 0; e < edges; ++e) priors.push_back(read_row(doc, idx("/hidden_priors", e), h));
  if (doc.array_size("/cpts") != static_cast<std::size_t>(g.size())) doc.fail("/cpts", "expected one CPT per node");
  std::vector<std::vector<GroundTruthCbn::Row>> cpts(g.size());
  for (int v = 0; v < g.size(); ++v) {
    const std::string ptr = idx("/cpts", v);
    std::size_t rows = 1;
    for (std::size_t i = 0; i < g.parents(v).size(); ++i) rows *= g.alphabet();
    for (std::size_t i = 0; i < g.incident_bidirected(v).size(); ++i) rows *= h;
    if (doc.array_size(ptr) != rows) {
      doc.fail(ptr, "CPT of " + g.name(v) + ": expected " + std::to_string(rows) + " rows, got " +
                        std::to_string(doc.array_size(ptr)));
    }
    for (std::size_t r = 0; r < rows; ++r) cpts[v].push_back(read_row(doc, idx(ptr, r), g.alphabet()));
  }
  try {
    return GroundTruthCbn(std::move(g), h, std::move(priors), std::move(cpts));
  } catch (const Error& e) {
    doc.fail("", e.what());
  }
}

GroundTruthCbn read_model(const std::string& path) { return model_from_json(JsonDoc::load(path)); }

// learned model

Json learned_to_json(const BayesNetModel& m) {
  Json j;
  j["n"] = m.universe();
  j["names"] = m.names();
  j["alphabet"] = m.alphabet();
  j["order"] = m.order();
  j["conditioning_sets"] = Json::array();
  j["fixed"] = Json::array();
  j["substituted"] = Json::array();
  j["cpts"] = Json::array();
  for (const auto& f : m.factors()) {
    j["conditioning_sets"].push_back(f.cond);
    Json fixed = Json::array();
    for (auto [v, val] : f.fixed) fixed.push_back({v, val});
    j["fixed"].push_back(fixed);
    j["substituted"].push_back(f.substituted);
    Json rows = Json::array();
    for (const auto& [key, p] : f.rows) rows.push_back({{"key", key}, {"p", p}});
    j["cpts"].push_back(rows);
  }
  if (m.x_substitution()) {
    j["x_substitution"] = {{"node", m.x_substitution()->first}, {"value", m.x_substitution()->second}};
  } else {
    j["x_substitution"] = nullptr;
  }
  return j;
}

BayesNetModel learned_from_json(const JsonDoc& doc) {
  const int n = static_cast<int>(doc.integer("/n", 1, 1 << 20));
  const int alphabet = static_cast<int>(doc.integer("/alphabet", 2, 1 << 16));
  auto names = read_names(doc, "/names", static_cast<std::size_t>(n));
  const std::size_t count = doc.array_size("/order");
  for (const char* field : {"/conditioning_sets", "/fixed", "/substituted", "/cpts"}) {
    if (doc.array_size(field) != count) doc.fail(field, "expected one entry per factor (" + std::to_string(count) + ")");
  }
  std::optional<std::pair<int, int>> xsub;
  if (!doc.is_null("/x_substitution")) {
    xsub = std::make_pair(static_cast<int>(doc.integer("/x_substitution/node", 0, n - 1)),
                          static_cast<int>(doc.integer("/x_substitution/value", 0, alphabet - 1)));
  }
  std::vector<Factor> factors(count);
  for (std::size_t f = 0; f < count; ++f) {
    Factor& fa = factors[f];
    fa.node = static_cast<int>(doc.integer(idx("/order", f), 0, n - 1));
    fa.cond = read_node_list(doc, idx("/conditioning_sets", f), n);
    const std::string fx = idx("/fixed", f);
    for (std::size_t i = 0; i < doc.array_size(fx); ++i) {
      const std::string e = idx(fx, i);
      if (doc.array_size(e) != 2) doc.fail(e, "fixed entry must be [variable, value]");
      fa.fixed.emplace_back(static_cast<int>(doc.integer(e + "/0", 0, n - 1)),
                            static_cast<int>(doc.integer(e + "/1", 0, alphabet - 1)));
    }
    fa.substituted = doc.boolean(idx("/substituted", f));
    std::uint64_t key_space = 1;
    for (std::size_t i = 0; i < fa.cond.size(); ++i) {
      if (key_space > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(alphabet)) {
        doc.fail(idx("/conditioning_sets", f), "conditioning set too large");
      }
      key_space *= static_cast<std::uint64_t>(alphabet);
    }
    const std::string rows = idx("/cpts", f);
    for (std::size_t r = 0; r < doc.array_size(rows); ++r) {
      const std::string e = idx(rows, r);
      const auto key = static_cast<std::uint64_t>(doc.integer(e + "/key", 0, static_cast<long long>(key_space - 1)));
      if (fa.rows.count(key)) doc.fail(e, "duplicate key " + std::to_string(key));
      fa.rows[key] = read_row(doc, e + "/p", static_cast<std::size_t>(alphabet));
    }
  }
  try {
    return BayesNetModel(n, alphabet, std::move(names), std::move(factors), xsub);
  } catch (const Error& e) {
    doc.fail("", e.what());
  }
}

BayesNetModel read_learned(const std::string& path) { return learned_from_json(JsonDoc::load(path)); }

// dense distribution

Json dense_to_json(const DenseDistribution& d) {
  Json j;
  j["variables"] = d.vars();
  j["names"] = d.names();
  j["domain_sizes"] = d.sizes();
  j["mass"] = d.mass();
  return j;
}

DenseDistribution dense_from_json(const JsonDoc& doc) {
  const std::size_t k = doc.array_size("/variables");
  Table t;
  for (std::size_t i = 0; i < k; ++i) {
    t.vars.push_back(static_cast<int>(doc.integer(idx("/variables", i), 0, 1 << 20)));
    if (i > 0 && t.vars[i] <= t.vars[i - 1]) doc.fail(idx("/variables", i), "variables must be strictly ascending");
  }
  auto names = read_names(doc, "/names", k);
  if (doc.array_size("/domain_sizes") != k) doc.fail("/domain_sizes", "expected one size per variable");
  std::uint64_t cells = 1;
  for (std::size_t i = 0; i < k; ++i) {
    t.sizes.push_back(static_cast<int>(doc.integer(idx("/domain_sizes", i), 1, 1 << 16)));
    cells *= static_cast<std::uint64_t>(t.sizes.back());
    if (cells > kStateGuard) doc.fail("/domain_sizes", "table exceeds the state guard");
  }
  if (doc.array_size("/mass") != cells) {
    doc.fail("/mass", "expected " + std::to_string(cells) + " cells, got " + std::to_string(doc.array_size("/mass")));
  }
  for (std::size_t i = 0; i < cells; ++i) {
    t.values.push_back(doc.number(idx("/mass", i)));
    if (!(t.values.back() >= 0.0)) doc.fail(idx("/mass", i), "negative mass");
  }
  try {
    return DenseDistribution(std::move(t), std::move(names));
  } catch (const Error& e) {
    doc.fail("/mass", e.what());
  }
}

DenseDistribution read_dense(const std::string& path) { return dense_from_json(JsonDoc::load(path)); }

// samples

std::string samples_to_csv(const SampleBatch& b) {
  std::string out;
  for (std::size_t c = 0; c < b.width(); ++c) {
    if (c) out += ',';
    out += b.names().empty() ? "V" + std::to_string(b.columns()[c]) : b.names()[c];
  }
  out += '\n';
  out.reserve(out.size() + b.rows() * b.width() * 2);
  char buf[16];
  for (std::size_t r = 0; r < b.rows(); ++r) {
    const int* row = b.row(r);
    for (std::size_t c = 0; c < b.width(); ++c) {
      if (c) out += ',';
      auto res = std::to_chars(buf, buf + sizeof buf, row[c]);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

SampleBatch samples_from_csv(const std::string& text, const std::string& source, const Admg& g) {
  auto fail = [&](int line, const std::string& msg) -> void {
    throw InputFormatError(source + ":" + std::to_string(line) + ": " + msg);
  };
  std::size_t pos = 0;
  int line = 0;
  auto next_line = [&](std::string_view& out) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    out = std::string_view(text).substr(pos, end - pos);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    pos = end + 1;
    ++line;
    return true;
  };
  auto split = [](std::string_view s) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = s.find(',', start);
      cells.push_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };

  std::string_view header;
  if (!next_line(header)) fail(1, "empty sample file");
  std::vector<int> columns;
  std::vector<std::string> names;
  for (auto cell : split(header)) {
    const std::string name(cell);
    auto v = g.index_of(name);
    if (!v) fail(line, "unknown variable '" + name + "'");
    if (std::find(columns.begin(), columns.end(), *v) != columns.end()) fail(line, "repeated column '" + name + "'");
    columns.push_back(*v);
    names.push_back(name);
  }
  for (int v = 0; v < g.size(); ++v) {
    if (std::find(columns.begin(), columns.end(), v) == columns.end()) fail(line, "missing column '" + g.name(v) + "'");
  }
  SampleBatch b(g.size(), g.alphabet(), columns, names);
  auto& data = b.data();
  std::string_view row;
  while (next_line(row)) {
    if (row.empty() && pos >= text.size()) break;
    const auto cells = split(row);
    if (cells.size() != columns.size()) {
      fail(line, "expected " + std::to_string(columns.size()) + " fields, got " + std::to_string(cells.size()));
    }
    for (auto cell : cells) {
      int v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        fail(line, "not an integer: '" + std::string(cell) + "'");
      }
      if (v < 0 || v >= g.alphabet()) fail(line, "symbol " + std::to_string(v) + " outside the alphabet");
      data.push_back(v);
    }
  }
  return b;
}

SampleBatch read_samples(const std::string& path, const Admg& g) { return samples_from_csv(read_file(path), path, g); }

}  // namespace cbn
