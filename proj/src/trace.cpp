#include "consroute/trace.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "consroute/error.hpp"

namespace consroute {

namespace {

using Json = nlohmann::ordered_json;

bool is_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

std::optional<double> optional_score(const Json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ParseError(line, std::string(key) + " must be a number");
  return it->get<double>();
}

std::uint64_t read_count(const Json& obj, const char* key, std::size_t line,
                         std::optional<std::uint64_t> fallback = std::nullopt) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw ParseError(line, std::string("missing field ") + key);
  }
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer()) {
    throw Error(ErrorKind::out_of_range,
                "line " + std::to_string(line) + ": " + key + " must be nonnegative");
  }
  throw ParseError(line, std::string(key) + " must be an integer");
}

TierResponseInfo parse_tier(const Json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "tier entry must be an object");
  TierResponseInfo info;
  if (auto it = obj.find("correct"); it != obj.end() && !it->is_null()) {
    if (!it->is_boolean()) throw ParseError(line, "correct must be a boolean");
    info.correct = it->get<bool>();
  }
  info.prompt_tokens = read_count(obj, "prompt_tokens", line);
  info.generated_tokens = read_count(obj, "generated_tokens", line);
  auto cs = obj.find("compute_seconds");
  if (cs == obj.end() || !cs->is_number()) throw ParseError(line, "compute_seconds missing");
  info.compute_seconds = cs->get<double>();
  info.request_bytes = read_count(obj, "request_bytes", line, kBytesPerToken * info.prompt_tokens);
  info.response_bytes =
      read_count(obj, "response_bytes", line, kBytesPerToken * info.generated_tokens);
  return info;
}

QueryRecord parse_record(const Json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");
  QueryRecord rec;
  auto id = obj.find("id");
  if (id == obj.end() || !id->is_string()) throw ParseError(line, "record id missing");
  rec.id = id->get<std::string>();

  auto emb = obj.find("embedding");
  if (emb == obj.end() || !emb->is_array()) throw ParseError(line, "embedding missing");
  rec.embedding.reserve(emb->size());
  for (const auto& v : *emb) {
    if (!v.is_number()) throw ParseError(line, "embedding entries must be numbers");
    rec.embedding.push_back(v.get<double>());
  }

  if (auto ti = obj.find("tier_info"); ti != obj.end() && !ti->is_null()) {
    if (!ti->is_object()) throw ParseError(line, "tier_info must be an object");
    for (const auto& [key, value] : ti->items()) {
      TierId tier;
      try {
        tier = tier_from_string(key);
      } catch (const Error&) {
        throw ParseError(line, "unknown tier '" + key + "'");
      }
      rec.tier_info[index(tier)] = parse_tier(value, line);
    }
  }

  rec.sim_cloud = optional_score(obj, "sim_cloud", line);
  rec.sim_edge = optional_score(obj, "sim_edge", line);
  rec.judge_cloud = optional_score(obj, "judge_cloud", line);
  rec.judge_edge = optional_score(obj, "judge_edge", line);
  if (auto hr = obj.find("has_reference"); hr != obj.end() && !hr->is_null()) {
    if (!hr->is_boolean()) throw ParseError(line, "has_reference must be a boolean");
    rec.has_reference = hr->get<bool>();
  }
  return rec;
}

void validate_record(const QueryRecord& rec, std::size_t dim) {
  if (rec.embedding.size() != dim) {
    throw Error(ErrorKind::dimension_mismatch,
                "record '" + rec.id + "' has embedding length " +
                    std::to_string(rec.embedding.size()) + ", expected " + std::to_string(dim));
  }
  for (double v : rec.embedding) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::out_of_range, "record '" + rec.id + "' has a non-finite embedding");
    }
  }
  const std::pair<const char*, const std::optional<double>*> scores[] = {
      {"sim_cloud", &rec.sim_cloud},
      {"sim_edge", &rec.sim_edge},
      {"judge_cloud", &rec.judge_cloud},
      {"judge_edge", &rec.judge_edge}};
  for (const auto& [name, score] : scores) {
    if (*score && !is_unit_interval(**score)) {
      throw Error(ErrorKind::out_of_range,
                  "record '" + rec.id + "': " + name + " outside [0,1]");
    }
  }
  for (TierId t : kAllTiers) {
    const auto& info = rec.tier_info[index(t)];
    if (!info) {
      if (rec.has_reference) {
        throw Error(ErrorKind::missing_tier, "record '" + rec.id + "' has a reference but no " +
                                                 std::string(to_string(t)) + " response");
      }
      continue;
    }
    if (info->generated_tokens < 1) {
      throw Error(ErrorKind::out_of_range, "record '" + rec.id + "': " +
                                               std::string(to_string(t)) +
                                               " generated_tokens must be >= 1");
    }
    if (!std::isfinite(info->compute_seconds) || info->compute_seconds < 0.0) {
      throw Error(ErrorKind::out_of_range, "record '" + rec.id + "': " +
                                               std::string(to_string(t)) +
                                               " compute_seconds must be >= 0");
    }
    if (rec.has_reference && !info->correct) {
      throw Error(ErrorKind::missing_score, "record '" + rec.id + "' has a reference but " +
                                                std::string(to_string(t)) +
                                                " correctness is absent");
    }
  }
}

Json tier_to_json(const TierResponseInfo& info) {
  Json j;
  if (info.correct) j["correct"] = *info.correct;
  j["prompt_tokens"] = info.prompt_tokens;
  j["generated_tokens"] = info.generated_tokens;
  j["compute_seconds"] = info.compute_seconds;
  j["request_bytes"] = info.request_bytes;
  j["response_bytes"] = info.response_bytes;
  return j;
}

}  // namespace

const TierResponseInfo& QueryRecord::tier(TierId t) const {
  const auto& info = tier_info[index(t)];
  if (!info) {
    throw Error(ErrorKind::missing_tier,
                "record '" + id + "' has no " + std::string(to_string(t)) + " response");
  }
  return *info;
}

bool QueryRecord::correct(TierId t) const {
  const auto& info = tier(t);
  if (!info.correct) {
    throw Error(ErrorKind::missing_score,
                "record '" + id + "' has no " + std::string(to_string(t)) + " correctness");
  }
  return *info.correct;
}

RowMatrix Trace::embedding_matrix() const {
  RowMatrix m(records.size(), embedding_dim);
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = 0; j < embedding_dim; ++j) m(i, j) = records[i].embedding[j];
  }
  return m;
}

Trace Trace::slice(std::size_t begin, std::size_t end) const {
  Trace out;
  out.embedding_dim = embedding_dim;
  out.prompt_text = prompt_text;
  out.metadata = metadata;
  end = std::min(end, records.size());
  if (begin < end) out.records.assign(records.begin() + begin, records.begin() + end);
  return out;
}

void validate(const Trace& trace) {
  if (trace.embedding_dim == 0) {
    throw Error(ErrorKind::invalid_config, "embedding_dim must be positive");
  }
  std::unordered_set<std::string> ids;
  ids.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    validate_record(rec, trace.embedding_dim);
    if (!ids.insert(rec.id).second) {
      throw Error(ErrorKind::duplicate_id, "duplicate record id '" + rec.id + "'");
    }
  }
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::unordered_set<std::string> ids;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!have_header) {
      if (!obj.is_object()) throw ParseError(line_no, "header must be a JSON object");
      auto dim = obj.find("embedding_dim");
      if (dim == obj.end() || !dim->is_number_unsigned() || dim->get<std::uint64_t>() == 0) {
        throw ParseError(line_no, "header needs a positive integer embedding_dim");
      }
      trace.embedding_dim = dim->get<std::size_t>();
      if (auto p = obj.find("prompt_text"); p != obj.end() && p->is_string()) {
        trace.prompt_text = p->get<std::string>();
      }
      if (auto md = obj.find("metadata"); md != obj.end() && md->is_object()) {
        for (const auto& [k, v] : md->items()) {
          trace.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      have_header = true;
      continue;
    }
    QueryRecord rec = parse_record(obj, line_no);
    try {
      validate_record(rec, trace.embedding_dim);
    } catch (const Error& e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(rec.id).second) {
      throw Error(ErrorKind::duplicate_id,
                  "line " + std::to_string(line_no) + ": duplicate record id '" + rec.id + "'");
    }
    trace.records.push_back(std::move(rec));
  }
  if (!have_header) throw ParseError(line_no + 1, "missing trace header");
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open trace file " + path.string());
  return parse_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out) {
  Json header;
  header["embedding_dim"] = trace.embedding_dim;
  header["prompt_text"] = trace.prompt_text;
  Json md = Json::object();
  for (const auto& [k, v] : trace.metadata) md[k] = v;
  header["metadata"] = md;
  out << header.dump() << '\n';

  for (const auto& rec : trace.records) {
    Json j;
    j["id"] = rec.id;
    j["embedding"] = rec.embedding;
    Json tiers = Json::object();
    for (TierId t : kAllTiers) {
      if (const auto& info = rec.tier_info[index(t)]) {
        tiers[std::string(to_string(t))] = tier_to_json(*info);
      }
    }
    j["tier_info"] = tiers;
    if (rec.sim_cloud) j["sim_cloud"] = *rec.sim_cloud;
    if (rec.sim_edge) j["sim_edge"] = *rec.sim_edge;
    if (rec.judge_cloud) j["judge_cloud"] = *rec.judge_cloud;
    if (rec.judge_edge) j["judge_edge"] = *rec.judge_edge;
    j["has_reference"] = rec.has_reference;
    out << j.dump() << '\n';
  }
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write trace file " + path.string());
  write_trace(trace, out);
  if (!out) throw Error(ErrorKind::io, "failed writing trace file " + path.string());
}

}  // namespace consroute
