// SPDX-License-Identifier: Apache-2.0
#include "retro/perception.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "retro/error.hpp"

namespace retro::perception {

using nlohmann::json;

std::size_t SubmissionRecord::catch_correct() const {
  return static_cast<std::size_t>(std::count(catch_trials.begin(), catch_trials.end(), true));
}

double ClassTally::forward_proportion() const {
  if (trials == 0) throw Error(ErrorKind::kValidation, "class " + std::to_string(class_id) + " has no trials");
  return static_cast<double>(forward_choices) / static_cast<double>(trials);
}

std::vector<SubmissionRecord> qc_filter(const std::vector<SubmissionRecord>& submissions, std::size_t k,
                                        std::size_t min_correct) {
  if (min_correct > k) {
    throw Error(ErrorKind::kValidation, "min_correct " + std::to_string(min_correct) + " exceeds k " + std::to_string(k));
  }
  std::vector<SubmissionRecord> accepted;
  for (const auto& s : submissions) {
    if (s.catch_trials.size() != k) {
      throw Error(ErrorKind::kValidation, "submission from '" + s.worker_id + "' has " +
                                              std::to_string(s.catch_trials.size()) + " catch trials, expected " +
                                              std::to_string(k));
    }
    if (s.catch_correct() >= min_correct) accepted.push_back(s);
  }
  return accepted;
}

std::vector<ClassTally> tally_choices(const std::vector<SubmissionRecord>& submissions) {
  std::map<ClassId, ClassTally> by_class;
  for (const auto& s : submissions) {
    for (const auto& choice : s.choices) {
      auto& t = by_class[choice.class_id];
      t.class_id = choice.class_id;
      ++t.trials;
      if (choice.chose_forward) ++t.forward_choices;
    }
  }
  std::vector<ClassTally> out;
  for (const auto& [id, t] : by_class) out.push_back(t);
  return out;
}

std::vector<ClassTally> merge_tallies(std::vector<ClassTally> base, const std::vector<ClassTally>& extra) {
  std::map<ClassId, ClassTally> by_class;
  for (const auto& t : base) {
    auto& m = by_class[t.class_id];
    m.class_id = t.class_id;
    m.trials += t.trials;
    m.forward_choices += t.forward_choices;
  }
  for (const auto& t : extra) {
    auto& m = by_class[t.class_id];
    m.class_id = t.class_id;
    m.trials += t.trials;
    m.forward_choices += t.forward_choices;
  }
  base.clear();
  for (const auto& [id, t] : by_class) base.push_back(t);
  return base;
}

std::pair<double, double> reversibility_bounds(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kValidation, "reversibility bounds need at least one trial");
  const double sigma = std::sqrt(0.25 / static_cast<double>(n));
  return {std::max(0.0, 0.5 - 3.0 * sigma), std::min(1.0, 0.5 + 3.0 * sigma)};
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kReversible: return "reversible";
    case Verdict::kForwardPreferred: return "forward-preferred";
    case Verdict::kReversedPreferred: return "reversed-preferred";
  }
  return "?";
}

Verdict classify_reversibility(const ClassTally& tally) {
  if (tally.forward_choices > tally.trials) {
    throw Error(ErrorKind::kValidation, "class " + std::to_string(tally.class_id) + " has more forward choices (" +
                                            std::to_string(tally.forward_choices) + ") than trials (" +
                                            std::to_string(tally.trials) + ")");
  }
  const auto [lower, upper] = reversibility_bounds(tally.trials);
  const double x = tally.forward_proportion();
  if (x > upper) return Verdict::kForwardPreferred;
  if (x < lower) return Verdict::kReversedPreferred;
  return Verdict::kReversible;
}

std::vector<SubmissionRecord> parse_submissions(std::istream& in, std::string_view source) {
  std::vector<SubmissionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::kParse, where + e.what());
    }
    if (!j.is_object() || !j.contains("worker_id") || !j["worker_id"].is_string()) {
      throw Error(ErrorKind::kParse, where + "expected a string \"worker_id\"");
    }
    SubmissionRecord s;
    s.worker_id = j["worker_id"].get<std::string>();
    if (!j.contains("choices") || !j["choices"].is_array()) {
      throw Error(ErrorKind::kParse, where + "expected an array \"choices\"");
    }
    for (const auto& c : j["choices"]) {
      if (!c.is_object() || !c.contains("class_id") || !c["class_id"].is_number_unsigned() || !c.contains("forward") ||
          !c["forward"].is_boolean()) {
        throw Error(ErrorKind::kParse, where + "choices need an integer \"class_id\" and a boolean \"forward\"");
      }
      s.choices.push_back({c["class_id"].get<ClassId>(), c["forward"].get<bool>()});
    }
    if (!j.contains("catch_trials") || !j["catch_trials"].is_array()) {
      throw Error(ErrorKind::kParse, where + "expected an array \"catch_trials\"");
    }
    for (const auto& c : j["catch_trials"]) {
      if (!c.is_boolean()) throw Error(ErrorKind::kParse, where + "catch_trials entries must be booleans");
      s.catch_trials.push_back(c.get<bool>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SubmissionRecord> load_submissions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open submissions '" + path.string() + "'");
  return parse_submissions(in, path.string());
}

namespace {

std::size_t parse_count(std::string_view field, const std::string& where) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  std::size_t value = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::kParse, where + "'" + std::string(field) + "' is not a non-negative integer");
  }
  return value;
}

}  // namespace

std::vector<ClassTally> parse_tallies(std::istream& in, std::string_view source) {
  std::vector<ClassTally> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("class_id", 0) == 0) continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 3) throw Error(ErrorKind::kParse, where + "expected class_id,n_trials,forward_choices");
    ClassTally t;
    t.class_id = static_cast<ClassId>(parse_count(fields[0], where));
    t.trials = parse_count(fields[1], where);
    t.forward_choices = parse_count(fields[2], where);
    if (t.forward_choices > t.trials) {
      throw Error(ErrorKind::kValidation, where + "forward_choices exceeds n_trials");
    }
    out.push_back(t);
  }
  return out;
}

std::vector<ClassTally> load_tallies(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open tally file '" + path.string() + "'");
  return parse_tallies(in, path.string());
}

void write_report_csv(std::ostream& out, const std::vector<ClassTally>& tallies) {
  out << "class_id,n_trials,forward_choices,proportion,lower,upper,verdict\n";
  for (const auto& t : tallies) {
    const auto [lower, upper] = reversibility_bounds(t.trials);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f", t.forward_proportion(), lower, upper);
    out << t.class_id << ',' << t.trials << ',' << t.forward_choices << ',' << buf << ','
        << to_string(classify_reversibility(t)) << '\n';
  }
}

}  // namespace retro::perception
