// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retro/manifest.hpp"

namespace retro::perception {

// One forced choice between a forward-time clip and a time-reversed clip.
struct PairChoice {
  ClassId class_id = 0;
  bool chose_forward = false;
};

// A crowd worker's submission. Catch trials pair a forward clip with an
// unrelated forward clip; `catch_trials[i]` is true when the worker picked
// the in-class one.
struct SubmissionRecord {
  std::string worker_id;
  std::vector<PairChoice> choices;
  std::vector<bool> catch_trials;

  std::size_t catch_correct() const;
};

struct ClassTally {
  ClassId class_id = 0;
  std::size_t trials = 0;           // n
  std::size_t forward_choices = 0;  // x

  double forward_proportion() const;
};

// Keeps submissions with at least `min_correct` of their `k` catch trials
// right. Throws kValidation when a submission does not carry exactly k
// catch trials or min_correct > k.
std::vector<SubmissionRecord> qc_filter(const std::vector<SubmissionRecord>& submissions, std::size_t k,
                                        std::size_t min_correct);

// Per-class tallies over the non-catch choices, ascending class id.
std::vector<ClassTally> tally_choices(const std::vector<SubmissionRecord>& submissions);

// Folds `extra` into `base` by class id; result ascending by class id.
std::vector<ClassTally> merge_tallies(std::vector<ClassTally> base, const std::vector<ClassTally>& extra);

// Normal approximation to Binomial(n, 0.5): 0.5 -/+ 3 * sqrt(0.25 / n),
// clamped to [0, 1]. Throws kValidation for n == 0.
std::pair<double, double> reversibility_bounds(std::size_t n);

enum class Verdict : std::uint8_t { kReversible, kForwardPreferred, kReversedPreferred };

std::string_view to_string(Verdict verdict);

// Reversible when x/n lies in the closed interval of reversibility_bounds(n).
// Throws kValidation for n == 0 or x > n.
Verdict classify_reversibility(const ClassTally& tally);

// JSONL, one submission per line:
//   {"worker_id": "w1", "choices": [{"class_id": 3, "forward": true}, ...], "catch_trials": [true, true, false]}
std::vector<SubmissionRecord> parse_submissions(std::istream& in, std::string_view source = "<stream>");
std::vector<SubmissionRecord> load_submissions(const std::filesystem::path& path);

// CSV with header `class_id,n_trials,forward_choices`.
std::vector<ClassTally> parse_tallies(std::istream& in, std::string_view source = "<stream>");
std::vector<ClassTally> load_tallies(const std::filesystem::path& path);

// class_id,n_trials,forward_choices,proportion,lower,upper,verdict
void write_report_csv(std::ostream& out, const std::vector<ClassTally>& tallies);

}  // namespace retro::perception
