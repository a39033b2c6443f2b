#include "ionctx/trial_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ionctx/errors.hpp"
#include "ionctx/report.hpp"

namespace ionctx {

int parse_setting(std::string_view text) {
  for (int c = 0; c < 4; ++c) {
    if (text == context_label(c)) return c;
  }
  throw std::invalid_argument("unknown setting '" + std::string(text) + "'");
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

int parse_outcome(std::string_view s, std::size_t line) {
  if (s == "+1" || s == "1") return 1;
  if (s == "-1") return -1;
  throw ParseError(line, "outcome '" + std::string(s) + "' is not +1 or -1");
}

std::uint64_t parse_u64(std::string_view s, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

const char* signed_text(int v) { return v > 0 ? "+1" : "-1"; }

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Reads the header and hands every non-empty record line to `fn`.
template <typename Fn>
void for_each_record(std::istream& in, std::string_view header, Fn&& fn) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != header) {
    throw ParseError(1, "expected header '" + std::string(header) + "'");
  }
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    fn(std::string_view(line), number);
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_trials(std::ostream& out, std::span<const TrialRecord> trials) {
  out << kTrialHeader << '\n';
  for (const auto& t : trials) {
    out << context_label(t.context) << '\t' << signed_text(t.outcome_i) << '\t' << signed_text(t.outcome_j) << '\t'
        << t.trial_index << '\t' << t.rng_stream_id << '\n';
  }
}

void write_trials(const std::filesystem::path& path, std::span<const TrialRecord> trials) {
  auto out = open_out(path);
  write_trials(out, trials);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<TrialRecord> read_trials(std::istream& in) {
  std::vector<TrialRecord> trials;
  for_each_record(in, kTrialHeader, [&](std::string_view line, std::size_t number) {
    const auto f = split_tabs(line);
    if (f.size() != 5) throw ParseError(number, "expected 5 fields, found " + std::to_string(f.size()));
    TrialRecord t;
    try {
      t.context = parse_setting(f[0]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(number, e.what());
    }
    t.outcome_i = parse_outcome(f[1], number);
    t.outcome_j = parse_outcome(f[2], number);
    t.trial_index = parse_u64(f[3], number, "trial index");
    t.rng_stream_id = parse_u64(f[4], number, "stream id");
    trials.push_back(t);
  });
  return trials;
}

std::vector<TrialRecord> read_trials(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trials(in);
}

void write_repeatability(std::ostream& out, std::span<const RepeatabilityRecord> records) {
  out << kRepeatabilityHeader << '\n';
  for (const auto& r : records) {
    out << r.observable << '\t' << r.branch << '\t' << signed_text(r.first_outcome) << '\t'
        << signed_text(r.second_outcome) << '\t' << (r.post_selected ? 1 : 0) << '\t' << r.run_index << '\n';
  }
}

void write_repeatability(const std::filesystem::path& path, std::span<const RepeatabilityRecord> records) {
  auto out = open_out(path);
  write_repeatability(out, records);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<RepeatabilityRecord> read_repeatability(std::istream& in) {
  std::vector<RepeatabilityRecord> records;
  for_each_record(in, kRepeatabilityHeader, [&](std::string_view line, std::size_t number) {
    const auto f = split_tabs(line);
    if (f.size() != 6) throw ParseError(number, "expected 6 fields, found " + std::to_string(f.size()));
    RepeatabilityRecord r;
    const auto obs = parse_u64(f[0], number, "observable");
    if (obs > 3) throw ParseError(number, "observable out of range");
    r.observable = static_cast<int>(obs);
    const auto branch = parse_u64(f[1], number, "branch");
    if (branch > 1) throw ParseError(number, "branch must be 0 or 1");
    r.branch = static_cast<int>(branch);
    r.first_outcome = parse_outcome(f[2], number);
    r.second_outcome = parse_outcome(f[3], number);
    const auto kept = parse_u64(f[4], number, "post-selection flag");
    if (kept > 1) throw ParseError(number, "post-selection flag must be 0 or 1");
    r.post_selected = kept == 1;
    r.run_index = parse_u64(f[5], number, "run index");
    records.push_back(r);
  });
  return records;
}

std::vector<RepeatabilityRecord> read_repeatability(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_repeatability(in);
}

}  // namespace ionctx
