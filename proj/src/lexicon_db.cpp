#include "grounding/lexicon_db.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "grounding/error.hpp"
#include "grounding/text.hpp"

namespace grounding {

namespace {

constexpr std::array<char, 8> kSnapshotMagic = {'G', 'L', 'E', 'X', 'D', 'B', '\0', '\x01'};
constexpr std::uint32_t kSnapshotVersion = 1;

using CountTable = std::unordered_map<std::string, std::unordered_map<LabelId, std::uint64_t>>;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

// Returns an empty string on success, otherwise the rejection reason.
std::string accept_record(const PairRecord& rec, const LabelSet& labels, CountTable& table) {
  std::string word = normalize_word(rec.word);
  std::string label = std::string(trim(rec.label));
  if (word.empty()) return "empty word";
  if (label.empty()) return "empty label";
  if (rec.count == 0) return "count must be positive";
  auto id = labels.id_of(label);
  if (!id) return "unknown label \"" + label + "\"";
  table[word][*id] += rec.count;
  return {};
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_str(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t read_uint(std::istream& in, int bytes) {
  unsigned char b[8] = {};
  in.read(reinterpret_cast<char*>(b), bytes);
  if (!in) throw SnapshotError("truncated snapshot");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string read_str(std::istream& in) {
  auto n = read_uint(in, 4);
  if (n > (1u << 20)) throw SnapshotError("corrupt snapshot string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw SnapshotError("truncated snapshot");
  return s;
}

}  // namespace

LexiconDb LexiconDb::build(CountTable counts, const LabelSet& labels, std::string source) {
  if (counts.empty()) throw EmptyCorpusError("no valid word-label records in " + source);
  LexiconDb db;
  db.labels_ = labels;
  db.metadata_.source = std::move(source);
  db.index_.reserve(counts.size());
  for (auto& [word, per_label] : counts) {
    WordEntry we;
    we.entries.reserve(per_label.size());
    for (auto [label, count] : per_label) {
      we.entries.push_back({label, count});
      we.total += count;
    }
    std::sort(we.entries.begin(), we.entries.end(), [&](const Entry& a, const Entry& b) {
      if (a.count != b.count) return a.count > b.count;
      return labels.name(a.label) < labels.name(b.label);
    });
    db.metadata_.pair_total += we.total;
    db.index_.emplace(word, std::move(we));
  }
  db.metadata_.word_total = db.index_.size();
  return db;
}

LexiconDb LexiconDb::ingest(std::span<const PairRecord> records, const LabelSet& labels,
                            IngestReport* report, std::string source) {
  CountTable table;
  IngestReport local;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto reason = accept_record(records[i], labels, table);
    if (reason.empty()) {
      ++local.accepted;
    } else {
      local.rejected.push_back({i + 1, records[i].word, records[i].label, std::move(reason)});
    }
  }
  if (report) *report = local;
  return build(std::move(table), labels, std::move(source));
}

LexiconDb LexiconDb::ingest(std::istream& in, const LabelSet& labels, IngestReport* report,
                            std::string source) {
  if (!in) throw IngestionError("unreadable pair source " + source);
  CountTable table;
  IngestReport local;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view = line;
    if (trim(view).empty() || trim(view).front() == '#') continue;
    auto cols = split_tabs(view);
    if (cols.size() < 2 || cols.size() > 3) {
      local.rejected.push_back({lineno, std::string(cols[0]), "", "expected 2 or 3 tab-separated columns"});
      continue;
    }
    PairRecord rec{std::string(cols[0]), std::string(cols[1]), 1};
    if (cols.size() == 3) {
      auto field = trim(cols[2]);
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), rec.count);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        local.rejected.push_back({lineno, rec.word, rec.label, "invalid count \"" + std::string(field) + "\""});
        continue;
      }
    }
    auto reason = accept_record(rec, labels, table);
    if (reason.empty()) {
      ++local.accepted;
    } else {
      local.rejected.push_back({lineno, rec.word, rec.label, std::move(reason)});
    }
  }
  if (in.bad()) throw IngestionError("read failure on " + source);
  if (report) *report = local;
  return build(std::move(table), labels, std::move(source));
}

LexiconDb LexiconDb::ingest_file(const std::filesystem::path& path, const LabelSet& labels,
                                 IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open pair file " + path.string());
  return ingest(in, labels, report, path.string());
}

bool LexiconDb::is_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<char, kSnapshotMagic.size()> head{};
  in.read(head.data(), head.size());
  return in && head == kSnapshotMagic;
}

LexiconDb LexiconDb::open(const std::filesystem::path& path, const LabelSet& labels, IngestReport* report) {
  if (is_snapshot(path)) {
    std::ifstream in(path, std::ios::binary);
    return load_snapshot(in, path.string());
  }
  return ingest_file(path, labels, report);
}

void LexiconDb::save_snapshot(std::ostream& out) const {
  out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  write_u32(out, kSnapshotVersion);
  write_str(out, metadata_.source);
  write_u32(out, static_cast<std::uint32_t>(labels_.size()));
  for (const auto& name : labels_.names()) write_str(out, name);
  auto sorted = words();
  write_u64(out, sorted.size());
  for (const auto& w : sorted) {
    const auto& we = index_.at(w);
    write_str(out, w);
    write_u32(out, static_cast<std::uint32_t>(we.entries.size()));
    for (const auto& e : we.entries) {
      write_u32(out, e.label);
      write_u64(out, e.count);
    }
  }
  if (!out) throw SnapshotError("failed to write snapshot");
}

void LexiconDb::save_snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open " + path.string() + " for writing");
  save_snapshot(out);
}

LexiconDb LexiconDb::load_snapshot(std::istream& in, std::string source) {
  std::array<char, kSnapshotMagic.size()> head{};
  in.read(head.data(), head.size());
  if (!in || head != kSnapshotMagic) throw SnapshotError("not a lexicon snapshot: " + source);
  auto version = read_uint(in, 4);
  if (version != kSnapshotVersion) {
    throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  }
  std::string original_source = read_str(in);
  auto label_count = read_uint(in, 4);
  std::vector<std::string> names;
  names.reserve(label_count);
  for (std::uint64_t i = 0; i < label_count; ++i) names.push_back(read_str(in));
  LabelSet labels(std::move(names));

  CountTable table;
  auto word_count = read_uint(in, 8);
  for (std::uint64_t i = 0; i < word_count; ++i) {
    auto word = read_str(in);
    auto n = read_uint(in, 4);
    auto& per_label = table[word];
    for (std::uint64_t j = 0; j < n; ++j) {
      auto label = read_uint(in, 4);
      auto count = read_uint(in, 8);
      if (label >= labels.size() || count == 0) throw SnapshotError("corrupt snapshot entry for " + word);
      per_label[static_cast<LabelId>(label)] += count;
    }
  }
  return build(std::move(table), labels, std::move(original_source));
}

const LexiconDb::WordEntry* LexiconDb::find(std::string_view word) const {
  auto it = index_.find(normalize_word(word));
  return it == index_.end() ? nullptr : &it->second;
}

std::optional<LabelDistribution> LexiconDb::distribution(std::string_view word) const {
  const auto* we = find(word);
  if (!we) return std::nullopt;
  LabelDistribution d;
  d.word = normalize_word(word);
  d.total_pairs = we->total;
  d.entries.reserve(we->entries.size());
  const double total = static_cast<double>(we->total);
  for (const auto& e : we->entries) {
    d.entries.push_back({labels_.name(e.label), e.count, static_cast<double>(e.count) / total});
  }
  return d;
}

std::optional<TopLabel> LexiconDb::top_label(std::string_view word) const {
  const auto* we = find(word);
  if (!we) return std::nullopt;
  const auto& head = we->entries.front();
  return TopLabel{labels_.name(head.label), static_cast<double>(head.count) / static_cast<double>(we->total),
                  head.count};
}

std::uint64_t LexiconDb::pair_count(std::string_view word) const {
  const auto* we = find(word);
  return we ? we->total : 0;
}

std::vector<std::string> LexiconDb::sample_pairs(std::string_view word, std::size_t n, Rng& rng) const {
  std::vector<std::string> out;
  const auto* we = find(word);
  if (!we || n == 0) return out;

  if (n >= we->total) {
    out.reserve(we->total);
    for (const auto& e : we->entries) out.insert(out.end(), e.count, labels_.name(e.label));
    return out;
  }

  // Pair i of the word's multiset maps to the entry whose cumulative range
  // contains i.
  std::vector<std::uint64_t> cumulative;
  cumulative.reserve(we->entries.size());
  std::uint64_t running = 0;
  for (const auto& e : we->entries) {
    running += e.count;
    cumulative.push_back(running);
  }
  auto label_of = [&](std::uint64_t index) -> const std::string& {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), index);
    return labels_.name(we->entries[static_cast<std::size_t>(it - cumulative.begin())].label);
  };

  // Partial Fisher-Yates over the virtual index array [0, total).
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto value_at = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t j = i + rng.uniform_below(we->total - i);
    std::uint64_t vi = value_at(i);
    std::uint64_t vj = value_at(j);
    swapped[i] = vj;
    swapped[j] = vi;
    out.push_back(label_of(vj));
  }
  return out;
}

std::vector<LabelCount> LexiconDb::top_labels(std::size_t k) const {
  std::vector<std::uint64_t> per_label(labels_.size(), 0);
  for (const auto& [word, we] : index_) {
    for (const auto& e : we.entries) per_label[e.label] += e.count;
  }
  std::vector<LabelCount> out;
  for (std::size_t i = 0; i < per_label.size(); ++i) {
    if (per_label[i] == 0) continue;
    double pct = metadata_.pair_total ? static_cast<double>(per_label[i]) / static_cast<double>(metadata_.pair_total) : 0.0;
    out.push_back({labels_.name(static_cast<LabelId>(i)), per_label[i], pct});
  }
  std::sort(out.begin(), out.end(), [](const LabelCount& a, const LabelCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.label < b.label;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<std::string> LexiconDb::words() const {
  std::vector<std::string> out;
  out.reserve(index_.size());
  for (const auto& [w, _] : index_) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace grounding
