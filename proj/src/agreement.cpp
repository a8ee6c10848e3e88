#include "emocue/agreement.hpp"

#include <sstream>

#include "emocue/error.hpp"

namespace emocue {

double fleiss_kappa(const RatingMatrix& m) {
  if (m.counts.empty()) throw Error(Errc::InvalidArgument, "rating matrix has no items");
  const std::size_t k = m.counts.front().size();
  if (k < 2) throw Error(Errc::InvalidArgument, "rating matrix needs 2 or more categories");
  std::size_t n = 0;
  for (std::size_t c : m.counts.front()) n += c;
  if (n < 2) throw Error(Errc::InvalidArgument, "rating matrix needs 2 or more raters");

  const double nd = static_cast<double>(n);
  const double items = static_cast<double>(m.counts.size());
  std::vector<double> column(k, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const auto& row = m.counts[i];
    if (row.size() != k) {
      throw Error(Errc::InvalidArgument,
                  "item " + std::to_string(i) + " has " + std::to_string(row.size()) +
                      " categories, expected " + std::to_string(k));
    }
    std::size_t total = 0;
    double squares = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      total += row[j];
      squares += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      column[j] += static_cast<double>(row[j]);
    }
    if (total != n) {
      throw Error(Errc::InvalidArgument, "item " + std::to_string(i) + " has " +
                                             std::to_string(total) + " ratings, expected " +
                                             std::to_string(n));
    }
    p_bar += (squares - nd) / (nd * (nd - 1.0));
  }
  p_bar /= items;
  double p_e = 0.0;
  for (double c : column) {
    const double p = c / (items * nd);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    throw Error(Errc::DegenerateDistribution, "every rating falls in one category");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

RatingMatrix parse_rating_csv(std::string_view csv) {
  RatingMatrix m;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  bool id_column = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      have_header = true;
      if (!cells.empty() && (cells.front() == "item" || cells.front() == "id")) {
        id_column = true;
        cells.erase(cells.begin());
      }
      m.categories = std::move(cells);
      continue;
    }
    if (id_column && !cells.empty()) cells.erase(cells.begin());
    if (cells.size() != m.categories.size()) {
      throw Error(Errc::ParseError,
                  "expected " + std::to_string(m.categories.size()) + " counts, found " +
                      std::to_string(cells.size()),
                  line_no);
    }
    std::vector<std::size_t> row;
    for (const auto& c : cells) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(c, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (c.empty() || pos != c.size() || c.front() == '-') {
        throw Error(Errc::ParseError, "'" + c + "' is not a count", line_no);
      }
      row.push_back(static_cast<std::size_t>(v));
    }
    m.counts.push_back(std::move(row));
  }
  if (!have_header) throw Error(Errc::ParseError, "empty ratings file");
  return m;
}

double span_agreement_f1(const std::vector<AnnotatorSpans>& annotators,
                         const TokenizeOptions& options) {
  if (annotators.size() < 2) {
    throw Error(Errc::InvalidArgument, "span agreement needs 2 or more annotators");
  }
  const AnnotatorSpans& first = annotators.front();
  for (std::size_t a = 1; a < annotators.size(); ++a) {
    const AnnotatorSpans& other = annotators[a];
    bool same = other.size() == first.size();
    for (auto i = first.begin(), j = other.begin(); same && i != first.end(); ++i, ++j) {
      same = i->first == j->first;
    }
    if (!same) {
      throw Error(Errc::MisalignedIds, "annotator " + std::to_string(a) +
                                           " covers different post ids than annotator 0");
    }
  }
  if (first.empty()) throw Error(Errc::EmptyInput, "no posts to compare");

  double sum = 0.0;
  std::size_t terms = 0;
  for (std::size_t a = 0; a < annotators.size(); ++a) {
    for (std::size_t b = a + 1; b < annotators.size(); ++b) {
      for (const auto& [id, spans_a] : annotators[a]) {
        const auto& spans_b = annotators[b].at(id);
        sum += (span_set_f1(spans_a, spans_b, options) +
                span_set_f1(spans_b, spans_a, options)) /
               2.0;
        ++terms;
      }
    }
  }
  return sum / static_cast<double>(terms);
}

}  // namespace emocue
