#pragma once

// Inter-annotator agreement.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "emocue/metrics.hpp"

namespace emocue {

/// counts[item][category] = raters choosing that category for the item.
struct RatingMatrix {
  std::vector<std::string> categories;
  std::vector<std::vector<std::size_t>> counts;
};

/// Throws InvalidArgument when rows differ in total, fewer than 2 raters,
/// no items or fewer than 2 categories; DegenerateDistribution when every
/// rating falls in one category.
double fleiss_kappa(const RatingMatrix& m);

/// CSV with a header row of category names. A first column whose header is
/// "item" or "id" holds item names and is skipped. Throws ParseError(line).
RatingMatrix parse_rating_csv(std::string_view csv);

/// One annotator's spans per post id.
using AnnotatorSpans = std::map<std::string, std::vector<std::string>>;

/// Mean over annotator pairs and posts of the two-direction mean of
/// span_set_f1. Throws InvalidArgument (fewer than 2 annotators) or
/// MisalignedIds (annotators cover different post ids).
double span_agreement_f1(const std::vector<AnnotatorSpans>& annotators,
                         const TokenizeOptions& options = {});

}  // namespace emocue
