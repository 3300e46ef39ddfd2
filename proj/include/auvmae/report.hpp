#pragma once

#include <string>
#include <utility>
#include <vector>

#include "auvmae/eval.hpp"
#include "auvmae/knowledge.hpp"

namespace auvmae {

/// N x N heatmap with one labelled cell per AU pair; NaN cells are grey.
std::string intra_heatmap_svg(const Matrix& matrix, const std::vector<int>& au_ids,
                              const std::string& title);

/// One row per AU pair (i, j), one column per transition state s = 0..15.
std::string inter_heatmap_svg(const std::vector<double>& tensor, int n, const std::vector<int>& au_ids,
                              const std::string& title);

/// Markdown table with one row per named run and one column per AU plus Avg,
/// values in percent.
std::string metrics_table_markdown(const std::vector<std::pair<std::string, MetricReport>>& rows,
                                   bool accuracy = false);

std::string metrics_table_csv(const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace auvmae
