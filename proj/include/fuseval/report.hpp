#pragma once

#include <string>
#include <vector>

#include "fuseval/metrics.hpp"
#include "fuseval/volume.hpp"

namespace fuseval {

// Renders metric rows as CSV with the fixed header
//   case_id,region,lesion_wise_dice,dice,lesion_wise_hd95,hd95,tp,fp,fn
// Rows are sorted by case_id, then by the order regions appear in `regions`;
// after the per-case rows comes one summary row per region (case_id "mean")
// with the column means. Metric columns use 6 decimals, so the output is
// byte-identical for identical inputs.
std::string format_report_csv(const std::vector<MetricReport>& rows,
                              const std::vector<RegionSpec>& regions);

// format_report_csv + atomic write (temp file, then rename).
void write_report_csv(const std::vector<MetricReport>& rows,
                      const std::vector<RegionSpec>& regions,
                      const std::string& path);

}  // namespace fuseval
