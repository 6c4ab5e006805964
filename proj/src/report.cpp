#include "fuseval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fuseval/errors.hpp"

namespace fuseval {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct MeanAccum {
  double lw_dice = 0, dice = 0, lw_hd95 = 0, hd95 = 0;
  double tp = 0, fp = 0, fn = 0;
  int n = 0;

  void add(const MetricReport& r) {
    lw_dice += r.lesion_wise_dice;
    dice += r.dice;
    lw_hd95 += r.lesion_wise_hd95;
    hd95 += r.hd95;
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
    ++n;
  }
};

}  // namespace

std::string format_report_csv(const std::vector<MetricReport>& rows,
                              const std::vector<RegionSpec>& regions) {
  std::map<std::string, int> region_order;
  for (std::size_t i = 0; i < regions.size(); ++i)
    region_order.emplace(regions[i].name, int(i));
  const auto rank = [&](const std::string& name) {
    auto it = region_order.find(name);
    // Regions absent from the config sort after the known ones, by name.
    return it == region_order.end() ? int(regions.size()) : it->second;
  };

  std::vector<MetricReport> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](const MetricReport& a, const MetricReport& b) {
                     if (a.case_id != b.case_id) return a.case_id < b.case_id;
                     const int ra = rank(a.region), rb = rank(b.region);
                     if (ra != rb) return ra < rb;
                     return a.region < b.region;
                   });

  std::ostringstream out;
  out << "case_id,region,lesion_wise_dice,dice,lesion_wise_hd95,hd95,tp,fp,fn\n";
  std::map<std::string, MeanAccum> means;
  for (const auto& r : sorted) {
    out << r.case_id << ',' << r.region << ',' << fixed6(r.lesion_wise_dice) << ','
        << fixed6(r.dice) << ',' << fixed6(r.lesion_wise_hd95) << ',' << fixed6(r.hd95) << ','
        << r.tp << ',' << r.fp << ',' << r.fn << '\n';
    means[r.region].add(r);
  }

  std::vector<std::string> mean_regions;
  for (const auto& [name, acc] : means) mean_regions.push_back(name);
  std::sort(mean_regions.begin(), mean_regions.end(), [&](const auto& a, const auto& b) {
    const int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });
  for (const auto& name : mean_regions) {
    const MeanAccum& acc = means.at(name);
    const double n = acc.n;
    out << "mean," << name << ',' << fixed6(acc.lw_dice / n) << ',' << fixed6(acc.dice / n)
        << ',' << fixed6(acc.lw_hd95 / n) << ',' << fixed6(acc.hd95 / n) << ','
        << fixed6(acc.tp / n) << ',' << fixed6(acc.fp / n) << ',' << fixed6(acc.fn / n) << '\n';
  }
  return out.str();
}

void write_report_csv(const std::vector<MetricReport>& rows,
                      const std::vector<RegionSpec>& regions, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << format_report_csv(rows, regions);
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace fuseval
