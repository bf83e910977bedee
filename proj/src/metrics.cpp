#include "rexp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rexp {

ReplicationOutcome score_replication(const FitResult& fit,
                                     const GroundTruth& truth,
                                     double zero_threshold) {
  if (fit.beta_hat.size() != truth.beta_star.size())
    throw std::domain_error("score_replication: length mismatch");
  ReplicationOutcome out;
  double sq = 0.0;
  for (std::size_t j = 0; j < fit.beta_hat.size(); ++j) {
    const double d = fit.beta_hat[j] - truth.beta_star[j];
    out.ae += std::fabs(d);
    sq += d * d;
    if (std::fabs(fit.beta_hat[j]) > zero_threshold) ++out.size;
  }
  out.se = std::sqrt(sq);
  auto selected = [&](std::size_t j) {
    return std::fabs(fit.beta_hat[j]) > zero_threshold;
  };
  out.hit_mean_set =
      selected(5) && selected(11) && selected(14) && selected(19);
  out.hit_x1 = selected(0);
  out.converged = fit.converged;
  return out;
}

ReportCell aggregate(const std::vector<ReplicationOutcome>& outcomes) {
  if (outcomes.empty()) throw std::domain_error("aggregate: empty list");
  ReportCell cell;
  cell.n_total = outcomes.size();

  std::vector<double> ae, se, size;
  for (const auto& o : outcomes) {
    if (o.hit_mean_set) ++cell.f;
    if (o.hit_x1) ++cell.f1;
    if (!o.converged) {
      ++cell.n_fail;
      continue;
    }
    ae.push_back(o.ae);
    se.push_back(o.se);
    size.push_back(static_cast<double>(o.size));
  }
  if (ae.empty()) {
    cell.is_na = true;
    return cell;
  }
  auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    sd = 0.0;
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
  };
  mean_sd(ae, cell.ae_mean, cell.ae_sd);
  mean_sd(se, cell.se_mean, cell.se_sd);
  mean_sd(size, cell.size_mean, cell.size_sd);
  cell.single_sample = ae.size() == 1;
  return cell;
}

namespace {
std::string fmt4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}
std::string mean_sd_str(const ReportCell& c, double mean, double sd) {
  if (c.is_na) return "NA";
  return fmt4(mean) + "(" + fmt4(sd) + ")";
}
}  // namespace

void write_report_csv(const std::vector<ReportRow>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "dist,alpha,method,ae_mean,ae_sd,se_mean,se_sd,size_mean,size_sd,"
         "F,F1,n_fail\n";
  for (const auto& r : rows) {
    out << r.dist << ',' << fmt4(r.alpha) << ',' << r.method << ',';
    if (r.cell.is_na) {
      out << "NA,NA,NA,NA,NA,NA,";
    } else {
      out << fmt4(r.cell.ae_mean) << ',' << fmt4(r.cell.ae_sd) << ','
          << fmt4(r.cell.se_mean) << ',' << fmt4(r.cell.se_sd) << ','
          << fmt4(r.cell.size_mean) << ',' << fmt4(r.cell.size_sd) << ',';
    }
    out << r.cell.f << ',' << r.cell.f1 << ',' << r.cell.n_fail << '\n';
  }
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Dist", "Alpha", "Method", "AE", "SE", "Size", "F", "F1",
                   "Fail"});
  for (const auto& r : rows) {
    cells.push_back(
        {r.dist, fmt4(r.alpha), r.method,
         mean_sd_str(r.cell, r.cell.ae_mean, r.cell.ae_sd),
         mean_sd_str(r.cell, r.cell.se_mean, r.cell.se_sd),
         mean_sd_str(r.cell, r.cell.size_mean, r.cell.size_sd),
         std::to_string(r.cell.f) + "/" + std::to_string(r.cell.n_total),
         std::to_string(r.cell.f1) + "/" + std::to_string(r.cell.n_total),
         std::to_string(r.cell.n_fail)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace rexp
