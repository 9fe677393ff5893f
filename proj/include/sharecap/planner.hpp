#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sharecap {

// Per-direction demand for one area: the nominal channel rate plus either a
// directly supplied utilization or a sharing-group demand description.
struct DirectionDemand {
    double channel_rate = 0.0;             // bit/s
    std::optional<double> rho;             // supplied directly, or
    std::optional<double> users;           // sharing-group size
    std::optional<double> per_user_lambda; // requests/s per user
    std::optional<double> mean_size;       // bits
};

struct AreaRecord {
    std::string area_id;
    DirectionDemand download;
    DirectionDemand upload; // rho defaults to the download value when absent
    int base_year = 0;
};

struct TargetThreshold {
    std::string name;
    double download_floor = 0.0; // bit/s
    double upload_floor = 0.0;   // bit/s
};

// Compound annual growth applied to rho.
struct GrowthModel {
    double annual_growth = 0.0; // (1+g) per year
    int horizon_years = 0;
};

enum class Classification { meets, fails, saturated };

std::string to_string(Classification c);

struct YearOutcome {
    int year = 0; // offset from base year
    double download_rho = 0.0;
    double upload_rho = 0.0;
    double download_v = 0.0; // bit/s; 0 when saturated
    double upload_v = 0.0;
    std::map<std::string, Classification> per_threshold;
};

struct PlanVerdict {
    std::string area_id;
    std::vector<YearOutcome> years;
    // first year the verdict degrades below "meets"; absent if it never does
    std::map<std::string, std::optional<int>> binding_year;
};

PlanVerdict evaluate_area(const AreaRecord& record, const std::vector<TargetThreshold>& thresholds,
                          const GrowthModel& growth);

struct BatchIssue {
    std::size_t line = 0;
    std::string message;
};

struct BatchResult {
    std::vector<PlanVerdict> verdicts;
    std::vector<BatchIssue> issues; // malformed rows, duplicate ids
    // summary[threshold][year] -> counts per classification
    std::map<std::string, std::map<int, std::map<Classification, int>>> summary;
};

BatchResult evaluate_batch(const std::vector<std::pair<std::size_t, AreaRecord>>& records,
                           const std::vector<TargetThreshold>& thresholds, const GrowthModel& growth);

// Minimum channel rate meeting `floor` at load rho: floor/(1-rho).
double required_channel_rate(double floor, double rho);

} // namespace sharecap
