#include "sharecap/planner.hpp"
#include "sharecap/errors.hpp"
#include "sharecap/model.hpp"

#include <cmath>
#include <set>

namespace sharecap {

std::string to_string(Classification c) {
    switch (c) {
        case Classification::meets: return "meets";
        case Classification::fails: return "fails";
        case Classification::saturated: return "saturated";
    }
    return "?";
}

namespace {

double base_rho(const DirectionDemand& demand, const char* direction) {
    if (demand.channel_rate <= 0.0)
        throw MalformedRecord(std::string(direction) + ": channel rate must be positive");
    if (demand.rho) {
        if (*demand.rho < 0.0)
            throw MalformedRecord(std::string(direction) + ": rho must be nonnegative");
        return *demand.rho;
    }
    if (!demand.users || !demand.per_user_lambda || !demand.mean_size)
        throw MalformedRecord(std::string(direction) +
                              ": either rho or (users, per-user lambda, mean size) required");
    if (*demand.users < 0.0 || *demand.per_user_lambda < 0.0 || *demand.mean_size <= 0.0)
        throw MalformedRecord(std::string(direction) + ": invalid demand parameters");
    // aggregate fair-sharing utilization of the sharing group; may be >= 1,
    // which the planner reports as saturated rather than erroring
    return (*demand.users) * (*demand.per_user_lambda) * (*demand.mean_size) / demand.channel_rate;
}

} // namespace

PlanVerdict evaluate_area(const AreaRecord& record, const std::vector<TargetThreshold>& thresholds,
                          const GrowthModel& growth) {
    if (record.area_id.empty()) throw MalformedRecord("missing area id");
    if (growth.annual_growth < 0.0 || growth.horizon_years < 0)
        throw MalformedRecord("growth must be nonnegative, horizon at least 0 years");

    const double down_rho0 = base_rho(record.download, "download");
    double up_rho0;
    if (record.upload.channel_rate <= 0.0)
        throw MalformedRecord("upload: channel rate must be positive");
    if (!record.upload.rho && !record.upload.users) {
        up_rho0 = down_rho0; // upload load defaults to the download value
    } else {
        up_rho0 = base_rho(record.upload, "upload");
    }

    PlanVerdict verdict;
    verdict.area_id = record.area_id;
    for (const auto& threshold : thresholds) verdict.binding_year[threshold.name] = std::nullopt;

    for (int year = 0; year <= growth.horizon_years; ++year) {
        const double factor = std::pow(1.0 + growth.annual_growth, year);
        YearOutcome outcome;
        outcome.year = year;
        outcome.download_rho = down_rho0 * factor;
        outcome.upload_rho = up_rho0 * factor;
        const bool down_saturated = outcome.download_rho >= 1.0;
        const bool up_saturated = outcome.upload_rho >= 1.0;
        outcome.download_v =
            down_saturated ? 0.0 : (1.0 - outcome.download_rho) * record.download.channel_rate;
        outcome.upload_v = up_saturated ? 0.0 : (1.0 - outcome.upload_rho) * record.upload.channel_rate;

        for (const auto& threshold : thresholds) {
            Classification cls;
            if (down_saturated || up_saturated) {
                cls = Classification::saturated;
            } else if (outcome.download_v >= threshold.download_floor &&
                       outcome.upload_v >= threshold.upload_floor) {
                cls = Classification::meets;
            } else {
                cls = Classification::fails;
            }
            outcome.per_threshold[threshold.name] = cls;
            if (cls != Classification::meets && !verdict.binding_year[threshold.name])
                verdict.binding_year[threshold.name] = year;
        }
        verdict.years.push_back(std::move(outcome));
    }
    return verdict;
}

BatchResult evaluate_batch(const std::vector<std::pair<std::size_t, AreaRecord>>& records,
                           const std::vector<TargetThreshold>& thresholds,
                           const GrowthModel& growth) {
    BatchResult result;
    std::set<std::string> seen;
    for (const auto& [line, record] : records) {
        if (!record.area_id.empty() && !seen.insert(record.area_id).second)
            result.issues.push_back({line, "duplicate area_id '" + record.area_id + "'"});
        try {
            PlanVerdict verdict = evaluate_area(record, thresholds, growth);
            for (const auto& year : verdict.years)
                for (const auto& [name, cls] : year.per_threshold)
                    result.summary[name][year.year][cls] += 1;
            result.verdicts.push_back(std::move(verdict));
        } catch (const MalformedRecord& error) {
            result.issues.push_back({line, error.what()});
        }
    }
    return result;
}

double required_channel_rate(double floor, double rho) {
    if (rho >= 1.0) throw UnstableLoad(rho);
    if (rho < 0.0 || floor <= 0.0) throw MalformedRecord("floor must be positive and rho in [0,1)");
    return floor / (1.0 - rho);
}

} // namespace sharecap
