#pragma once

// Reported (precision, recall, F) triples for the All attribute set with the
// random forest, one per project and profile. Recommendation rows use F2 at
// k = 3, augmentation rows F0.5 at score > 0.95. Values are rounded to two
// places, so recomputed F matches within 0.02.

#include <string>
#include <vector>

namespace fixtures {

struct ReportedRow {
    std::string project;
    std::string profile;
    double precision;
    double recall;
    double f;
};

inline const std::vector<ReportedRow>& recommendation_rows() {
    static const std::vector<ReportedRow> rows{
        {"Derby", "Bug", 0.30, 0.88, 0.63},       {"Derby", "Improvement", 0.32, 0.95, 0.68},
        {"Drools", "Bug", 0.34, 1.00, 0.72},      {"Drools", "Improvement", 0.46, 1.00, 0.81},
        {"Groovy", "Bug", 0.31, 0.92, 0.66},      {"Groovy", "Improvement", 0.33, 0.95, 0.69},
        {"Infinispan", "Bug", 0.31, 0.92, 0.66},  {"Infinispan", "Improvement", 0.33, 0.98, 0.71},
        {"Maven", "Bug", 0.34, 0.99, 0.72},       {"Maven", "Improvement", 0.33, 0.94, 0.68},
        {"Pig", "Bug", 0.33, 0.99, 0.71},         {"Pig", "Improvement", 0.34, 1.00, 0.72},
    };
    return rows;
}

inline const std::vector<ReportedRow>& augmentation_rows() {
    static const std::vector<ReportedRow> rows{
        {"Derby", "Bug", 0.98, 0.10, 0.37},       {"Derby", "Improvement", 0.98, 0.28, 0.66},
        {"Drools", "Bug", 0.94, 0.67, 0.87},      {"Drools", "Improvement", 1.00, 0.23, 0.60},
        {"Groovy", "Bug", 0.89, 0.41, 0.72},      {"Groovy", "Improvement", 0.90, 0.58, 0.81},
        {"Infinispan", "Bug", 0.93, 0.48, 0.78},  {"Infinispan", "Improvement", 0.97, 0.69, 0.89},
        {"Maven", "Bug", 0.99, 0.37, 0.74},       {"Maven", "Improvement", 0.95, 0.52, 0.82},
        {"Pig", "Bug", 0.99, 0.83, 0.95},         {"Pig", "Improvement", 1.00, 0.90, 0.98},
    };
    return rows;
}

}  // namespace fixtures
