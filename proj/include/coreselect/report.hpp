#pragma once

#include <string>

#include "coreselect/harness.hpp"

namespace coreselect {

// JSON with insertion-ordered keys and shortest-round-trip numbers, so a
// given report always serializes to the same bytes. Non-finite doubles
// become null.
std::string report_to_json(const RunReport& report);
void write_report_file(const RunReport& report, const std::string& path);

// Selected-epoch list for downstream labeling: "epoch,weight" rows in
// entry order.
std::string selected_epochs_csv(const RunReport& report);
void write_selected_csv_file(const RunReport& report,
                             const std::string& path);

}  // namespace coreselect
