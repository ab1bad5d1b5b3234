#pragma once

#include "curvscan/corpus.hpp"
#include "curvscan/jsonio.hpp"
#include "curvscan/warped.hpp"

namespace curvscan {

ojson to_json(const ClassificationReport& rep);
ojson to_json(const AssemblyReport& rep);
ojson to_json(const CaseReport& rep);

/// The complete verify-paper document: config echo, one entry per case,
/// and the overall verdict.
ojson verify_paper_json(const std::vector<CaseReport>& reports,
                        const ClassifyConfig& config);

}  // namespace curvscan
