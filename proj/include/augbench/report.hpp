#pragma once

#include <string>
#include <vector>

#include "augbench/analysis.hpp"
#include "augbench/corpus.hpp"
#include "augbench/eval.hpp"

namespace augbench {

struct FigureRef {
    std::string caption;
    std::string path;  // relative to the report file
};

struct ReportInputs {
    const CompositionTable* composition = nullptr;
    const EvalReport* eval_report = nullptr;
    const std::vector<SimilarityRow>* similarity = nullptr;
    const std::vector<FigureRef>* figures = nullptr;
};

// Renders the present sections to Markdown and JSON. Both carry the same
// display-rounded numbers (3 decimals for performance, 4 for similarity), so
// reruns with equal inputs are byte-identical; timestamps live in manifests,
// not here.
void assemble_report(const ReportInputs& inputs, const std::string& md_path,
                     const std::string& json_path);

}  // namespace augbench
