#pragma once

#include <string>

#include "bildsim/cli.hpp"

namespace bildsim::plots {

/// Plot-ready files for a finished run: result CSVs double as plot data, and
/// a generated matplotlib script (plot.py) draws the figures for `command`.
/// Adds a CSV of its own where the results do not already hold the series.
cli::OutputFiles emit_plot_bundle(const std::string& command, const cli::OutputFiles& results);

}  // namespace bildsim::plots
