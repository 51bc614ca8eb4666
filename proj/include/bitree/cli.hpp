#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bitree/mc.hpp"
#include "bitree/model.hpp"
#include "bitree/pricer.hpp"

namespace bitree::cli {

inline constexpr const char* tool_version = "1.0.0";

enum ExitCode : int { ok = 0, invalid_input = 2, non_finite = 3, internal_error = 4 };

struct TableSpec {
    std::string name;  // "table1".."table4" or "sweep"
    double maturity = 1.0;
    Exercise exercise = Exercise::european;
    std::vector<double> sigmas;
    std::vector<int> steps;
    std::vector<Method> methods;  // column order
};

// The four published layouts; id outside 1..4 throws std::invalid_argument.
TableSpec table_spec(int id);

struct TableCell {
    double sigma_r = 0.0;
    int steps = 0;
    Method method = Method::acz;
    PriceResult result;
};

struct McRow {
    double sigma_r = 0.0;
    McResult result;
};

// Runs every (sigma_r, N, method) cell on a worker pool; the returned order is
// by sigma_r, then N, then method, whatever the completion order.
std::vector<TableCell> run_table(const ModelParams& base, const TableSpec& spec, const ContractSpec& contract,
                                 const LatticeConfig& lattice, int workers);

std::string render_csv(const std::vector<TableCell>& cells);
std::string render_mc_csv(const std::vector<McRow>& rows, double maturity, const McConfig& mc);
std::string render_markdown(const TableSpec& spec, const std::vector<TableCell>& cells,
                            const std::vector<McRow>& mc);

// Entry point behind the executable. Returns one of ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bitree::cli
