#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "capro/errors.hpp"

namespace capro::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kEpsLp = 1e-7;    // relative feasibility/optimality tolerance
inline constexpr double kPivotTol = 1e-9; // entering/pivot magnitude threshold

enum class Relation { eq, le, ge };
enum class Status { optimal, infeasible, unbounded, numeric_error };

struct Term {
    int var;
    double coef;
};

struct Constraint {
    std::vector<Term> terms;
    Relation rel = Relation::eq;
    double rhs = 0.0;
};

struct LinearProgram {
    std::vector<std::pair<double, double>> bounds; // (lower, upper) per variable
    std::vector<Constraint> constraints;
    bool maximize = true;
    std::vector<Term> objective;

    int add_variable(double lo = 0.0, double hi = kInf) {
        bounds.emplace_back(lo, hi);
        return static_cast<int>(bounds.size()) - 1;
    }
};

struct Solution {
    Status status = Status::numeric_error;
    double objective = 0.0;
    std::vector<double> values;
};

namespace detail {

// Full-tableau two-phase simplex over the standard form.  Dantzig pricing with
// lowest-index tie breaks, falling back to Bland's rule after a fixed number
// of iterations to rule out cycling.  Deterministic for a given program.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
        t_.assign((rows + 1) * (cols + 1), 0.0);
        basis_.assign(rows, -1);
    }

    double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return t_[r * (cols_ + 1) + cols_]; }
    double& obj(std::size_t c) { return t_[rows_ * (cols_ + 1) + c]; }
    double& obj_rhs() { return t_[rows_ * (cols_ + 1) + cols_]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<int>& basis() { return basis_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double piv = at(pr, pc);
        const std::size_t w = cols_ + 1;
        double* prow = &t_[pr * w];
        for (std::size_t c = 0; c <= cols_; ++c) prow[c] /= piv;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            double f = t_[r * w + pc];
            if (f == 0.0) continue;
            double* row = &t_[r * w];
            for (std::size_t c = 0; c <= cols_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        prow[pc] = 1.0;
        basis_[pr] = static_cast<int>(pc);
    }

    // Minimizes the current objective row.  Columns in [0, active_cols) may
    // enter.  Returns optimal or unbounded; numeric_error on iteration blowup.
    Status iterate(std::size_t active_cols, long max_iters) {
        const long bland_after = max_iters / 2;
        for (long it = 0; it < max_iters; ++it) {
            const bool bland = it >= bland_after;
            std::size_t pc = cols_;
            double best = -kPivotTol;
            for (std::size_t c = 0; c < active_cols; ++c) {
                double d = obj(c);
                if (d < best) {
                    best = d;
                    pc = c;
                    if (bland) break;
                }
                if (bland && pc != cols_) break;
            }
            if (pc == cols_) return Status::optimal;

            std::size_t pr = rows_;
            double best_ratio = kInf;
            for (std::size_t r = 0; r < rows_; ++r) {
                double a = at(r, pc);
                if (a <= kPivotTol) continue;
                double ratio = rhs(r) / a;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && pr != rows_ && basis_[r] < basis_[pr])) {
                    best_ratio = ratio;
                    pr = r;
                }
            }
            if (pr == rows_) return Status::unbounded;
            pivot(pr, pc);
            if (rhs(pr) < 0.0) rhs(pr) = 0.0; // roundoff cleanup
        }
        return Status::numeric_error;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> t_;
    std::vector<int> basis_;
};

// Mapping of an original variable onto nonnegative standard-form columns:
// x = shift + col1 - col2 (col2 only for free variables, where shift = 0).
struct VarMap {
    int col1 = -1;
    int col2 = -1;
    double shift = 0.0;
    double sign = 1.0; // x = shift + sign * u
};

} // namespace detail

inline Solution solve(const LinearProgram& prog) {
    using detail::Tableau;
    using detail::VarMap;

    const int nvars = static_cast<int>(prog.bounds.size());
    for (const auto& c : prog.constraints)
        for (const auto& t : c.terms)
            if (t.var < 0 || t.var >= nvars)
                throw ValidationError("constraint references unknown variable " +
                                      std::to_string(t.var));
    for (const auto& t : prog.objective)
        if (t.var < 0 || t.var >= nvars)
            throw ValidationError("objective references unknown variable " +
                                  std::to_string(t.var));
    for (const auto& [lo, hi] : prog.bounds)
        if (lo > hi) throw ValidationError("variable lower bound exceeds upper bound");

    // Substitute bounds so every column is nonnegative.
    std::vector<VarMap> vmap(nvars);
    int ncols = 0;
    std::vector<Constraint> extra_rows; // upper-bound rows for doubly bounded vars
    for (int v = 0; v < nvars; ++v) {
        auto [lo, hi] = prog.bounds[v];
        VarMap m;
        if (std::isfinite(lo)) {
            m.shift = lo;
            m.sign = 1.0;
            m.col1 = ncols++;
            if (std::isfinite(hi)) {
                Constraint c;
                c.terms.push_back({v, 1.0});
                c.rel = Relation::le;
                c.rhs = hi;
                extra_rows.push_back(std::move(c));
            }
        } else if (std::isfinite(hi)) {
            m.shift = hi;
            m.sign = -1.0;
            m.col1 = ncols++;
        } else {
            m.col1 = ncols++;
            m.col2 = ncols++;
        }
        vmap[v] = m;
    }

    std::vector<Constraint> rows = prog.constraints;
    rows.insert(rows.end(), extra_rows.begin(), extra_rows.end());
    const std::size_t m = rows.size();

    // Dense structural rows over the substituted columns, rhs normalized >= 0.
    struct Row {
        std::vector<double> a;
        Relation rel;
        double rhs;
    };
    std::vector<Row> dense(m);
    for (std::size_t r = 0; r < m; ++r) {
        Row row{std::vector<double>(ncols, 0.0), rows[r].rel, rows[r].rhs};
        for (const auto& t : rows[r].terms) {
            const VarMap& vm = vmap[t.var];
            row.rhs -= t.coef * vm.shift;
            row.a[vm.col1] += t.coef * vm.sign;
            if (vm.col2 >= 0) row.a[vm.col2] -= t.coef;
        }
        if (row.rhs < 0.0) {
            for (double& x : row.a) x = -x;
            row.rhs = -row.rhs;
            if (row.rel == Relation::le)
                row.rel = Relation::ge;
            else if (row.rel == Relation::ge)
                row.rel = Relation::le;
        }
        dense[r] = std::move(row);
    }

    // Column layout: structural | slack/surplus | artificial.
    int nslack = 0, nart = 0;
    for (const auto& row : dense) {
        if (row.rel != Relation::eq) ++nslack;
        if (row.rel != Relation::le) ++nart;
    }
    const std::size_t total = static_cast<std::size_t>(ncols + nslack + nart);
    Tableau tab(m, total);

    int slack_at = ncols, art_at = ncols + nslack;
    const int art_begin = art_at;
    for (std::size_t r = 0; r < m; ++r) {
        for (int c = 0; c < ncols; ++c) tab.at(r, c) = dense[r].a[c];
        tab.rhs(r) = dense[r].rhs;
        switch (dense[r].rel) {
            case Relation::le:
                tab.at(r, slack_at) = 1.0;
                tab.basis()[r] = slack_at++;
                break;
            case Relation::ge:
                tab.at(r, slack_at++) = -1.0;
                tab.at(r, art_at) = 1.0;
                tab.basis()[r] = art_at++;
                break;
            case Relation::eq:
                tab.at(r, art_at) = 1.0;
                tab.basis()[r] = art_at++;
                break;
        }
    }

    const long max_iters = 2000 + 200 * static_cast<long>(m + total);

    // Phase 1: minimize the sum of artificials.
    if (nart > 0) {
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis()[r] >= art_begin) {
                for (std::size_t c = 0; c <= total; ++c) {
                    double v = (c == total) ? tab.rhs(r) : tab.at(r, c);
                    if (c == total)
                        tab.obj_rhs() -= v;
                    else
                        tab.obj(c) -= v;
                }
            }
        }
        for (int c = art_begin; c < static_cast<int>(total); ++c) tab.obj(c) += 1.0;
        Status st = tab.iterate(total, max_iters);
        if (st != Status::optimal) return {Status::numeric_error, 0.0, {}};
        double art_sum = -tab.obj_rhs();
        double scale = 1.0;
        for (const auto& row : dense) scale = std::max(scale, std::abs(row.rhs));
        if (art_sum > kEpsLp * scale) return {Status::infeasible, 0.0, {}};

        // Drive remaining artificials out of the basis; drop redundant rows by
        // zeroing them (they stay with an artificial basic at level 0, which we
        // then freeze by never letting artificial columns re-enter).
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis()[r] >= art_begin) {
                std::size_t pc = total;
                for (int c = 0; c < art_begin; ++c)
                    if (std::abs(tab.at(r, c)) > kPivotTol) {
                        pc = static_cast<std::size_t>(c);
                        break;
                    }
                if (pc != total) tab.pivot(r, pc);
            }
        }
    }

    // Phase 2: restore the real objective (minimize internal form).
    for (std::size_t c = 0; c <= total; ++c) {
        if (c == total)
            tab.obj_rhs() = 0.0;
        else
            tab.obj(c) = 0.0;
    }
    std::vector<double> cost(total, 0.0);
    const double dir = prog.maximize ? -1.0 : 1.0; // internal minimize
    for (const auto& t : prog.objective) {
        const VarMap& vm = vmap[t.var];
        cost[vm.col1] += dir * t.coef * vm.sign;
        if (vm.col2 >= 0) cost[vm.col2] -= dir * t.coef;
    }
    for (std::size_t c = 0; c < total; ++c) tab.obj(c) = cost[c];
    for (std::size_t r = 0; r < m; ++r) {
        int b = tab.basis()[r];
        double cb = cost[b];
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c <= total; ++c) {
            if (c == total)
                tab.obj_rhs() -= cb * tab.rhs(r);
            else
                tab.obj(c) -= cb * tab.at(r, c);
        }
    }

    // Artificials must not re-enter: restrict entering columns.
    Status st = tab.iterate(static_cast<std::size_t>(art_begin), max_iters);
    if (st == Status::numeric_error) return {Status::numeric_error, 0.0, {}};
    if (st == Status::unbounded) return {Status::unbounded, 0.0, {}};

    std::vector<double> u(total, 0.0);
    for (std::size_t r = 0; r < m; ++r) u[tab.basis()[r]] = tab.rhs(r);

    Solution sol;
    sol.status = Status::optimal;
    sol.values.resize(nvars);
    for (int v = 0; v < nvars; ++v) {
        const VarMap& vm = vmap[v];
        double x = vm.shift + vm.sign * u[vm.col1];
        if (vm.col2 >= 0) x -= u[vm.col2];
        sol.values[v] = x;
    }
    double obj = 0.0;
    for (const auto& t : prog.objective) obj += t.coef * sol.values[t.var];
    sol.objective = obj;
    return sol;
}

} // namespace capro::lp
