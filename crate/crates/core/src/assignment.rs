//! Rectangular linear assignment with forbidden cells: optimal solution,
//! Murty's Q-best ranking, and exhaustive enumeration.
//!
//! Every column must be assigned to exactly one row and every row takes at
//! most one column. Among equal-cost solutions the lexicographically smallest
//! column-to-row vector wins.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};

/// Largest column count accepted by [`enumerate_all_assignments`].
pub const ENUMERATION_COLUMN_LIMIT: usize = 8;

/// Relative tolerance used to decide which reduced costs are tight.
const TIGHT_TOLERANCE: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Entry {
    Cost(f64),
    Forbidden,
}

impl Entry {
    pub fn cost(self) -> Option<f64> {
        match self {
            Entry::Cost(c) => Some(c),
            Entry::Forbidden => None,
        }
    }

    pub fn is_forbidden(self) -> bool {
        matches!(self, Entry::Forbidden)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssignmentProblemKind {
    Generic,
    /// `m` object rows followed by one dedicated row per column: row `m + l`
    /// may only take column `l`.
    PmbmStructured { m: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
    kind: AssignmentProblemKind,
}

impl CostMatrix {
    /// Row-major entries. Fails with [`Error::Infeasible`] when a column has no
    /// allowed entry.
    pub fn new(rows: usize, cols: usize, entries: Vec<Entry>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                path: "entries".into(),
                expected: rows * cols,
                found: entries.len(),
            });
        }
        for (i, e) in entries.iter().enumerate() {
            if let Entry::Cost(c) = e {
                if !c.is_finite() {
                    return Err(Error::validation(
                        format!("entries[{}][{}]", i / cols.max(1), i % cols.max(1)),
                        format!("cost must be finite, got {c}; use Forbidden instead"),
                    ));
                }
            }
        }
        for l in 0..cols {
            if (0..rows).all(|k| entries[k * cols + l].is_forbidden()) {
                return Err(Error::Infeasible);
            }
        }
        Ok(CostMatrix {
            rows,
            cols,
            entries,
            kind: AssignmentProblemKind::Generic,
        })
    }

    pub fn from_rows(rows: &[Vec<Entry>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                path: format!("rows[{i}]"),
                expected: cols,
                found: rows[i].len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// `object_costs` is `m x cols` row-major; `dummy_costs[l]` is the cost of
    /// leaving column `l` to its dedicated row.
    pub fn pmbm_structured(m: usize, object_costs: Vec<Entry>, dummy_costs: &[Entry]) -> Result<Self> {
        let cols = dummy_costs.len();
        if object_costs.len() != m * cols {
            return Err(Error::DimensionMismatch {
                path: "object_costs".into(),
                expected: m * cols,
                found: object_costs.len(),
            });
        }
        let mut entries = object_costs;
        entries.reserve(cols * cols);
        for k in 0..cols {
            for l in 0..cols {
                entries.push(if k == l { dummy_costs[l] } else { Entry::Forbidden });
            }
        }
        let mut matrix = Self::new(m + cols, cols, entries)?;
        matrix.kind = AssignmentProblemKind::PmbmStructured { m };
        Ok(matrix)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> AssignmentProblemKind {
        self.kind
    }

    pub fn get(&self, row: usize, col: usize) -> Entry {
        self.entries[row * self.cols + col]
    }

    /// Sum of the selected entries, or `None` if the assignment uses a forbidden cell.
    pub fn cost_of(&self, column_to_row: &[usize]) -> Option<f64> {
        column_to_row
            .iter()
            .enumerate()
            .try_fold(0.0, |acc, (l, &k)| self.get(k, l).cost().map(|c| acc + c))
    }

    fn scale(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|e| e.cost())
            .fold(1.0, |m, c| m.max(c.abs()))
    }
}

/// A complete column assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    column_to_row: Vec<usize>,
    total_cost: f64,
}

impl Assignment {
    pub fn column_to_row(&self) -> &[usize] {
        &self.column_to_row
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    /// Row assigned to column `col`.
    pub fn row_of(&self, col: usize) -> usize {
        self.column_to_row[col]
    }

    fn cmp_rank(&self, other: &Self) -> Ordering {
        self.total_cost
            .total_cmp(&other.total_cost)
            .then_with(|| self.column_to_row.cmp(&other.column_to_row))
    }
}

/// Minimum-cost assignment.
pub fn solve_optimal(costs: &CostMatrix) -> Result<Assignment> {
    solve_entries(costs.rows, costs.cols, &costs.entries, costs.scale()).ok_or(Error::Infeasible)
}

/// Solves on raw entries; `None` when infeasible.
fn solve_entries(rows: usize, cols: usize, entries: &[Entry], scale: f64) -> Option<Assignment> {
    if cols == 0 {
        return Some(Assignment {
            column_to_row: Vec::new(),
            total_cost: 0.0,
        });
    }
    if rows < cols {
        return None;
    }
    let mut solver = SquareHungarian::new(rows, cols, entries);
    solver.run()?;
    let tol = TIGHT_TOLERANCE * scale;
    let mut worker_to_job = solver.worker_to_job();
    lexicographic_refinement(&solver, &mut worker_to_job, tol);
    let column_to_row: Vec<usize> = worker_to_job[..cols].to_vec();
    let total_cost = column_to_row
        .iter()
        .enumerate()
        .map(|(l, &k)| entries[k * cols + l].cost().expect("solver avoids forbidden cells"))
        .sum();
    Some(Assignment {
        column_to_row,
        total_cost,
    })
}

/// Square Hungarian method (shortest augmenting paths with potentials).
///
/// Workers are the matrix columns plus `rows - cols` zero-cost dummies, jobs
/// are the matrix rows, so every square solution restricts to a rectangular
/// one where rows take at most one column.
struct SquareHungarian<'a> {
    n: usize,
    cols: usize,
    entries: &'a [Entry],
    /// Worker potentials, 1-based.
    u: Vec<f64>,
    /// Job potentials, 1-based; index 0 is the virtual root.
    v: Vec<f64>,
    /// `job_owner[j]`: worker (1-based) holding job `j`, 0 if none.
    job_owner: Vec<usize>,
}

impl<'a> SquareHungarian<'a> {
    fn new(rows: usize, cols: usize, entries: &'a [Entry]) -> Self {
        SquareHungarian {
            n: rows,
            cols,
            entries,
            u: vec![0.0; rows + 1],
            v: vec![0.0; rows + 1],
            job_owner: vec![0; rows + 1],
        }
    }

    /// Cost of worker `w` taking job `j` (both 0-based).
    fn cost(&self, w: usize, j: usize) -> Option<f64> {
        if w < self.cols {
            self.entries[j * self.cols + w].cost()
        } else {
            Some(0.0)
        }
    }

    fn run(&mut self) -> Option<()> {
        let n = self.n;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        let mut way = vec![0usize; n + 1];
        for w in 1..=n {
            self.job_owner[0] = w;
            let mut j0 = 0;
            min_slack.iter_mut().for_each(|s| *s = f64::INFINITY);
            used.iter_mut().for_each(|u| *u = false);
            loop {
                used[j0] = true;
                let w0 = self.job_owner[j0];
                let mut delta = f64::INFINITY;
                let mut j1 = 0;
                for j in 1..=n {
                    if used[j] {
                        continue;
                    }
                    if let Some(c) = self.cost(w0 - 1, j - 1) {
                        let cur = c - self.u[w0] - self.v[j];
                        if cur < min_slack[j] {
                            min_slack[j] = cur;
                            way[j] = j0;
                        }
                    }
                    if min_slack[j] < delta {
                        delta = min_slack[j];
                        j1 = j;
                    }
                }
                if delta == f64::INFINITY {
                    return None;
                }
                for j in 0..=n {
                    if used[j] {
                        self.u[self.job_owner[j]] += delta;
                        self.v[j] -= delta;
                    } else {
                        min_slack[j] -= delta;
                    }
                }
                j0 = j1;
                if self.job_owner[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                self.job_owner[j0] = self.job_owner[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        Some(())
    }

    /// 0-based worker to 0-based job.
    fn worker_to_job(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for j in 1..=self.n {
            out[self.job_owner[j] - 1] = j - 1;
        }
        out
    }

    fn is_tight(&self, w: usize, j: usize, tol: f64) -> bool {
        match self.cost(w, j) {
            Some(c) => c - self.u[w + 1] - self.v[j + 1] <= tol,
            None => false,
        }
    }
}

/// Moves each real worker, in order, to the smallest job it can take while
/// staying inside the set of optimal (tight-edge) perfect matchings.
fn lexicographic_refinement(solver: &SquareHungarian<'_>, worker_to_job: &mut [usize], tol: f64) {
    let n = solver.n;
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|w| (0..n).map(|j| solver.is_tight(w, j, tol)).collect())
        .collect();
    let mut owner = vec![0usize; n];
    for (w, &j) in worker_to_job.iter().enumerate() {
        owner[j] = w;
    }
    let mut locked = vec![false; n];
    for l in 0..solver.cols {
        let current = worker_to_job[l];
        for k in 0..current {
            if !tight[l][k] || locked[owner[k]] {
                continue;
            }
            let mut visited = vec![false; n];
            visited[k] = true;
            let holder = owner[k];
            let mut search = Rehome {
                tight: &tight,
                locked: &locked,
                moving: l,
                freed: current,
                visited: &mut visited,
                owner: &mut owner,
                worker_to_job,
            };
            if search.rehome(holder) {
                worker_to_job[l] = k;
                owner[k] = l;
                break;
            }
        }
        locked[l] = true;
    }
}

struct Rehome<'s> {
    tight: &'s [Vec<bool>],
    locked: &'s [bool],
    moving: usize,
    freed: usize,
    visited: &'s mut [bool],
    owner: &'s mut [usize],
    worker_to_job: &'s mut [usize],
}

impl Rehome<'_> {
    /// Finds an alternating path that moves worker `w` off its job and ends on `freed`.
    fn rehome(&mut self, w: usize) -> bool {
        for j in 0..self.tight.len() {
            if !self.tight[w][j] || self.visited[j] {
                continue;
            }
            self.visited[j] = true;
            let ok = if j == self.freed {
                true
            } else {
                let next = self.owner[j];
                next != self.moving && !self.locked[next] && self.rehome(next)
            };
            if ok {
                self.worker_to_job[w] = j;
                self.owner[j] = w;
                return true;
            }
        }
        false
    }
}

#[derive(Clone, Debug)]
struct Subproblem {
    solution: Assignment,
    /// Fixed (column, row) pairs.
    include: Vec<(usize, usize)>,
    /// Disallowed (column, row) pairs.
    exclude: Vec<(usize, usize)>,
}

impl PartialEq for Subproblem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Subproblem {}

impl PartialOrd for Subproblem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subproblem {
    // Reversed so that BinaryHeap pops the cheapest solution first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.solution.cmp_rank(&self.solution)
    }
}

fn solve_constrained(
    costs: &CostMatrix,
    include: &[(usize, usize)],
    exclude: &[(usize, usize)],
    scale: f64,
) -> Option<Assignment> {
    let cols = costs.cols;
    let mut entries = costs.entries.clone();
    for &(l, k) in exclude {
        entries[k * cols + l] = Entry::Forbidden;
    }
    for &(l, k) in include {
        for row in (0..costs.rows).filter(|&r| r != k) {
            entries[row * cols + l] = Entry::Forbidden;
        }
        for col in (0..cols).filter(|&c| c != l) {
            entries[k * cols + col] = Entry::Forbidden;
        }
    }
    solve_entries(costs.rows, cols, &entries, scale)
}

/// The `q` lowest-cost assignments in nondecreasing cost order (Murty's algorithm).
pub fn murty_k_best(costs: &CostMatrix, q: usize) -> Result<Vec<Assignment>> {
    if q == 0 {
        return Err(Error::validation("q", "Q must be at least 1"));
    }
    let scale = costs.scale();
    let first = solve_entries(costs.rows, costs.cols, &costs.entries, scale).ok_or(Error::Infeasible)?;
    let mut heap = BinaryHeap::new();
    heap.push(Subproblem {
        solution: first,
        include: Vec::new(),
        exclude: Vec::new(),
    });
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::with_capacity(q);
    while let Some(node) = heap.pop() {
        if !seen.insert(node.solution.column_to_row.clone()) {
            continue;
        }
        out.push(node.solution.clone());
        if out.len() == q {
            break;
        }
        let fixed: HashSet<usize> = node.include.iter().map(|&(l, _)| l).collect();
        let mut include = node.include.clone();
        for l in 0..costs.cols {
            if fixed.contains(&l) {
                continue;
            }
            let pair = (l, node.solution.column_to_row[l]);
            let mut exclude = node.exclude.clone();
            exclude.push(pair);
            if let Some(solution) = solve_constrained(costs, &include, &exclude, scale) {
                heap.push(Subproblem {
                    solution,
                    include: include.clone(),
                    exclude,
                });
            }
            include.push(pair);
        }
    }
    Ok(out)
}

/// Calls `visit(column_to_row, total_cost)` for every feasible assignment in
/// lexicographic order of `column_to_row`. No size guard.
pub(crate) fn for_each_assignment<F: FnMut(&[usize], f64)>(costs: &CostMatrix, mut visit: F) {
    fn recurse<F: FnMut(&[usize], f64)>(
        costs: &CostMatrix,
        col: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        visit: &mut F,
    ) {
        if col == costs.cols {
            let total = costs.cost_of(current).expect("only allowed cells are chosen");
            visit(current, total);
            return;
        }
        for k in 0..costs.rows {
            if used[k] || costs.get(k, col).is_forbidden() {
                continue;
            }
            used[k] = true;
            current.push(k);
            recurse(costs, col + 1, used, current, visit);
            current.pop();
            used[k] = false;
        }
    }
    let mut used = vec![false; costs.rows];
    let mut current = Vec::with_capacity(costs.cols);
    recurse(costs, 0, &mut used, &mut current, &mut visit);
}

/// Every feasible assignment, sorted by cost then lexicographically.
pub fn enumerate_all_assignments(costs: &CostMatrix) -> Result<Vec<Assignment>> {
    if costs.cols > ENUMERATION_COLUMN_LIMIT {
        return Err(Error::SizeLimit {
            what: "columns",
            actual: costs.cols,
            limit: ENUMERATION_COLUMN_LIMIT,
        });
    }
    let mut out = Vec::new();
    for_each_assignment(costs, |c2r, total| {
        out.push(Assignment {
            column_to_row: c2r.to_vec(),
            total_cost: total,
        })
    });
    out.sort_by(Assignment::cmp_rank);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(rows: &[&[f64]]) -> CostMatrix {
        let rows: Vec<Vec<Entry>> = rows
            .iter()
            .map(|r| r.iter().map(|&c| Entry::Cost(c)).collect())
            .collect();
        CostMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn one_by_one() {
        let a = solve_optimal(&finite(&[&[5.0]])).unwrap();
        assert_eq!(a.column_to_row(), &[0]);
        assert_eq!(a.total_cost(), 5.0);
    }

    #[test]
    fn two_by_two() {
        let a = solve_optimal(&finite(&[&[4.0, 1.0], &[2.0, 3.0]])).unwrap();
        assert_eq!(a.column_to_row(), &[1, 0]);
        assert_eq!(a.total_cost(), 3.0);
    }

    #[test]
    fn dummy_row_is_selected_when_only_option() {
        use Entry::{Cost, Forbidden};
        // Column 1 can only go to its dummy row 2.
        let m = CostMatrix::from_rows(&[
            vec![Cost(1.0), Forbidden],
            vec![Cost(2.0), Forbidden],
            vec![Forbidden, Cost(7.0)],
        ])
        .unwrap();
        let a = solve_optimal(&m).unwrap();
        assert_eq!(a.column_to_row(), &[0, 2]);
        assert_eq!(a.total_cost(), 8.0);
    }

    #[test]
    fn infeasible_patterns() {
        use Entry::{Cost, Forbidden};
        assert_eq!(
            CostMatrix::from_rows(&[vec![Forbidden, Cost(1.0)]]).unwrap_err(),
            Error::Infeasible
        );
        // Both columns only allow row 0.
        let m = CostMatrix::from_rows(&[vec![Cost(1.0), Cost(1.0)], vec![Forbidden, Forbidden]])
            .unwrap();
        assert_eq!(solve_optimal(&m).unwrap_err(), Error::Infeasible);
        assert_eq!(murty_k_best(&m, 3).unwrap_err(), Error::Infeasible);
        // More columns than rows.
        let wide = finite(&[&[1.0, 2.0]]);
        assert_eq!(solve_optimal(&wide).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn negative_costs_are_allowed() {
        let a = solve_optimal(&finite(&[&[-4.0, 1.0], &[2.0, -3.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(a.column_to_row(), &[0, 1]);
        assert_eq!(a.total_cost(), -7.0);
    }

    #[test]
    fn empty_problem_has_one_empty_assignment() {
        let m = CostMatrix::new(3, 0, vec![]).unwrap();
        let a = solve_optimal(&m).unwrap();
        assert!(a.column_to_row().is_empty());
        assert_eq!(murty_k_best(&m, 5).unwrap().len(), 1);
        assert_eq!(enumerate_all_assignments(&m).unwrap().len(), 1);
    }

    #[test]
    fn ties_prefer_lexicographically_smallest() {
        let a = solve_optimal(&finite(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_eq!(a.column_to_row(), &[0, 1]);
        // Column 0 is indifferent, but taking row 0 would cost column 1 its only cheap row.
        let a = solve_optimal(&finite(&[&[2.0, 0.0], &[2.0, 5.0], &[2.0, 5.0]])).unwrap();
        assert_eq!(a.column_to_row(), &[1, 0]);
    }

    #[test]
    fn murty_two_best() {
        let all = murty_k_best(&finite(&[&[4.0, 1.0], &[2.0, 3.0]]), 2).unwrap();
        let costs: Vec<f64> = all.iter().map(Assignment::total_cost).collect();
        assert_eq!(costs, vec![3.0, 7.0]);
        let more = murty_k_best(&finite(&[&[4.0, 1.0], &[2.0, 3.0]]), 10).unwrap();
        assert_eq!(more.len(), 2);
    }

    #[test]
    fn murty_q1_matches_optimal() {
        let m = finite(&[&[3.0, 9.0, 1.0], &[4.0, 2.0, 8.0], &[7.0, 6.0, 5.0]]);
        let best = murty_k_best(&m, 1).unwrap();
        assert_eq!(best, vec![solve_optimal(&m).unwrap()]);
        assert!(murty_k_best(&m, 0).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let m = finite(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(enumerate_all_assignments(&m).unwrap().len(), 2);

        let object = vec![Entry::Cost(1.0); 4];
        let dummy = [Entry::Cost(0.5), Entry::Cost(0.5)];
        let s = CostMatrix::pmbm_structured(2, object, &dummy).unwrap();
        assert_eq!(s.kind(), AssignmentProblemKind::PmbmStructured { m: 2 });
        assert_eq!(enumerate_all_assignments(&s).unwrap().len(), 7);
    }

    #[test]
    fn enumeration_excludes_forbidden_optimum() {
        use Entry::{Cost, Forbidden};
        let m = CostMatrix::from_rows(&[vec![Forbidden, Cost(1.0)], vec![Cost(2.0), Cost(3.0)]])
            .unwrap();
        let all = enumerate_all_assignments(&m).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].column_to_row(), &[1, 0]);
    }

    #[test]
    fn enumeration_size_limit() {
        let m = CostMatrix::new(9, 9, vec![Entry::Cost(0.0); 81]).unwrap();
        assert!(matches!(
            enumerate_all_assignments(&m),
            Err(Error::SizeLimit { .. })
        ));
    }
}
