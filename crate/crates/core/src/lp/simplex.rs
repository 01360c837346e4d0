//! Bounded-variable primal revised simplex with an explicit dense basis inverse.
//!
//! Rows become equalities `A x + s = b` with one logical (slack) variable per
//! row: `s >= 0` for `<=`, `s <= 0` for `>=` and `s = 0` for `=`. Rows that no
//! starting basis can satisfy get an artificial variable which phase one
//! drives to zero. Pricing is Dantzig's rule with a Harris ratio test.
//!
//! Degeneracy is handled by bound perturbation: after a run of degenerate
//! pivots every free bound is widened by a small random amount, the perturbed
//! problem is solved, the true bounds are restored and the (now slightly
//! infeasible, still dual feasible) basis is repaired with dual simplex pivots.
//! Bland's rule remains as a last resort against cycling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinearProgram, LpBackend, LpError, LpSolution, LpStatus, Relation, SolveLimits, EPS_FEAS};

const PERTURB_AFTER: usize = 20;
const BLAND_AFTER: usize = 500;
/// Relative size of the bound perturbation.
const PERTURB_SCALE: f64 = 1e-6;
const PERTURB_SEED: u64 = 0x6c70_7365_6564;
const REFACTOR_EVERY: usize = 64;
const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct RevisedSimplex;

impl LpBackend for RevisedSimplex {
    fn solve(&self, lp: &LinearProgram, limits: SolveLimits) -> Result<LpSolution, LpError> {
        lp.validate()?;
        let mut tab = Tableau::new(lp);
        let mut iterations = 0;

        if tab.has_artificials() {
            tab.set_phase_one_costs();
            match tab.run(&mut iterations, limits.max_iters)? {
                PhaseEnd::Optimal => {}
                PhaseEnd::IterationLimit => return Ok(tab.solution(lp, LpStatus::IterationLimit, iterations)),
            }
            let infeasibility: f64 = tab.artificial_sum();
            if infeasibility > EPS_FEAS * (1.0 + tab.m as f64).sqrt() {
                return Ok(tab.solution(lp, LpStatus::Infeasible, iterations));
            }
            tab.fix_artificials();
        }

        tab.set_phase_two_costs(lp);
        let status = match tab.run(&mut iterations, limits.max_iters)? {
            PhaseEnd::Optimal => LpStatus::Optimal,
            PhaseEnd::IterationLimit => LpStatus::IterationLimit,
        };
        tab.refactor()?;
        Ok(tab.solution(lp, status, iterations))
    }
}

enum PhaseEnd {
    Optimal,
    IterationLimit,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Position {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    n_struct: usize,
    /// Sparse columns of `[A | I | artificials]`.
    cols: Vec<Vec<(usize, f64)>>,
    /// The same matrix by rows, built once the artificials are known.
    rows: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<Position>,
    /// Column-major dense `B^-1`: entry `(r, k)` lives at `k * m + r`.
    binv: Vec<f64>,
    first_artificial: usize,
    pivots_since_refactor: usize,
    /// True bounds while the working bounds are perturbed.
    saved_bounds: Option<(Vec<f64>, Vec<f64>)>,
    rng: ChaCha8Rng,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.num_constraints();
        let n = lp.num_vars();

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, c) in lp.constraints().iter().enumerate() {
            for &(j, a) in &c.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        // merge duplicate entries within a column
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
            col.dedup_by(|later, earlier| {
                if later.0 == earlier.0 {
                    earlier.1 += later.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|e| e.1 != 0.0);
        }

        let mut lo: Vec<f64> = lp.bounds().iter().map(|b| b.0).collect();
        let mut hi: Vec<f64> = lp.bounds().iter().map(|b| b.1).collect();
        let mut x = Vec::with_capacity(n + m);
        let mut pos = Vec::with_capacity(n + m);
        for j in 0..n {
            if lp.objective()[j] < 0.0 {
                x.push(hi[j]);
                pos.push(Position::AtUpper);
            } else {
                x.push(lo[j]);
                pos.push(Position::AtLower);
            }
        }
        let b: Vec<f64> = lp.constraints().iter().map(|c| c.rhs).collect();

        for (i, c) in lp.constraints().iter().enumerate() {
            cols.push(vec![(i, 1.0)]);
            let (l, h) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
            x.push(0.0);
            pos.push(Position::Basic(i));
        }

        let mut tab = Tableau {
            m,
            n_struct: n,
            cols,
            rows: Vec::new(),
            lo,
            hi,
            cost: Vec::new(),
            x,
            b,
            basis: (n..n + m).collect(),
            pos,
            binv: Vec::new(),
            first_artificial: n + m,
            pivots_since_refactor: 0,
            saved_bounds: None,
            rng: ChaCha8Rng::seed_from_u64(PERTURB_SEED),
        };
        tab.crash();
        tab.rows = vec![Vec::new(); m];
        for (j, col) in tab.cols.iter().enumerate() {
            for &(i, a) in col {
                tab.rows[i].push((j, a));
            }
        }
        tab
    }

    /// Picks a starting basis. Rows whose slack would be infeasible are first
    /// offered to a structural column that can absorb the residual alone; any
    /// remaining infeasible row receives an artificial variable.
    fn crash(&mut self) {
        let m = self.m;
        let n = self.n_struct;
        let mut activity = vec![0.0; m];
        for j in 0..n {
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    activity[i] += a * self.x[j];
                }
            }
        }

        let slack_ok = |s: f64, lo: f64, hi: f64| s >= lo - EPS_FEAS && s <= hi + EPS_FEAS;
        let mut locked_row = vec![false; m];
        let mut row_entries: Vec<Vec<usize>> = vec![Vec::new(); m];
        for j in 0..n {
            for &(i, _) in &self.cols[j] {
                row_entries[i].push(j);
            }
        }
        for entries in &mut row_entries {
            entries.sort_by_key(|&j| (self.cols[j].len(), j));
        }

        for i in 0..m {
            let s_var = n + i;
            let s = self.b[i] - activity[i];
            if slack_ok(s, self.lo[s_var], self.hi[s_var]) {
                continue;
            }
            let target = if s < self.lo[s_var] { self.lo[s_var] } else { self.hi[s_var] };
            for &j in &row_entries[i] {
                if !matches!(self.pos[j], Position::AtLower | Position::AtUpper) || self.lo[j] == self.hi[j] {
                    continue;
                }
                if self.cols[j].iter().any(|&(r, _)| locked_row[r]) {
                    continue;
                }
                let a = self.cols[j].iter().find(|e| e.0 == i).map(|e| e.1).unwrap_or(0.0);
                if a.abs() < 1e-7 {
                    continue;
                }
                let delta = (self.b[i] - activity[i] - target) / a;
                let new_x = self.x[j] + delta;
                if new_x < self.lo[j] - EPS_FEAS || new_x > self.hi[j] + EPS_FEAS {
                    continue;
                }
                let new_x = new_x.clamp(self.lo[j], self.hi[j]);
                let delta = new_x - self.x[j];
                for &(r, ar) in &self.cols[j] {
                    activity[r] += ar * delta;
                    locked_row[r] = true;
                }
                self.x[j] = new_x;
                self.pos[j] = Position::Basic(i);
                self.basis[i] = j;
                self.x[s_var] = target;
                self.pos[s_var] = if target == self.lo[s_var] {
                    Position::AtLower
                } else {
                    Position::AtUpper
                };
                break;
            }
        }

        for i in 0..m {
            let s_var = n + i;
            if self.basis[i] != s_var {
                continue;
            }
            let s = self.b[i] - activity[i];
            if slack_ok(s, self.lo[s_var], self.hi[s_var]) {
                self.x[s_var] = s;
                continue;
            }
            let target = if s < self.lo[s_var] { self.lo[s_var] } else { self.hi[s_var] };
            let residual = s - target;
            let sign = residual.signum();
            let art = self.cols.len();
            self.cols.push(vec![(i, sign)]);
            self.lo.push(0.0);
            self.hi.push(f64::INFINITY);
            self.x.push(residual.abs());
            self.pos.push(Position::Basic(i));
            self.basis[i] = art;
            self.x[s_var] = target;
            self.pos[s_var] = if target == self.lo[s_var] {
                Position::AtLower
            } else {
                Position::AtUpper
            };
        }

        if self.refactor().is_err() {
            self.reset_to_slack_basis();
        }
    }

    fn reset_to_slack_basis(&mut self) {
        let n = self.n_struct;
        let m = self.m;
        self.cols.truncate(n + m);
        self.lo.truncate(n + m);
        self.hi.truncate(n + m);
        self.x.truncate(n + m);
        self.pos.truncate(n + m);
        for j in 0..n {
            if self.pos[j] != Position::AtUpper {
                self.pos[j] = Position::AtLower;
                self.x[j] = self.lo[j];
            }
        }
        for i in 0..m {
            self.basis[i] = n + i;
            self.pos[n + i] = Position::Basic(i);
        }
        let mut activity = vec![0.0; m];
        for j in 0..n {
            for &(i, a) in &self.cols[j] {
                activity[i] += a * self.x[j];
            }
        }
        for i in 0..m {
            let s_var = n + i;
            let s = self.b[i] - activity[i];
            if s >= self.lo[s_var] - EPS_FEAS && s <= self.hi[s_var] + EPS_FEAS {
                self.x[s_var] = s;
                continue;
            }
            let target = if s < self.lo[s_var] { self.lo[s_var] } else { self.hi[s_var] };
            let residual = s - target;
            let art = self.cols.len();
            self.cols.push(vec![(i, residual.signum())]);
            self.lo.push(0.0);
            self.hi.push(f64::INFINITY);
            self.x.push(residual.abs());
            self.pos.push(Position::Basic(i));
            self.basis[i] = art;
            self.x[s_var] = target;
            self.pos[s_var] = if target == self.lo[s_var] {
                Position::AtLower
            } else {
                Position::AtUpper
            };
        }
        // the slack/artificial basis is a signed identity
        self.refactor().expect("identity basis is nonsingular");
    }

    fn has_artificials(&self) -> bool {
        self.cols.len() > self.first_artificial
    }

    fn artificial_sum(&self) -> f64 {
        self.x[self.first_artificial..].iter().sum()
    }

    fn set_phase_one_costs(&mut self) {
        self.cost = vec![0.0; self.cols.len()];
        for c in &mut self.cost[self.first_artificial..] {
            *c = 1.0;
        }
    }

    fn fix_artificials(&mut self) {
        for k in self.first_artificial..self.cols.len() {
            self.hi[k] = 0.0;
            if !matches!(self.pos[k], Position::Basic(_)) {
                self.x[k] = 0.0;
                self.pos[k] = Position::AtLower;
            }
        }
    }

    fn set_phase_two_costs(&mut self, lp: &LinearProgram) {
        self.cost = vec![0.0; self.cols.len()];
        self.cost[..self.n_struct].copy_from_slice(lp.objective());
    }

    /// Recomputes `B^-1` from scratch and the basic values from the nonbasic
    /// ones.
    ///
    /// Basic columns with a single nonzero (slacks, artificials, per-row
    /// error variables) are peeled off first: after permuting, the basis is
    /// block upper triangular with a diagonal block for those columns, so
    /// only the remaining kernel needs a dense inversion.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        // singleton positions and the rows they own
        let mut row_owner: Vec<Option<usize>> = vec![None; m];
        let mut is_singleton = vec![false; m];
        for (k, &var) in self.basis.iter().enumerate() {
            if let [(i, v)] = self.cols[var][..] {
                if row_owner[i].is_none() && v.abs() > 1e-11 {
                    row_owner[i] = Some(k);
                    is_singleton[k] = true;
                }
            }
        }
        let kernel_pos: Vec<usize> = (0..m).filter(|&k| !is_singleton[k]).collect();
        let kernel_rows: Vec<usize> = (0..m).filter(|&i| row_owner[i].is_none()).collect();
        let t = kernel_pos.len();
        debug_assert_eq!(t, kernel_rows.len());
        let mut row_index = vec![usize::MAX; m];
        for (ri, &i) in kernel_rows.iter().enumerate() {
            row_index[i] = ri;
        }

        // dense kernel B[kernel_rows, kernel_pos], row-major
        let mut kernel = vec![0.0; t * t];
        for (c, &k) in kernel_pos.iter().enumerate() {
            for &(i, v) in &self.cols[self.basis[k]] {
                if row_index[i] != usize::MAX {
                    kernel[row_index[i] * t + c] = v;
                }
            }
        }
        let kinv = dense_inverse(&mut kernel, t)?;

        // B u = e_i, solved blockwise for every row i
        let mut binv = vec![0.0; m * m];
        let mut u_t = vec![0.0; t];
        for i in 0..m {
            let col = &mut binv[i * m..(i + 1) * m];
            match row_owner[i] {
                Some(k) => {
                    let (_, v) = self.cols[self.basis[k]][0];
                    col[k] = 1.0 / v;
                }
                None => {
                    let ri = row_index[i];
                    for c in 0..t {
                        u_t[c] = kinv[c * t + ri];
                    }
                    // kernel columns also reach singleton rows; back-substitute there
                    for (c, &k) in kernel_pos.iter().enumerate() {
                        col[k] = u_t[c];
                        if u_t[c] == 0.0 {
                            continue;
                        }
                        for &(r, a) in &self.cols[self.basis[k]] {
                            if let Some(owner) = row_owner[r] {
                                let (_, v) = self.cols[self.basis[owner]][0];
                                col[owner] -= a * u_t[c] / v;
                            }
                        }
                    }
                }
            }
        }
        self.binv = binv;
        self.pivots_since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs = self.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if matches!(self.pos[j], Position::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            for &(i, a) in col {
                rhs[i] -= a * self.x[j];
            }
        }
        let mut xb = vec![0.0; m];
        for (k, &bk) in rhs.iter().enumerate() {
            if bk != 0.0 {
                axpy(&mut xb, bk, &self.binv[k * m..(k + 1) * m]);
            }
        }
        for (r, v) in xb.into_iter().enumerate() {
            self.x[self.basis[r]] = v;
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        if cb.iter().all(|&c| c == 0.0) {
            return vec![0.0; m];
        }
        (0..m)
            .map(|k| self.binv[k * m..(k + 1) * m].iter().zip(&cb).map(|(a, c)| a * c).sum())
            .collect()
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        for &(i, a) in &self.cols[j] {
            d -= y[i] * a;
        }
        d
    }

    fn column(&self, q: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(k, v) in &self.cols[q] {
            axpy(&mut alpha, v, &self.binv[k * m..(k + 1) * m]);
        }
        alpha
    }

    fn reduced_costs(&self) -> Vec<f64> {
        let y = self.duals();
        (0..self.cols.len()).map(|j| self.reduced_cost(j, &y)).collect()
    }

    fn run(&mut self, iterations: &mut usize, max_iters: usize) -> Result<PhaseEnd, LpError> {
        let mut degenerate_run = 0usize;
        let mut may_perturb = true;
        let n = self.cols.len();
        let mut d = self.reduced_costs();
        // Devex reference weights
        let mut weights = vec![1.0; n];
        let mut pivot_row = vec![0.0; n];
        loop {
            if *iterations >= max_iters {
                self.restore_bounds()?;
                return Ok(PhaseEnd::IterationLimit);
            }
            if may_perturb && degenerate_run >= PERTURB_AFTER {
                self.perturb_bounds();
                may_perturb = false;
                degenerate_run = 0;
            }
            let bland = degenerate_run >= BLAND_AFTER;

            // pricing
            let mut entering: Option<(usize, f64, f64)> = None; // (var, direction, score)
            for j in 0..n {
                let dir = match self.pos[j] {
                    Position::Basic(_) => continue,
                    _ if self.lo[j] == self.hi[j] => continue,
                    Position::AtLower => 1.0,
                    Position::AtUpper => -1.0,
                };
                if d[j] * dir >= -DUAL_TOL {
                    continue;
                }
                if bland {
                    entering = Some((j, dir, 0.0));
                    break;
                }
                let score = d[j] * d[j] / weights[j];
                if entering.is_none_or(|e| score > e.2) {
                    entering = Some((j, dir, score));
                }
            }
            let Some((q, dir, _)) = entering else {
                if self.saved_bounds.is_some() {
                    self.restore_bounds()?;
                    if !self.dual_cleanup(iterations, max_iters)? {
                        return Ok(PhaseEnd::IterationLimit);
                    }
                    degenerate_run = 0;
                    d = self.reduced_costs();
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };

            let alpha = self.column(q);
            let step = self.ratio_test(q, dir, &alpha, bland);
            *iterations += 1;

            match step {
                Step::Unbounded => return Err(LpError::Unbounded),
                Step::Flip(t) => {
                    self.apply_step(q, dir, t, &alpha);
                    self.pos[q] = if dir > 0.0 { Position::AtUpper } else { Position::AtLower };
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                    degenerate_run = 0;
                }
                Step::Pivot { row, t, to_upper } => {
                    // row r of the old inverse times the full matrix
                    pivot_row.iter_mut().for_each(|v| *v = 0.0);
                    for (i, entries) in self.rows.iter().enumerate() {
                        let rho = self.binv[i * self.m + row];
                        if rho != 0.0 {
                            for &(j, a) in entries {
                                pivot_row[j] += rho * a;
                            }
                        }
                    }
                    self.apply_step(q, dir, t, &alpha);
                    let leaving = self.basis[row];
                    self.settle_on_bound(leaving, to_upper);
                    self.pos[leaving] = if to_upper { Position::AtUpper } else { Position::AtLower };
                    self.pos[q] = Position::Basic(row);
                    self.basis[row] = q;

                    let f = d[q] / alpha[row];
                    let ratio_w = weights[q] / (alpha[row] * alpha[row]);
                    for j in 0..n {
                        let a = pivot_row[j];
                        if a == 0.0 || j == leaving || matches!(self.pos[j], Position::Basic(_)) {
                            continue;
                        }
                        d[j] -= f * a;
                        weights[j] = weights[j].max(a * a * ratio_w);
                    }
                    d[leaving] = -f;
                    d[q] = 0.0;
                    weights[leaving] = ratio_w.max(1.0);

                    self.update_inverse(row, &alpha);
                    if t <= DEGENERATE_STEP {
                        degenerate_run += 1;
                    } else {
                        degenerate_run = 0;
                    }
                    self.pivots_since_refactor += 1;
                    if self.pivots_since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                        d = self.reduced_costs();
                    }
                }
            }
        }
    }

    fn save_bounds(&mut self) {
        if self.saved_bounds.is_none() {
            self.saved_bounds = Some((self.lo.clone(), self.hi.clone()));
        }
    }

    /// A leaving variable keeps its computed value; when that value misses
    /// the bound it leaves at (tolerance overshoot or round-off), the working
    /// bound is shifted onto it instead of moving the point off `Ax = b`.
    fn settle_on_bound(&mut self, var: usize, to_upper: bool) {
        let bound = if to_upper { self.hi[var] } else { self.lo[var] };
        if self.x[var] == bound {
            return;
        }
        self.save_bounds();
        if to_upper {
            self.hi[var] = self.x[var].max(self.lo[var]);
            self.x[var] = self.hi[var];
        } else {
            self.lo[var] = self.x[var].min(self.hi[var]);
            self.x[var] = self.lo[var];
        }
    }

    /// Widens every bound that is not holding a nonbasic variable in place.
    fn perturb_bounds(&mut self) {
        self.save_bounds();
        for j in 0..self.first_artificial {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let (widen_lo, widen_hi) = match self.pos[j] {
                Position::Basic(_) => (true, true),
                Position::AtLower => (false, true),
                Position::AtUpper => (true, false),
            };
            if widen_lo && self.lo[j].is_finite() {
                let u: f64 = self.rng.random();
                self.lo[j] -= PERTURB_SCALE * (1.0 + self.lo[j].abs()) * (1.0 + u);
            }
            if widen_hi && self.hi[j].is_finite() {
                let u: f64 = self.rng.random();
                self.hi[j] += PERTURB_SCALE * (1.0 + self.hi[j].abs()) * (1.0 + u);
            }
        }
    }

    /// Puts the true bounds back, moves nonbasic variables onto them and
    /// recomputes the basic values.
    fn restore_bounds(&mut self) -> Result<(), LpError> {
        let Some((lo, hi)) = self.saved_bounds.take() else {
            return Ok(());
        };
        self.lo = lo;
        self.hi = hi;
        for j in 0..self.cols.len() {
            match self.pos[j] {
                Position::Basic(_) => {}
                Position::AtLower => self.x[j] = self.lo[j],
                Position::AtUpper => self.x[j] = self.hi[j],
            }
        }
        self.refactor()
    }

    /// Dual simplex pivots until the basic values are within bounds. The basis
    /// must be dual feasible. Returns `false` when the iteration limit is hit.
    fn dual_cleanup(&mut self, iterations: &mut usize, max_iters: usize) -> Result<bool, LpError> {
        loop {
            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64, bool)> = None;
            for r in 0..self.m {
                let var = self.basis[r];
                let (v, to_upper) = if self.x[var] < self.lo[var] - EPS_FEAS {
                    (self.lo[var] - self.x[var], false)
                } else if self.x[var] > self.hi[var] + EPS_FEAS {
                    (self.x[var] - self.hi[var], true)
                } else {
                    continue;
                };
                if leave.is_none_or(|l| v > l.1) {
                    leave = Some((r, v, to_upper));
                }
            }
            let Some((row, _, to_upper)) = leave else {
                return Ok(true);
            };
            if *iterations >= max_iters {
                return Ok(false);
            }
            let m = self.m;
            let rho: Vec<f64> = (0..m).map(|k| self.binv[k * m + row]).collect();
            let y = self.duals();
            // the leaving variable must rise (false) or fall (true)
            let mut best: Option<(usize, f64, f64)> = None; // (var, ratio, |alpha|)
            for j in 0..self.cols.len() {
                let sign = match self.pos[j] {
                    Position::Basic(_) => continue,
                    _ if self.lo[j] == self.hi[j] => continue,
                    Position::AtLower => 1.0,
                    Position::AtUpper => -1.0,
                };
                let a: f64 = self.cols[j].iter().map(|&(i, v)| rho[i] * v).sum();
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                // moving x_j in its feasible direction changes x_leaving by -a * sign
                let helps = if to_upper { a * sign > 0.0 } else { a * sign < 0.0 };
                if !helps {
                    continue;
                }
                let ratio = (self.reduced_cost(j, &y).abs() / a.abs()).max(0.0);
                let better = match best {
                    None => true,
                    Some((_, br, ba)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && a.abs() > ba),
                };
                if better {
                    best = Some((j, ratio, a.abs()));
                }
            }
            let Some((q, _, _)) = best else {
                // no repair possible at this basis; keep the nearly feasible point
                log::warn!("dual cleanup found no entering variable");
                return Ok(true);
            };
            let alpha = self.column(q);
            let leaving = self.basis[row];
            let target = if to_upper { self.hi[leaving] } else { self.lo[leaving] };
            let delta = (self.x[leaving] - target) / alpha[row];
            self.apply_step(q, 1.0, delta, &alpha);
            self.x[leaving] = target;
            self.pos[leaving] = if to_upper { Position::AtUpper } else { Position::AtLower };
            self.pos[q] = Position::Basic(row);
            self.basis[row] = q;
            self.update_inverse(row, &alpha);
            *iterations += 1;
            self.pivots_since_refactor += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, t: f64, alpha: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[q] += dir * t;
        for (r, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                self.x[self.basis[r]] -= dir * t * a;
            }
        }
    }

    fn update_inverse(&mut self, row: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[row];
        for col in self.binv.chunks_mut(m) {
            let p = col[row] / piv;
            if p != 0.0 {
                axpy(col, -p, alpha);
                col[row] = p;
            }
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let range = self.hi[q] - self.lo[q];

        // rate of change of each basic variable per unit step
        let limit = |r: usize, slack: f64| -> Option<(f64, bool)> {
            let a = alpha[r];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let var = self.basis[r];
            let rate = -dir * a;
            if rate < 0.0 {
                let lo = self.lo[var];
                lo.is_finite().then(|| (((self.x[var] - lo + slack) / -rate).max(0.0), false))
            } else {
                let hi = self.hi[var];
                hi.is_finite().then(|| (((hi - self.x[var] + slack) / rate).max(0.0), true))
            }
        };

        let mut best: Option<(usize, f64, bool)> = None;
        if bland {
            for r in 0..self.m {
                if let Some((t, up)) = limit(r, 0.0) {
                    let better = match best {
                        None => true,
                        Some((br, bt, _)) => t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[r] < self.basis[br]),
                    };
                    if better {
                        best = Some((r, t, up));
                    }
                }
            }
        } else {
            // Harris: bound the step with relaxed bounds, then take the largest pivot
            let mut t_max = f64::INFINITY;
            for r in 0..self.m {
                if let Some((t, _)) = limit(r, EPS_FEAS) {
                    t_max = t_max.min(t);
                }
            }
            if t_max.is_finite() {
                for r in 0..self.m {
                    if let Some((t, up)) = limit(r, 0.0) {
                        if t <= t_max {
                            let better = match best {
                                None => true,
                                Some((br, _, _)) => alpha[r].abs() > alpha[br].abs(),
                            };
                            if better {
                                best = Some((r, t, up));
                            }
                        }
                    }
                }
            }
        }

        match best {
            Some((row, t, to_upper)) if t < range => Step::Pivot { row, t, to_upper },
            _ if range.is_finite() => Step::Flip(range),
            Some((row, t, to_upper)) => Step::Pivot { row, t, to_upper },
            None => Step::Unbounded,
        }
    }

    fn solution(&self, lp: &LinearProgram, status: LpStatus, iterations: usize) -> LpSolution {
        let x: Vec<f64> = (0..self.n_struct)
            .map(|j| {
                let (lo, hi) = lp.bounds()[j];
                self.x[j].clamp(lo, hi)
            })
            .collect();
        let objective_value = lp.objective_value(&x);
        LpSolution {
            x,
            objective_value,
            status,
            iterations,
        }
    }
}

/// Inverse of a dense row-major `n x n` matrix by Gauss-Jordan elimination
/// with partial pivoting; `a` is destroyed.
fn dense_inverse(a: &mut [f64], n: usize) -> Result<Vec<f64>, LpError> {
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let mut best = c;
        let mut best_abs = a[c * n + c].abs();
        for r in c + 1..n {
            let v = a[r * n + c].abs();
            if v > best_abs {
                best = r;
                best_abs = v;
            }
        }
        if best_abs < 1e-11 {
            return Err(LpError::Singular);
        }
        if best != c {
            for k in 0..n {
                a.swap(c * n + k, best * n + k);
                inv.swap(c * n + k, best * n + k);
            }
        }
        let p = a[c * n + c];
        for k in 0..n {
            a[c * n + k] /= p;
            inv[c * n + k] /= p;
        }
        for r in 0..n {
            if r == c {
                continue;
            }
            let f = a[r * n + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                a[r * n + k] -= f * a[c * n + k];
                inv[r * n + k] -= f * inv[c * n + k];
            }
        }
    }
    Ok(inv)
}

/// `y += a * x`
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

enum Step {
    Flip(f64),
    Pivot { row: usize, t: f64, to_upper: bool },
    Unbounded,
}
