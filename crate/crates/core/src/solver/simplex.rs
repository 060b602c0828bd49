//! Bounded-variable revised simplex on an explicit dense basis inverse.
//!
//! Column layout: structural variables `0..n`, one slack per row
//! `n..n+m` (row activity minus slack equals zero), and one artificial per row
//! `n+m..n+2m` used only by phase I.

use crate::milp::{MilpModel, Relation, Sense};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const REFACTOR_EVERY: usize = 200;
const RESIDUAL_TOL: f64 = 1e-9;
/// Bound widening in the first pass of the ratio tests.
const HARRIS_TOL: f64 = 5e-10;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
pub(crate) const BLAND_AFTER: usize = 5000;
/// Stalled pivots before the basic bounds are perturbed.
const PERTURB_AFTER: usize = 50;
const PERTURB_SCALE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// The minimization form of a model: `A x - s = 0`, bounds on `x` and `s`.
#[derive(Debug)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    /// Bounds of structural and slack columns (length `n + m`).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// +1 when the model minimizes, -1 when it maximizes.
    pub sign: f64,
}

impl StandardForm {
    pub fn from_model(model: &MilpModel) -> Self {
        let n = model.num_vars();
        let m = model.num_constraints();
        let sign = match model.sense() {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cols = vec![Vec::new(); n];
        let mut rows = vec![Vec::new(); m];
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for v in model.variables() {
            lower.push(v.lower.map_or(f64::NEG_INFINITY, |l| l as f64));
            upper.push(v.upper.map_or(f64::INFINITY, |u| u as f64));
        }
        for (r, c) in model.constraints().iter().enumerate() {
            for &(k, a) in &c.terms {
                cols[k].push((r, a as f64));
                rows[r].push((k, a as f64));
            }
            let b = c.rhs as f64;
            let (lo, hi) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, b),
                Relation::Ge => (b, f64::INFINITY),
                Relation::Eq => (b, b),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let cost = model
            .variables()
            .iter()
            .map(|v| sign * v.objective as f64)
            .collect();
        StandardForm {
            n,
            m,
            cols,
            rows,
            cost,
            lower,
            upper,
            sign,
        }
    }
}

/// Complete solver state; cheap enough to clone for warm starts.
#[derive(Debug, Clone)]
pub(crate) struct LpState {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Column-major `m x m`: entry (i, k) at `k * m + i`.
    binv: Vec<f64>,
    art_sign: Vec<f64>,
    pivots_since_refactor: usize,
}

impl LpState {
    pub fn memory_bytes(&self) -> usize {
        8 * (self.binv.len() + 4 * self.x.len()) + 16 * self.state.len()
    }

    /// The basis without its inverse; restoring it costs a refactorization.
    pub fn compact(&self) -> CompactBasis {
        let art = self.x.len() - self.art_sign.len();
        CompactBasis {
            basis: self.basis.clone(),
            state: self.state.clone(),
            art_sign: self.art_sign.clone(),
            art_upper: self.upper[art..].to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompactBasis {
    basis: Vec<usize>,
    state: Vec<VarState>,
    art_sign: Vec<f64>,
    art_upper: Vec<f64>,
}

impl CompactBasis {
    pub fn memory_bytes(&self) -> usize {
        8 * (self.basis.len() + 2 * self.art_sign.len()) + 16 * self.state.len()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// Objective in minimization form.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug)]
pub(crate) struct NumericalFailure(pub String);

pub(crate) struct Simplex<'a> {
    sf: &'a StandardForm,
    st: LpState,
    cost: Vec<f64>,
    iterations: usize,
    degenerate_run: usize,
    bland: bool,
    /// Simplex multipliers for the current costs, kept up to date across
    /// pivots and dropped whenever costs or the inverse are rebuilt.
    pi: Option<Vec<f64>>,
    /// Original bounds while the basic bounds are perturbed against stalling.
    saved_bounds: Option<(Vec<f64>, Vec<f64>)>,
    max_iterations: usize,
}

impl<'a> Simplex<'a> {
    /// Starts from the all-slack basis with artificials where needed.
    pub fn cold(sf: &'a StandardForm, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let (n, m) = (sf.n, sf.m);
        let total = n + 2 * m;
        let mut lo = lower;
        let mut hi = upper;
        lo.extend(std::iter::repeat(0.0).take(m));
        hi.extend(std::iter::repeat(0.0).take(m));
        let mut x = vec![0.0; total];
        let mut state = vec![VarState::AtLower; total];
        for k in 0..n {
            let (l, u) = (lo[k], hi[k]);
            if l.is_finite() {
                x[k] = l;
                state[k] = VarState::AtLower;
            } else if u.is_finite() {
                x[k] = u;
                state[k] = VarState::AtUpper;
            } else {
                x[k] = 0.0;
                state[k] = VarState::Free;
            }
        }
        let mut basis = Vec::with_capacity(m);
        let mut art_sign = vec![1.0; m];
        for r in 0..m {
            let activity: f64 = sf.rows[r].iter().map(|&(k, a)| a * x[k]).sum();
            let (l, u) = (lo[n + r], hi[n + r]);
            let s = n + r;
            let a = n + m + r;
            if activity >= l - PRIMAL_TOL && activity <= u + PRIMAL_TOL {
                x[s] = activity;
                state[s] = VarState::Basic(r);
                basis.push(s);
            } else {
                // The slack sits at its violated bound; the artificial absorbs
                // the gap: activity - s + sign*a = 0 with a >= 0.
                let target = if activity < l { l } else { u };
                x[s] = target;
                state[s] = if activity < l {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                let gap = target - activity;
                art_sign[r] = if gap >= 0.0 { 1.0 } else { -1.0 };
                x[a] = gap.abs();
                hi[a] = f64::INFINITY;
                state[a] = VarState::Basic(r);
                basis.push(a);
            }
        }
        // Basis columns are +-e_r for slacks (coefficient -1) and artificials.
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            let col_sign = if basis[r] < n + m { -1.0 } else { art_sign[r] };
            binv[r * m + r] = 1.0 / col_sign;
        }
        let st = LpState {
            lower: lo,
            upper: hi,
            x,
            state,
            basis,
            binv,
            art_sign,
            pivots_since_refactor: 0,
        };
        Self::with_state(sf, st)
    }

    /// Rebuilds a solver from a stored basis under new bounds on the
    /// structural and slack columns.
    pub fn resume(
        sf: &'a StandardForm,
        basis: &CompactBasis,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, NumericalFailure> {
        let m = sf.m;
        let mut lo = lower;
        let mut hi = upper;
        lo.extend(std::iter::repeat(0.0).take(m));
        hi.extend(basis.art_upper.iter().copied());
        let mut state = basis.state.clone();
        let x: Vec<f64> = state
            .iter_mut()
            .enumerate()
            .map(|(k, s)| match *s {
                VarState::Basic(_) => 0.0,
                VarState::AtLower if lo[k].is_finite() => lo[k],
                VarState::AtUpper if hi[k].is_finite() => hi[k],
                _ if lo[k].is_finite() => {
                    *s = VarState::AtLower;
                    lo[k]
                }
                _ if hi[k].is_finite() => {
                    *s = VarState::AtUpper;
                    hi[k]
                }
                _ => {
                    *s = VarState::Free;
                    0.0
                }
            })
            .collect();
        let st = LpState {
            lower: lo,
            upper: hi,
            x,
            state,
            basis: basis.basis.clone(),
            binv: vec![0.0; m * m],
            art_sign: basis.art_sign.clone(),
            pivots_since_refactor: 0,
        };
        let mut spx = Self::with_state(sf, st);
        spx.refactor();
        Ok(spx)
    }

    pub fn with_state(sf: &'a StandardForm, st: LpState) -> Self {
        let total = sf.n + 2 * sf.m;
        Simplex {
            sf,
            st,
            cost: vec![0.0; total],
            iterations: 0,
            degenerate_run: 0,
            bland: false,
            pi: None,
            saved_bounds: None,
            max_iterations: 50_000 + 50 * total,
        }
    }

    pub fn into_state(mut self) -> LpState {
        self.unperturb();
        self.st
    }

    pub fn state(&self) -> &LpState {
        &self.st
    }

    fn m(&self) -> usize {
        self.sf.m
    }

    /// Sparse column of variable `k`.
    fn column(&self, k: usize) -> ColumnRef<'_> {
        let (n, m) = (self.sf.n, self.sf.m);
        if k < n {
            ColumnRef::Sparse(&self.sf.cols[k])
        } else if k < n + m {
            ColumnRef::Unit(k - n, -1.0)
        } else {
            let r = k - n - m;
            ColumnRef::Unit(r, self.st.art_sign[r])
        }
    }

    fn ftran(&self, k: usize) -> Vec<f64> {
        let m = self.m();
        let mut alpha = vec![0.0; m];
        let mut add = |r: usize, v: f64| {
            let col = &self.st.binv[r * m..(r + 1) * m];
            for (a, b) in alpha.iter_mut().zip(col) {
                *a += v * b;
            }
        };
        match self.column(k) {
            ColumnRef::Sparse(c) => {
                for &(r, v) in c {
                    add(r, v);
                }
            }
            ColumnRef::Unit(r, v) => add(r, v),
        }
        alpha
    }

    /// Row `r` of the basis inverse.
    fn binv_row(&self, r: usize) -> Vec<f64> {
        let m = self.m();
        (0..m).map(|k| self.st.binv[k * m + r]).collect()
    }

    /// Simplex multipliers for the current phase costs.
    fn duals(&mut self) -> Vec<f64> {
        if let Some(pi) = &self.pi {
            return pi.clone();
        }
        let m = self.m();
        let cb: Vec<f64> = self.st.basis.iter().map(|&b| self.cost[b]).collect();
        let pi: Vec<f64> = (0..m)
            .map(|k| {
                let col = &self.st.binv[k * m..(k + 1) * m];
                col.iter().zip(&cb).map(|(a, c)| a * c).sum()
            })
            .collect();
        self.pi = Some(pi.clone());
        pi
    }

    fn dot_column(&self, k: usize, v: &[f64]) -> f64 {
        match self.column(k) {
            ColumnRef::Sparse(c) => c.iter().map(|&(r, a)| a * v[r]).sum(),
            ColumnRef::Unit(r, a) => a * v[r],
        }
    }

    fn reduced_cost(&self, k: usize, pi: &[f64]) -> f64 {
        self.cost[k] - self.dot_column(k, pi)
    }

    fn is_artificial(&self, k: usize) -> bool {
        k >= self.sf.n + self.sf.m
    }

    fn fixed(&self, k: usize) -> bool {
        self.st.upper[k] - self.st.lower[k] <= 0.0
    }

    /// Replaces the basic variable at row `r` by `q` given `alpha = B^-1 a_q`.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m();
        let ar = alpha[r];
        if let Some(mut pi) = self.pi.take() {
            // pi' = pi + (d_q / alpha_r) * row r of the old inverse.
            let step = self.reduced_cost(q, &pi) / ar;
            if step != 0.0 {
                for (k, p) in pi.iter_mut().enumerate() {
                    *p += step * self.st.binv[k * m + r];
                }
            }
            self.pi = Some(pi);
        }
        let nz: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != r && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        for k in 0..m {
            let col = &mut self.st.binv[k * m..(k + 1) * m];
            let t = col[r];
            if t == 0.0 {
                continue;
            }
            let t = t / ar;
            col[r] = t;
            for &(i, a) in &nz {
                col[i] -= a * t;
            }
        }
        let leaving = self.st.basis[r];
        self.st.basis[r] = q;
        self.st.state[q] = VarState::Basic(r);
        let _ = leaving;
        self.st.pivots_since_refactor += 1;
    }

    /// Rebuilds the basis inverse from scratch by pivoting the current basic
    /// columns into an identity start. Columns that turn out dependent are
    /// swapped for slacks.
    fn refactor(&mut self) {
        let (n, m) = (self.sf.n, self.sf.m);
        let target: Vec<usize> = self.st.basis.clone();
        self.pi = None;
        // Start from the slack basis: column n+r is -e_r.
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = -1.0;
        }
        self.st.binv = binv;
        let mut basis: Vec<usize> = (0..m).map(|r| n + r).collect();
        let mut keep = vec![false; m];
        for &b in &target {
            if b >= n && b < n + m {
                keep[b - n] = true;
            }
        }
        self.st.basis = basis.clone();
        let mut dropped = Vec::new();
        for &b in &target {
            if b >= n && b < n + m {
                continue;
            }
            let alpha = self.ftran(b);
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                if keep[r] || basis[r] != n + r {
                    continue;
                }
                let a = alpha[r].abs();
                if a > PIVOT_TOL && best.map_or(true, |(_, v)| a > v) {
                    best = Some((r, a));
                }
            }
            let Some((r, _)) = best else {
                dropped.push(b);
                continue;
            };
            self.pivot(r, b, &alpha);
            basis[r] = b;
            keep[r] = true;
        }
        // Columns that could not be placed leave the basis at a bound; the
        // slacks of the rows they would have covered take their place.
        for &b in &dropped {
            let (lo, hi) = (self.st.lower[b], self.st.upper[b]);
            let x = self.st.x[b];
            let (v, state) = if lo.is_finite() && (!hi.is_finite() || x - lo <= hi - x) {
                (lo, VarState::AtLower)
            } else if hi.is_finite() {
                (hi, VarState::AtUpper)
            } else {
                (0.0, VarState::Free)
            };
            self.st.x[b] = v;
            self.st.state[b] = state;
        }
        if !dropped.is_empty() {
            log::debug!("basis repair replaced {} dependent columns", dropped.len());
        }
        self.st.basis = basis;
        for r in 0..m {
            let b = self.st.basis[r];
            self.st.state[b] = VarState::Basic(r);
        }
        self.pi = None;
        self.st.pivots_since_refactor = 0;
        self.recompute_basics();
    }

    /// x_B = -B^-1 (Σ_nonbasic a_k x_k).
    fn recompute_basics(&mut self) {
        let (n, m) = (self.sf.n, self.sf.m);
        let mut rhs = vec![0.0; m];
        for k in 0..n + 2 * m {
            if matches!(self.st.state[k], VarState::Basic(_)) {
                continue;
            }
            let v = self.st.x[k];
            if v == 0.0 {
                continue;
            }
            match self.column(k) {
                ColumnRef::Sparse(c) => {
                    for &(r, a) in c {
                        rhs[r] -= a * v;
                    }
                }
                ColumnRef::Unit(r, a) => rhs[r] -= a * v,
            }
        }
        let mut xb = vec![0.0; m];
        for (k, &v) in rhs.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let col = &self.st.binv[k * m..(k + 1) * m];
            for (x, b) in xb.iter_mut().zip(col) {
                *x += v * b;
            }
        }
        for (r, v) in xb.into_iter().enumerate() {
            let b = self.st.basis[r];
            self.st.x[b] = v;
        }
    }

    /// Recomputes the basic values from the nonbasic ones; refactors only
    /// when the result does not satisfy `A x - s = 0` to working accuracy.
    fn refresh(&mut self) {
        if self.st.pivots_since_refactor > 0 {
            self.recompute_basics();
            if self.row_residual() > RESIDUAL_TOL {
                self.refactor();
            }
        }
    }

    /// Largest row residual of `A x - s + art` at the current point.
    fn row_residual(&self) -> f64 {
        let (n, m) = (self.sf.n, self.sf.m);
        let mut r = vec![0.0; m];
        for k in 0..n + 2 * m {
            let v = self.st.x[k];
            if v == 0.0 {
                continue;
            }
            match self.column(k) {
                ColumnRef::Sparse(c) => {
                    for &(i, a) in c {
                        r[i] += a * v;
                    }
                }
                ColumnRef::Unit(i, a) => r[i] += a * v,
            }
        }
        r.into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn maybe_refactor(&mut self) {
        if self.st.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    fn set_phase_costs(&mut self, phase_one: bool) {
        self.pi = None;
        let (n, m) = (self.sf.n, self.sf.m);
        for k in 0..n + 2 * m {
            self.cost[k] = if phase_one {
                if self.is_artificial(k) {
                    1.0
                } else {
                    0.0
                }
            } else if k < n {
                self.sf.cost[k]
            } else {
                0.0
            };
        }
    }

    fn objective(&self) -> f64 {
        (0..self.sf.n).map(|k| self.sf.cost[k] * self.st.x[k]).sum()
    }

    /// Widens the bounds of the current basic structural and slack columns by
    /// small deterministic amounts so that degenerate vertices split apart.
    fn perturb(&mut self) {
        if self.saved_bounds.is_some() {
            return;
        }
        log::debug!("perturbing basic bounds after {PERTURB_AFTER} stalled pivots");
        self.saved_bounds = Some((self.st.lower.clone(), self.st.upper.clone()));
        let limit = self.sf.n + self.sf.m;
        for &b in &self.st.basis {
            if b >= limit || self.fixed(b) {
                continue;
            }
            // Golden-ratio hashing spreads the amounts over [1, 2) * scale.
            let spread = 1.0 + (b as f64 * 0.618_033_988_749_895).fract();
            let (lo, hi) = (self.st.lower[b], self.st.upper[b]);
            if lo.is_finite() {
                self.st.lower[b] = lo - PERTURB_SCALE * spread * (1.0 + lo.abs());
            }
            if hi.is_finite() {
                self.st.upper[b] = hi + PERTURB_SCALE * spread * (1.0 + hi.abs());
            }
        }
    }

    /// Restores perturbed bounds, moving nonbasic columns back onto them.
    /// Basic values may then violate their bounds slightly.
    fn unperturb(&mut self) {
        let Some((lower, upper)) = self.saved_bounds.take() else {
            return;
        };
        self.st.lower = lower;
        self.st.upper = upper;
        for k in 0..self.sf.n + self.sf.m {
            match self.st.state[k] {
                VarState::AtLower => self.st.x[k] = self.st.lower[k],
                VarState::AtUpper => self.st.x[k] = self.st.upper[k],
                _ => {}
            }
        }
        self.recompute_basics();
    }

    /// Tracks runs of pivots whose objective change is negligible.
    fn note_step(&mut self, gain: f64) {
        if gain.abs() <= 1e-9 * (1.0 + self.objective().abs()) {
            self.degenerate_run += 1;
            if self.degenerate_run == PERTURB_AFTER {
                self.perturb();
            }
            if self.degenerate_run >= BLAND_AFTER && !self.bland {
                log::debug!("switching to Bland's rule after {BLAND_AFTER} degenerate pivots");
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
            self.bland = false;
        }
    }

    /// Primal simplex on the current phase costs. Returns `Unbounded` or
    /// `Optimal`.
    fn primal(&mut self, allow_artificial_entry: bool) -> Result<LpStatus, NumericalFailure> {
        let total = self.sf.n + 2 * self.sf.m;
        loop {
            if self.iterations > self.max_iterations {
                return Err(NumericalFailure(format!(
                    "primal simplex exceeded {} iterations",
                    self.max_iterations
                )));
            }
            self.maybe_refactor();
            let pi = self.duals();
            // Pricing.
            let mut entering: Option<(usize, f64, f64)> = None; // (var, |d|, direction)
            for k in 0..total {
                if !allow_artificial_entry && self.is_artificial(k) {
                    continue;
                }
                let dir = match self.st.state[k] {
                    VarState::Basic(_) => continue,
                    _ if self.fixed(k) => continue,
                    VarState::AtLower => {
                        let d = self.reduced_cost(k, &pi);
                        if d < -DUAL_TOL {
                            Some((d.abs(), 1.0))
                        } else {
                            None
                        }
                    }
                    VarState::AtUpper => {
                        let d = self.reduced_cost(k, &pi);
                        if d > DUAL_TOL {
                            Some((d.abs(), -1.0))
                        } else {
                            None
                        }
                    }
                    VarState::Free => {
                        let d = self.reduced_cost(k, &pi);
                        if d.abs() > DUAL_TOL {
                            Some((d.abs(), -d.signum()))
                        } else {
                            None
                        }
                    }
                };
                if let Some((score, dir)) = dir {
                    if self.bland {
                        entering = Some((k, score, dir));
                        break;
                    }
                    if entering.map_or(true, |(_, s, _)| score > s) {
                        entering = Some((k, score, dir));
                    }
                }
            }
            let Some((q, d_abs, dir)) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let alpha = self.ftran(q);
            // Ratio test: basic i moves by -dir * alpha_i per unit step.
            let span = self.st.upper[q] - self.st.lower[q];
            let (step, leave) = self.primal_ratio_test(&alpha, dir, span);
            if step.is_infinite() {
                return Ok(LpStatus::Unbounded);
            }
            self.iterations += 1;
            self.note_step(d_abs * step);
            let delta = dir * step;
            self.st.x[q] += delta;
            for (r, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let b = self.st.basis[r];
                    self.st.x[b] -= a * delta;
                }
            }
            match leave {
                Some(r) => {
                    let b = self.st.basis[r];
                    let rate = -dir * alpha[r];
                    if rate < 0.0 {
                        self.st.x[b] = self.st.lower[b];
                        self.st.state[b] = VarState::AtLower;
                    } else {
                        self.st.x[b] = self.st.upper[b];
                        self.st.state[b] = VarState::AtUpper;
                    }
                    self.pivot(r, q, &alpha);
                }
                _ => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.st.x[q] = self.st.upper[q];
                        self.st.state[q] = VarState::AtUpper;
                    } else {
                        self.st.x[q] = self.st.lower[q];
                        self.st.state[q] = VarState::AtLower;
                    }
                }
            }
        }
    }

    /// Step limit imposed on basic `b` moving at `rate` per unit, with its
    /// bounds widened by `slack`.
    fn limit(&self, b: usize, rate: f64, slack: f64) -> Option<f64> {
        if rate < 0.0 {
            let lo = self.st.lower[b];
            lo.is_finite().then(|| ((self.st.x[b] - lo + slack) / -rate).max(0.0))
        } else {
            let hi = self.st.upper[b];
            hi.is_finite().then(|| ((hi + slack - self.st.x[b]) / rate).max(0.0))
        }
    }

    /// Two-pass (Harris) ratio test: the first pass bounds the step with
    /// slightly widened bounds, the second picks the largest pivot among the
    /// rows blocking within that bound. Under Bland's rule the exact minimum
    /// ratio with the lowest basic index is used instead.
    fn primal_ratio_test(&self, alpha: &[f64], dir: f64, span: f64) -> (f64, Option<usize>) {
        let rows = || {
            alpha
                .iter()
                .enumerate()
                .filter(|(_, a)| a.abs() > PIVOT_TOL)
                .map(|(r, &a)| (r, a, -dir * a))
        };
        if self.bland {
            let mut best: Option<(usize, f64)> = None;
            for (r, _, rate) in rows() {
                let Some(limit) = self.limit(self.st.basis[r], rate, 0.0) else {
                    continue;
                };
                let better = match best {
                    None => true,
                    Some((lr, ls)) => {
                        limit < ls - 1e-12
                            || (limit <= ls + 1e-12 && self.st.basis[r] < self.st.basis[lr])
                    }
                };
                if better {
                    best = Some((r, limit));
                }
            }
            return match best {
                Some((r, limit)) if limit < span => (limit, Some(r)),
                _ => (span, None),
            };
        }
        let mut bound = f64::INFINITY;
        for (r, _, rate) in rows() {
            if let Some(limit) = self.limit(self.st.basis[r], rate, HARRIS_TOL) {
                bound = bound.min(limit);
            }
        }
        if span <= bound {
            return (span, None);
        }
        let mut best: Option<(usize, f64, f64)> = None; // (row, |alpha|, limit)
        for (r, a, rate) in rows() {
            let Some(limit) = self.limit(self.st.basis[r], rate, 0.0) else {
                continue;
            };
            if limit <= bound && best.map_or(true, |(_, ba, _)| a.abs() > ba) {
                best = Some((r, a.abs(), limit));
            }
        }
        match best {
            Some((r, _, limit)) => (limit, Some(r)),
            None => (f64::INFINITY, None),
        }
    }

    /// Dual simplex from a dual feasible basis. Returns `Infeasible` or
    /// `Optimal`.
    fn dual(&mut self) -> Result<LpStatus, NumericalFailure> {
        let total = self.sf.n + 2 * self.sf.m;
        loop {
            if self.iterations > self.max_iterations {
                return Err(NumericalFailure(format!(
                    "dual simplex exceeded {} iterations",
                    self.max_iterations
                )));
            }
            self.maybe_refactor();
            // Leaving row: largest bound violation.
            let mut leave: Option<(usize, f64, f64)> = None; // (row, violation, target)
            for (r, &b) in self.st.basis.iter().enumerate() {
                let x = self.st.x[b];
                let (lo, hi) = (self.st.lower[b], self.st.upper[b]);
                let (viol, target) = if x < lo - PRIMAL_TOL {
                    (lo - x, lo)
                } else if x > hi + PRIMAL_TOL {
                    (x - hi, hi)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((lr, lv, _)) => {
                        if self.bland {
                            b < self.st.basis[lr]
                        } else {
                            viol > lv
                        }
                    }
                };
                if better {
                    leave = Some((r, viol, target));
                }
            }
            let Some((r, violation, target)) = leave else {
                return Ok(LpStatus::Optimal);
            };
            let b = self.st.basis[r];
            let increase = target > self.st.x[b];
            let rho = self.binv_row(r);
            let pi = self.duals();
            // Entering: keeps reduced costs dual feasible (min ratio), with a
            // two-pass choice favouring large pivots outside Bland's rule.
            let mut candidates: Vec<(usize, f64, f64)> = Vec::new(); // (var, |d|, |alpha_r|)
            for k in 0..total {
                if self.is_artificial(k) || self.fixed(k) {
                    continue;
                }
                let st = self.st.state[k];
                if matches!(st, VarState::Basic(_)) {
                    continue;
                }
                let ar = self.dot_column(k, &rho);
                if ar.abs() <= PIVOT_TOL {
                    continue;
                }
                // x_b changes by -ar * dx_k; need the sign that moves x_b to target.
                let want_dx_sign = if increase { -ar.signum() } else { ar.signum() };
                let ok = match st {
                    VarState::AtLower => want_dx_sign > 0.0,
                    VarState::AtUpper => want_dx_sign < 0.0,
                    VarState::Free => true,
                    VarState::Basic(_) => false,
                };
                if ok {
                    candidates.push((k, self.reduced_cost(k, &pi).abs(), ar.abs()));
                }
            }
            let mut entering: Option<(usize, f64, f64)> = None; // (var, ratio, |alpha_r|)
            if self.bland {
                for &(k, d, a) in &candidates {
                    let ratio = d / a;
                    if entering.map_or(true, |(_, er, _)| ratio < er - 1e-12) {
                        entering = Some((k, ratio, a));
                    }
                }
            } else {
                let bound = candidates
                    .iter()
                    .map(|&(_, d, a)| (d + HARRIS_TOL) / a)
                    .fold(f64::INFINITY, f64::min);
                for &(k, d, a) in &candidates {
                    let ratio = d / a;
                    if ratio <= bound && entering.map_or(true, |(_, _, ea)| a > ea) {
                        entering = Some((k, ratio, a));
                    }
                }
            }
            let Some((q, ratio, _)) = entering else {
                return Ok(LpStatus::Infeasible);
            };
            let alpha = self.ftran(q);
            if alpha[r].abs() <= PIVOT_TOL {
                // Inconsistent with the row computation; rebuild and retry.
                if self.st.pivots_since_refactor == 0 {
                    return Err(NumericalFailure("dual pivot vanishes on a fresh factorization".into()));
                }
                self.refactor();
                continue;
            }
            self.iterations += 1;
            self.note_step(ratio * violation);
            let dx = (self.st.x[b] - target) / alpha[r];
            self.st.x[q] += dx;
            for (i, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let bi = self.st.basis[i];
                    self.st.x[bi] -= a * dx;
                }
            }
            self.st.x[b] = target;
            self.st.state[b] = if increase {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            self.pivot(r, q, &alpha);
        }
    }

    /// Largest bound violation among basic variables.
    fn primal_infeasibility(&self) -> f64 {
        self.st
            .basis
            .iter()
            .map(|&b| {
                let x = self.st.x[b];
                (self.st.lower[b] - x).max(x - self.st.upper[b]).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    fn artificial_mass(&self) -> f64 {
        let (n, m) = (self.sf.n, self.sf.m);
        (n + m..n + 2 * m).map(|k| self.st.x[k].abs()).sum()
    }

    /// Forces artificials out of the basis where possible and fixes them at 0.
    fn retire_artificials(&mut self) {
        let (n, m) = (self.sf.n, self.sf.m);
        for r in 0..m {
            let b = self.st.basis[r];
            if !self.is_artificial(b) {
                continue;
            }
            let rho = self.binv_row(r);
            let mut best: Option<(usize, f64)> = None;
            for k in 0..n + m {
                if matches!(self.st.state[k], VarState::Basic(_)) {
                    continue;
                }
                let a = self.dot_column(k, &rho).abs();
                if a > 1e-7 && best.map_or(true, |(_, v)| a > v) {
                    best = Some((k, a));
                }
            }
            if let Some((k, _)) = best {
                let alpha = self.ftran(k);
                // Degenerate exchange: the artificial is (near) zero.
                self.st.x[b] = 0.0;
                self.st.state[b] = VarState::AtLower;
                self.pivot(r, k, &alpha);
            }
        }
        for k in n + m..n + 2 * m {
            self.st.upper[k] = 0.0;
            if !matches!(self.st.state[k], VarState::Basic(_)) {
                self.st.x[k] = 0.0;
                self.st.state[k] = VarState::AtLower;
            }
        }
        self.recompute_basics();
    }

    /// Two-phase primal solve from a cold start.
    pub fn solve_cold(&mut self) -> Result<LpOutcome, NumericalFailure> {
        if self.artificial_mass() > 0.0 {
            self.set_phase_costs(true);
            self.primal(true)?;
            self.refactor();
            if self.artificial_mass() > 1e-7 {
                return Ok(self.outcome(LpStatus::Infeasible));
            }
        }
        self.retire_artificials();
        self.finish_primal()
    }

    fn finish_primal(&mut self) -> Result<LpOutcome, NumericalFailure> {
        self.set_phase_costs(false);
        for _ in 0..3 {
            let status = self.primal(false)?;
            self.unperturb();
            if status == LpStatus::Unbounded {
                return Ok(self.outcome(LpStatus::Unbounded));
            }
            self.refresh();
            if self.primal_infeasibility() <= 1e-9 {
                self.snap_to_bounds();
                return Ok(self.outcome(LpStatus::Optimal));
            }
            // Drift made the basis slightly infeasible; repair with dual steps.
            if self.dual()? == LpStatus::Infeasible {
                return Ok(self.outcome(LpStatus::Infeasible));
            }
        }
        Err(NumericalFailure(
            "could not reach a primal feasible optimal basis".into(),
        ))
    }

    /// Re-solves after bound changes, starting from a previously optimal
    /// basis: dual simplex, then a primal clean-up pass.
    pub fn solve_warm(&mut self, changes: &[(usize, f64, f64)]) -> Result<LpOutcome, NumericalFailure> {
        self.set_phase_costs(false);
        for &(k, lo, hi) in changes {
            if lo > hi {
                return Ok(self.outcome(LpStatus::Infeasible));
            }
            self.st.lower[k] = lo;
            self.st.upper[k] = hi;
            let target = match self.st.state[k] {
                VarState::Basic(_) => continue,
                VarState::AtLower | VarState::Free if lo.is_finite() => {
                    self.st.state[k] = VarState::AtLower;
                    lo
                }
                VarState::AtUpper if hi.is_finite() => hi,
                VarState::AtUpper => {
                    self.st.state[k] = VarState::AtLower;
                    lo
                }
                _ => hi,
            };
            let delta = target - self.st.x[k];
            if delta != 0.0 {
                let alpha = self.ftran(k);
                self.st.x[k] = target;
                for (r, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        let b = self.st.basis[r];
                        self.st.x[b] -= a * delta;
                    }
                }
            }
        }
        // A nonbasic variable whose reduced cost has the wrong sign for its
        // bound (possible after moving it to the other bound) breaks dual
        // feasibility; such cases fall back to primal clean-up below.
        if self.dual()? == LpStatus::Infeasible {
            return Ok(self.outcome(LpStatus::Infeasible));
        }
        self.finish_primal()
    }

    fn snap_to_bounds(&mut self) {
        for k in 0..self.st.x.len() {
            let (lo, hi) = (self.st.lower[k], self.st.upper[k]);
            let x = &mut self.st.x[k];
            if (*x - lo).abs() <= 1e-11 {
                *x = lo;
            } else if (*x - hi).abs() <= 1e-11 {
                *x = hi;
            }
        }
    }

    fn outcome(&self, status: LpStatus) -> LpOutcome {
        LpOutcome {
            status,
            objective: self.objective(),
            iterations: self.iterations,
        }
    }

    /// Row duals for the minimization form: `pi_r = d objective / d b_r`.
    pub fn row_duals(&mut self) -> Vec<f64> {
        self.set_phase_costs(false);
        self.duals()
    }
}

enum ColumnRef<'a> {
    Sparse(&'a [(usize, f64)]),
    Unit(usize, f64),
}
