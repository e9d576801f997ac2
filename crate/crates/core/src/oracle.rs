//! Optimization-based checks of the Bell-value bounds that never consult the
//! closed forms.
//!
//! At `G = 1` the problem is an exact linear program over the 16 deterministic
//! local strategies (writing `q(λ,jk) = ρ(λ)·p(jk|λ)` removes the bilinearity).
//! A box with `G(λ) = 1` has a deterministic marginal and is then a product of
//! that party's fixed output with the other party's local response, so it is a
//! mixture of deterministic strategies.
//!
//! For general `G` the search is a randomized block-coordinate ascent over
//! hidden-variable models with a fixed number of components. With the boxes
//! fixed, the joint weights `ρ(λ)p(jk|λ)` solve an LP; with the settings fixed,
//! the boxes `(m_j, n_k, c_jk)` solve an LP once each component has a
//! designated marginal carrying its guessing probability. Every iterate is
//! exactly feasible, and the guessing constraint is held as `≥ G`; a final mix
//! with the PR box brings it down to `= G` without lowering `S`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::Mode;
use crate::error::{domain_err, Result};
use crate::lp::{LpProblem, Relation};
use crate::model::{
    free_will_parameter, guessing_probability, observed_s, ChshBox, Component, HiddenVariableModel,
    SettingsDistribution, DEFAULT_TOL,
};
use crate::quantum::restart_rng;

#[inline]
fn chsh_sign(s: usize) -> f64 {
    if s == 3 {
        -1.0
    } else {
        1.0
    }
}

/// Local strategy with pre-programmed outputs `a = a_j`, `b = b_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a0: u8,
    pub a1: u8,
    pub b0: u8,
    pub b1: u8,
}

impl DeterministicStrategy {
    /// Index bits, low to high: `a0, a1, b0, b1`.
    pub fn from_index(i: usize) -> Self {
        let bit = |s: usize| ((i >> s) & 1) as u8;
        DeterministicStrategy {
            a0: bit(0),
            a1: bit(1),
            b0: bit(2),
            b1: bit(3),
        }
    }

    pub fn index(&self) -> usize {
        self.a0 as usize | (self.a1 as usize) << 1 | (self.b0 as usize) << 2 | (self.b1 as usize) << 3
    }

    pub fn all() -> [Self; 16] {
        std::array::from_fn(Self::from_index)
    }

    pub fn alice(&self, j: usize) -> usize {
        [self.a0, self.a1][j] as usize
    }

    pub fn bob(&self, k: usize) -> usize {
        [self.b0, self.b1][k] as usize
    }

    pub fn correlator(&self, j: usize, k: usize) -> f64 {
        if (self.alice(j) ^ self.bob(k)) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn to_box<T: crate::Scalar>(&self) -> ChshBox<T> {
        ChshBox::deterministic([self.alice(0), self.alice(1)], [self.bob(0), self.bob(1)])
    }
}

/// Deterministic-strategy LP with settings relabeled by `j → j ⊕ flip_alice`,
/// `k → k ⊕ flip_bob` in the CHSH signs. Variable `4λ + (2j+k)` is `q(λ, jk)`.
pub fn relabeled_deterministic_lp(p: f64, flip_alice: bool, flip_bob: bool) -> Result<LpProblem> {
    if !(0.25..=1.0).contains(&p) {
        return Err(domain_err!("free-will parameter {p} outside [1/4, 1]"));
    }
    let strategies = DeterministicStrategy::all();
    let nv = 64;
    let mut lp = LpProblem::new(nv);
    for (l, st) in strategies.iter().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                let jj = j ^ flip_alice as usize;
                let kk = k ^ flip_bob as usize;
                let sgn = if jj * kk == 1 { -1.0 } else { 1.0 };
                lp.objective[4 * l + 2 * j + k] = 4.0 * sgn * st.correlator(j, k);
            }
        }
    }
    for s in 0..4 {
        let mut row = vec![0.0; nv];
        for l in 0..16 {
            row[4 * l + s] = 1.0;
        }
        lp.add(row, Relation::Eq, 0.25);
    }
    for l in 0..16 {
        for s in 0..4 {
            let mut row = vec![0.0; nv];
            for t in 0..4 {
                row[4 * l + t] = -p;
            }
            row[4 * l + s] += 1.0;
            lp.add(row, Relation::Le, 0.0);
        }
    }
    Ok(lp)
}

/// The `G = 1` LP in its standard labeling.
pub fn deterministic_lp(p: f64) -> Result<LpProblem> {
    relabeled_deterministic_lp(p, false, false)
}

/// Largest CHSH value over deterministic hidden-variable models with uniform
/// observed inputs and free-will parameter at most `p`.
pub fn lp_deterministic_max_s(p: f64) -> Result<f64> {
    Ok(deterministic_lp(p)?.solve()?.objective)
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub components: usize,
    pub restarts: usize,
    pub seed: u64,
    pub feasibility_tol: f64,
    /// Alternation rounds per restart.
    pub max_rounds: usize,
    /// A restart stops once a full round improves `S` by less than this.
    pub improvement_tol: f64,
    /// After ascent stalls, try re-designating each component's guessing
    /// marginal and resume from any move that helps.
    pub designation_moves: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            components: 4,
            restarts: 100,
            seed: 0,
            feasibility_tol: DEFAULT_TOL,
            max_rounds: 300,
            improvement_tol: 1e-12,
            designation_moves: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleOutcome {
    /// Best observed `S` over feasible restarts; NaN when none was feasible.
    pub value: f64,
    pub feasible: bool,
    pub feasible_restarts: usize,
    pub model: Option<HiddenVariableModel<f64>>,
}

/// Oracle value next to the closed form at one `(G, P)` point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub mode: Mode,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub bound_closed_form: f64,
    pub bound_oracle: f64,
    /// `bound_closed_form - bound_oracle`; negative means the oracle beat the bound.
    pub gap: f64,
    pub restarts: usize,
    pub seed: u64,
    pub components: usize,
    pub feasible: bool,
}

impl OracleReport {
    pub fn is_sound(&self, tol: f64) -> bool {
        !self.feasible || self.gap >= -tol
    }
}

/// Box parameters `m_j = p^A(0|j)`, `n_k = p^B(0|k)`, `c_jk = p(0,0|j,k)`.
/// As LP variables they are ordered `m0, m1, n0, n1, c00, c01, c10, c11`.
#[derive(Clone, Copy, Debug)]
struct BoxParams {
    v: [f64; 8],
}

impl BoxParams {
    fn from_box(b: &ChshBox<f64>) -> Self {
        BoxParams {
            v: [
                b.m(0),
                b.m(1),
                b.n(0),
                b.n(1),
                b.prob(0, 0, 0, 0),
                b.prob(0, 0, 0, 1),
                b.prob(0, 0, 1, 0),
                b.prob(0, 0, 1, 1),
            ],
        }
    }

    fn to_box(self) -> ChshBox<f64> {
        let v = self.v;
        ChshBox::from_marginals([v[0], v[1]], [v[2], v[3]], [v[4], v[5], v[6], v[7]])
    }

    fn correlator(&self, s: usize) -> f64 {
        let (j, k) = (s / 2, s % 2);
        1.0 + 4.0 * self.v[4 + s] - 2.0 * self.v[j] - 2.0 * self.v[2 + k]
    }

    /// Marginal `i ∈ 0..8`: variable `i / 2`, complemented when `i` is odd.
    fn marginal(&self, i: usize) -> f64 {
        let x = self.v[i / 2];
        if i.is_multiple_of(2) {
            x
        } else {
            1.0 - x
        }
    }

    fn argmax_marginal(&self) -> usize {
        (0..8).fold(0, |best, i| {
            if self.marginal(i) > self.marginal(best) {
                i
            } else {
                best
            }
        })
    }

    fn guess(&self) -> f64 {
        self.marginal(self.argmax_marginal())
    }

    /// Clamps each `c_jk` into its feasible interval so that rounding in a
    /// low-weight component cannot produce negative probabilities.
    fn repaired(mut self) -> Self {
        for t in 0..4 {
            let (m, n) = (self.v[t / 2], self.v[2 + t % 2]);
            let (lo, hi) = ((m + n - 1.0).max(0.0), m.min(n));
            self.v[4 + t] = if lo <= hi { self.v[4 + t].clamp(lo, hi) } else { hi };
        }
        self
    }

    fn mix_pr(&self, t: f64) -> Self {
        let pr = [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.0];
        BoxParams {
            v: std::array::from_fn(|i| (1.0 - t) * self.v[i] + t * pr[i]),
        }
    }
}

#[derive(Clone, Debug)]
struct Point {
    w: Vec<f64>,
    q: Vec<[f64; 4]>,
    alpha: Vec<[f64; 2]>,
    beta: Vec<[f64; 2]>,
    boxes: Vec<BoxParams>,
}

const TINY_WEIGHT: f64 = 1e-12;

impl Point {
    fn len(&self) -> usize {
        self.w.len()
    }

    fn value(&self) -> f64 {
        let mut s = 0.0;
        for l in 0..self.len() {
            for t in 0..4 {
                s += chsh_sign(t) * self.w[l] * self.q[l][t] * self.boxes[l].correlator(t);
            }
        }
        4.0 * s
    }

    fn guess(&self) -> f64 {
        (0..self.len()).map(|l| self.w[l] * self.boxes[l].guess()).sum()
    }

    fn refresh_products(&mut self) {
        for l in 0..self.len() {
            let (a, b) = (self.alpha[l], self.beta[l]);
            self.q[l] = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        }
    }
}

struct Search {
    mode: Mode,
    g: f64,
    p: f64,
    opts: OracleOptions,
}

fn normalized<const N: usize>(x: [f64; N]) -> Option<[f64; N]> {
    let total: f64 = x.iter().sum();
    (total > TINY_WEIGHT).then(|| x.map(|v| v.max(0.0) / total))
}

impl Search {
    fn initial_point(&self, rng: &mut impl Rng) -> Point {
        let n = self.opts.components;
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let w = raw.iter().map(|x| x / total).collect();
        let boxes = (0..n).map(|_| self.random_box(rng)).collect();
        Point {
            w,
            q: vec![[0.25; 4]; n],
            alpha: vec![[0.5; 2]; n],
            beta: vec![[0.5; 2]; n],
            boxes,
        }
    }

    /// Start whose first four components carry the cyclic orbit of one
    /// extreme admissible settings distribution, so equal weights give
    /// uniform inputs. Further components start with weight zero.
    fn orbit_point(&self, rng: &mut impl Rng) -> Point {
        let mut pt = self.initial_point(rng);
        let n = pt.len();
        match self.mode {
            Mode::Ns => {
                let k = ((1.0 / self.p) + 1e-12).floor() as usize;
                let mut v = [0.0; 4];
                for (i, x) in v.iter_mut().enumerate() {
                    *x = if i < k {
                        self.p
                    } else if i == k {
                        (1.0 - k as f64 * self.p).max(0.0)
                    } else {
                        0.0
                    };
                }
                let mut order = [0usize, 1, 2, 3];
                for i in (1..4).rev() {
                    order.swap(i, rng.random_range(0..=i));
                }
                let base: [f64; 4] = std::array::from_fn(|i| v[order[i]]);
                for l in 0..4 {
                    pt.q[l] = std::array::from_fn(|i| base[(i + l) % 4]);
                }
            }
            Mode::Fac => {
                let (lo, hi) = (self.p.max(0.5), (2.0 * self.p).min(1.0));
                let flip = |x: f64, f: bool| if f { [1.0 - x, x] } else { [x, 1.0 - x] };
                if rng.random::<bool>() {
                    let a = lo + (hi - lo) * rng.random::<f64>();
                    let b = (self.p / a).clamp(0.5, 1.0);
                    for l in 0..4 {
                        pt.alpha[l] = flip(a, l & 1 == 1);
                        pt.beta[l] = flip(b, l & 2 == 2);
                    }
                } else {
                    // One party pinned to the largest admissible bias, the other uniform.
                    for l in 0..4 {
                        let (x, y) = if l < 2 { (hi, 0.5) } else { (0.5, hi) };
                        pt.alpha[l] = flip(x, l == 1);
                        pt.beta[l] = flip(y, l == 3);
                    }
                }
                pt.refresh_products();
            }
        }
        for l in 0..n {
            pt.w[l] = if l < 4 { 0.25 } else { 0.0 };
        }
        pt
    }

    /// Random no-signalling box whose guessing probability is at least `g`.
    fn random_box(&self, rng: &mut impl Rng) -> BoxParams {
        let mut acc = [0.0; 16];
        let mut total = 0.0;
        for i in 0..24 {
            if rng.random::<f64>() < 0.3 {
                continue;
            }
            let wi = -(1.0 - rng.random::<f64>()).ln();
            total += wi;
            let b = extremal_box(i);
            for (x, y) in acc.iter_mut().zip(b.entries()) {
                *x += wi * y;
            }
        }
        let r = if total > 0.0 {
            BoxParams::from_box(&ChshBox::from_fn(|a, b, j, k| acc[4 * (2 * j + k) + 2 * a + b] / total))
        } else {
            BoxParams::from_box(&ChshBox::pr_box())
        };
        let d = rng.random_range(0..8);
        let rd = r.marginal(d);
        if rd >= self.g {
            return r;
        }
        // Deterministic box whose designated marginal equals one.
        let mut bits: [usize; 4] = std::array::from_fn(|_| rng.random_range(0..2));
        bits[d / 2] = d % 2;
        let det = BoxParams::from_box(&ChshBox::deterministic([bits[0], bits[1]], [bits[2], bits[3]]));
        let t = (self.g - rd) / (1.0 - rd);
        BoxParams {
            v: std::array::from_fn(|i| t * det.v[i] + (1.0 - t) * r.v[i]),
        }
    }

    fn settings_step_joint(&self, pt: &mut Point) -> Option<()> {
        let n = pt.len();
        let mut lp = LpProblem::new(4 * n);
        for l in 0..n {
            for t in 0..4 {
                lp.objective[4 * l + t] = 4.0 * chsh_sign(t) * pt.boxes[l].correlator(t);
            }
        }
        for t in 0..4 {
            let mut row = vec![0.0; 4 * n];
            for l in 0..n {
                row[4 * l + t] = 1.0;
            }
            lp.add(row, Relation::Eq, 0.25);
        }
        for l in 0..n {
            for t in 0..4 {
                let mut row = vec![0.0; 4 * n];
                for u in 0..4 {
                    row[4 * l + u] = -self.p;
                }
                row[4 * l + t] += 1.0;
                lp.add(row, Relation::Le, 0.0);
            }
        }
        let mut row = vec![0.0; 4 * n];
        for l in 0..n {
            let gl = pt.boxes[l].guess();
            for t in 0..4 {
                row[4 * l + t] = gl;
            }
        }
        lp.add(row, Relation::Ge, self.g);
        let sol = lp.solve().ok()?;
        for l in 0..n {
            let x: [f64; 4] = std::array::from_fn(|t| sol.x[4 * l + t].max(0.0));
            match normalized(x) {
                Some(q) => {
                    pt.w[l] = x.iter().sum();
                    pt.q[l] = q;
                }
                None => {
                    pt.w[l] = 0.0;
                    pt.q[l] = [0.25; 4];
                }
            }
        }
        Some(())
    }

    /// Factorizable settings step: with one party's marginal held fixed, the
    /// products `ρ(λ)·p(other|λ)` enter linearly.
    fn settings_step_product(&self, pt: &mut Point, vary_bob: bool) -> Option<()> {
        let n = pt.len();
        let fixed = |l: usize| if vary_bob { pt.alpha[l] } else { pt.beta[l] };
        let slot = |j: usize, k: usize| if vary_bob { (j, k) } else { (k, j) };
        let mut lp = LpProblem::new(2 * n);
        for l in 0..n {
            let f = fixed(l);
            for v in 0..2 {
                lp.objective[2 * l + v] = (0..2)
                    .map(|u| {
                        let (j, k) = slot(u, v);
                        let t = 2 * j + k;
                        4.0 * chsh_sign(t) * pt.boxes[l].correlator(t) * f[u]
                    })
                    .sum();
            }
        }
        for u in 0..2 {
            for v in 0..2 {
                let mut row = vec![0.0; 2 * n];
                for l in 0..n {
                    row[2 * l + v] = fixed(l)[u];
                }
                lp.add(row, Relation::Eq, 0.25);
            }
        }
        for l in 0..n {
            let f = fixed(l);
            for fu in f {
                for v in 0..2 {
                    let mut row = vec![0.0; 2 * n];
                    row[2 * l] = -self.p;
                    row[2 * l + 1] = -self.p;
                    row[2 * l + v] += fu;
                    lp.add(row, Relation::Le, 0.0);
                }
            }
        }
        let mut row = vec![0.0; 2 * n];
        for l in 0..n {
            let gl = pt.boxes[l].guess();
            row[2 * l] = gl;
            row[2 * l + 1] = gl;
        }
        lp.add(row, Relation::Ge, self.g);
        let sol = lp.solve().ok()?;
        for l in 0..n {
            let y = [sol.x[2 * l].max(0.0), sol.x[2 * l + 1].max(0.0)];
            match normalized(y) {
                Some(dist) => {
                    pt.w[l] = y[0] + y[1];
                    if vary_bob {
                        pt.beta[l] = dist;
                    } else {
                        pt.alpha[l] = dist;
                    }
                }
                None => pt.w[l] = 0.0,
            }
        }
        pt.refresh_products();
        Some(())
    }

    fn box_step(&self, pt: &mut Point) -> Option<()> {
        self.box_step_designated(pt, None)
    }

    /// Joint LP in the weights and boxes with the conditional settings held
    /// fixed. In the variables `ρ(λ)` and `U = ρ(λ)·(m, n, c)` every
    /// constraint is linear. Each component's guessing marginal is its current
    /// argmax, except `over = (λ, marginal)` when given.
    fn box_step_designated(&self, pt: &mut Point, over: Option<(usize, usize)>) -> Option<()> {
        let n = pt.len();
        let nv = 9 * n;
        let mut lp = LpProblem::new(nv);
        let mut g_row = vec![0.0; nv];
        for l in 0..n {
            let base = 9 * l;
            let (w, u) = (base, |i: usize| base + 1 + i);
            for t in 0..4 {
                let (j, k) = (t / 2, t % 2);
                let coef = 4.0 * chsh_sign(t) * pt.q[l][t];
                lp.objective[w] += coef;
                lp.objective[u(4 + t)] += 4.0 * coef;
                lp.objective[u(j)] -= 2.0 * coef;
                lp.objective[u(2 + k)] -= 2.0 * coef;

                let mut row = vec![0.0; nv];
                row[u(4 + t)] = 1.0;
                row[u(j)] = -1.0;
                lp.add(row, Relation::Le, 0.0);
                let mut row = vec![0.0; nv];
                row[u(4 + t)] = 1.0;
                row[u(2 + k)] = -1.0;
                lp.add(row, Relation::Le, 0.0);
                let mut row = vec![0.0; nv];
                row[u(j)] = 1.0;
                row[u(2 + k)] = 1.0;
                row[u(4 + t)] = -1.0;
                row[w] = -1.0;
                lp.add(row, Relation::Le, 0.0);
            }
            let d = match over {
                Some((ol, od)) if ol == l => od,
                _ => pt.boxes[l].argmax_marginal(),
            };
            if d % 2 == 0 {
                g_row[u(d / 2)] += 1.0;
            } else {
                g_row[u(d / 2)] -= 1.0;
                g_row[w] += 1.0;
            }
        }
        for t in 0..4 {
            let mut row = vec![0.0; nv];
            for l in 0..n {
                row[9 * l] = pt.q[l][t];
            }
            lp.add(row, Relation::Eq, 0.25);
        }
        lp.add(g_row, Relation::Ge, self.g);
        let sol = lp.solve().ok()?;
        for l in 0..n {
            let w = sol.x[9 * l].max(0.0);
            if w > TINY_WEIGHT {
                let v: [f64; 8] = std::array::from_fn(|i| (sol.x[9 * l + 1 + i] / w).clamp(0.0, 1.0));
                pt.boxes[l] = BoxParams { v }.repaired();
                pt.w[l] = w;
            } else {
                pt.w[l] = 0.0;
            }
        }
        Some(())
    }

    fn round(&self, pt: &mut Point) -> Option<()> {
        match self.mode {
            Mode::Ns => self.settings_step_joint(pt)?,
            Mode::Fac => {
                self.settings_step_product(pt, true)?;
                self.settings_step_product(pt, false)?;
            }
        }
        self.box_step(pt)
    }

    fn ascend(&self, pt: &mut Point) -> f64 {
        let mut value = pt.value();
        for _ in 0..self.opts.max_rounds {
            let mut next = pt.clone();
            if self.round(&mut next).is_none() {
                break;
            }
            let v = next.value();
            if v < value - 1e-9 {
                break;
            }
            *pt = next;
            let done = v - value < self.opts.improvement_tol;
            value = v;
            if done {
                break;
            }
        }
        value
    }

    /// One restart: ascend to a stationary point, try moving each component's
    /// guessing marginal, and repeat while that helps; then repair and validate.
    fn run(&self, restart: usize) -> Option<(f64, HiddenVariableModel<f64>)> {
        let mut rng = restart_rng(self.opts.seed, restart as u64);
        let mut pt = if restart.is_multiple_of(2) {
            self.orbit_point(&mut rng)
        } else {
            self.initial_point(&mut rng)
        };
        let mut seeded = pt.clone();
        if self.box_step(&mut seeded).is_some() && seeded.value() >= pt.value() {
            pt = seeded;
        }
        let mut value = self.ascend(&mut pt);
        let moves = if self.opts.designation_moves {
            self.opts.max_rounds
        } else {
            0
        };
        'outer: for _ in 0..moves {
            for l in 0..pt.len() {
                if pt.w[l] <= TINY_WEIGHT {
                    continue;
                }
                let current = pt.boxes[l].argmax_marginal();
                for d in (0..8).filter(|&d| d != current) {
                    let mut trial = pt.clone();
                    if self.box_step_designated(&mut trial, Some((l, d))).is_none() {
                        continue;
                    }
                    if trial.value() > value + 1e-9 && trial.guess() >= self.g - 1e-12 {
                        let v = self.ascend(&mut trial);
                        if v > value + 1e-9 {
                            pt = trial;
                            value = v;
                            continue 'outer;
                        }
                    }
                }
            }
            break;
        }
        let model = self.finish(&pt);
        let value = self.certify(&model)?;
        Some((value, model))
    }

    fn finish(&self, pt: &Point) -> HiddenVariableModel<f64> {
        let g_now = pt.guess();
        let t = if g_now > self.g && g_now > 0.5 {
            (g_now - self.g) / (g_now - 0.5)
        } else {
            0.0
        };
        let components = (0..pt.len())
            .map(|l| {
                let settings = if pt.w[l] > TINY_WEIGHT {
                    SettingsDistribution::new(self.cap_settings(pt, l))
                } else {
                    SettingsDistribution::uniform()
                };
                let weight = if pt.w[l] > TINY_WEIGHT { pt.w[l] } else { 0.0 };
                Component {
                    weight,
                    settings,
                    chsh_box: pt.boxes[l].mix_pr(t).to_box(),
                }
            })
            .collect();
        HiddenVariableModel::new(components)
    }

    /// Pulls a settings distribution toward uniform just enough to undo
    /// rounding above `P`; the shift in joint weight stays at rounding level.
    fn cap_settings(&self, pt: &Point, l: usize) -> [f64; 4] {
        let q = pt.q[l];
        let top = q.iter().cloned().fold(0.0, f64::max);
        if top <= self.p {
            return q;
        }
        match self.mode {
            Mode::Ns => {
                let s = (top - self.p) / (top - 0.25);
                q.map(|x| (1.0 - s) * x + s * 0.25)
            }
            Mode::Fac => {
                // Shrinking the larger factor toward 1/2 keeps the product form.
                let (mut a, mut b) = (pt.alpha[l], pt.beta[l]);
                let (ma, mb) = (a[0].max(a[1]), b[0].max(b[1]));
                let pull = |d: [f64; 2], m: f64, target: f64| -> [f64; 2] {
                    let s = ((m - target.max(0.5)) / (m - 0.5)).clamp(0.0, 1.0);
                    d.map(|x| (1.0 - s) * x + s * 0.5)
                };
                if ma >= mb {
                    a = pull(a, ma, self.p / mb);
                } else {
                    b = pull(b, mb, self.p / ma);
                }
                [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
            }
        }
    }

    /// Observed `S` of a model that meets every constraint, else `None`.
    fn certify(&self, model: &HiddenVariableModel<f64>) -> Option<f64> {
        let tol = self.opts.feasibility_tol;
        model.check(tol).ok()?;
        if (guessing_probability(model) - self.g).abs() > tol || free_will_parameter(model) > self.p + tol {
            return None;
        }
        if self.mode == Mode::Fac
            && model
                .components
                .iter()
                .any(|c| c.weight > 0.0 && !c.settings.is_factorizable(tol))
        {
            return None;
        }
        observed_s(model, tol).ok()
    }
}

fn extremal_box(i: usize) -> ChshBox<f64> {
    if i < 16 {
        DeterministicStrategy::from_index(i).to_box()
    } else {
        let (al, be, ga) = (i & 1, (i >> 1) & 1, (i >> 2) & 1);
        ChshBox::from_fn(|a, b, j, k| {
            if (a ^ b) == ((j & k) ^ (al & j) ^ (be & k) ^ ga) {
                0.5
            } else {
                0.0
            }
        })
    }
}

/// Multi-start maximization of the observed CHSH value over models with
/// guessing probability `g` and free-will parameter at most `p`.
///
/// Restarts run in parallel, each on its own `(seed, restart)` stream; ties
/// in the final maximum go to the lowest restart index, so the result is a
/// pure function of the arguments.
pub fn maximize_s(mode: Mode, g: f64, p: f64, opts: &OracleOptions) -> Result<OracleOutcome> {
    if !(0.5..=1.0).contains(&g) {
        return Err(domain_err!("guessing probability {g} outside [1/2, 1]"));
    }
    if !(0.25..=1.0).contains(&p) {
        return Err(domain_err!("free-will parameter {p} outside [1/4, 1]"));
    }
    if opts.components < 4 {
        return Err(domain_err!("at least 4 components required, got {}", opts.components));
    }
    if opts.restarts == 0 {
        return Err(domain_err!("at least one restart required"));
    }
    let search = Search {
        mode,
        g,
        p,
        opts: *opts,
    };
    let runs: Vec<Option<(f64, HiddenVariableModel<f64>)>> =
        (0..opts.restarts).into_par_iter().map(|r| search.run(r)).collect();
    let feasible_restarts = runs.iter().filter(|r| r.is_some()).count();
    let best = runs
        .into_iter()
        .flatten()
        .fold(None, |best: Option<(f64, HiddenVariableModel<f64>)>, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        });
    Ok(match best {
        Some((value, model)) => OracleOutcome {
            value,
            feasible: true,
            feasible_restarts,
            model: Some(model),
        },
        None => OracleOutcome {
            value: f64::NAN,
            feasible: false,
            feasible_restarts,
            model: None,
        },
    })
}

pub fn maximize_s_ns(g: f64, p: f64, components: usize, restarts: usize, seed: u64) -> Result<OracleOutcome> {
    maximize_s(
        Mode::Ns,
        g,
        p,
        &OracleOptions {
            components,
            restarts,
            seed,
            ..Default::default()
        },
    )
}

pub fn maximize_s_fac(g: f64, p: f64, components: usize, restarts: usize, seed: u64) -> Result<OracleOutcome> {
    maximize_s(
        Mode::Fac,
        g,
        p,
        &OracleOptions {
            components,
            restarts,
            seed,
            ..Default::default()
        },
    )
}

/// Runs the oracle at `(g, p)` and compares it with the closed-form bound.
pub fn oracle_report(mode: Mode, g: f64, p: f64, opts: &OracleOptions) -> Result<OracleReport> {
    let (closed, _) = mode.s_max(g, p)?;
    let out = maximize_s(mode, g, p, opts)?;
    Ok(OracleReport {
        mode,
        g,
        p,
        bound_closed_form: closed,
        bound_oracle: out.value,
        gap: closed - out.value,
        restarts: opts.restarts,
        seed: opts.seed,
        components: opts.components,
        feasible: out.feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{s_max_fac, s_max_ns};

    #[test]
    fn strategies_are_distinct() {
        let all = DeterministicStrategy::all();
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 16);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.index(), i);
            let b: ChshBox<f64> = s.to_box();
            assert_eq!(b.correlator(1, 0), s.correlator(1, 0));
        }
    }

    #[test]
    fn deterministic_lp_examples() {
        assert!((lp_deterministic_max_s(0.25).unwrap() - 2.0).abs() < 1e-9);
        assert!((lp_deterministic_max_s(0.3).unwrap() - 3.2).abs() < 1e-9);
        assert!((lp_deterministic_max_s(1.0 / 3.0).unwrap() - 4.0).abs() < 1e-9);
        assert!((lp_deterministic_max_s(0.8).unwrap() - 4.0).abs() < 1e-9);
        assert!(lp_deterministic_max_s(0.2).is_err());
    }

    #[test]
    fn deterministic_lp_relabeling_symmetry() {
        for &p in &[0.25, 0.27, 0.3, 0.32, 0.5] {
            let base = lp_deterministic_max_s(p).unwrap();
            for (fa, fb) in [(true, false), (false, true), (true, true)] {
                let v = relabeled_deterministic_lp(p, fa, fb)
                    .unwrap()
                    .solve()
                    .unwrap()
                    .objective;
                assert!((v - base).abs() < 1e-9, "P={p} flips=({fa},{fb}): {v} vs {base}");
            }
        }
    }

    #[test]
    fn deterministic_lp_ignores_variable_order() {
        let p = 0.29;
        let lp = deterministic_lp(p).unwrap();
        // Reverse the strategy order.
        let perm: Vec<usize> = (0..64).map(|v| 4 * (15 - v / 4) + v % 4).collect();
        let mut permuted = LpProblem::new(64);
        for (v, &pv) in perm.iter().enumerate() {
            permuted.objective[pv] = lp.objective[v];
        }
        for c in lp.constraints.iter().rev() {
            let mut row = vec![0.0; 64];
            for v in 0..64 {
                row[perm[v]] = c.coeffs[v];
            }
            permuted.add(row, c.relation, c.rhs);
        }
        let a = lp.solve().unwrap().objective;
        let b = permuted.solve().unwrap().objective;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ns_oracle_examples() {
        let out = maximize_s_ns(1.0, 0.25, 4, 100, 7).unwrap();
        assert!(out.feasible);
        assert!((out.value - 2.0).abs() < 1e-3, "{}", out.value);

        let out = maximize_s_ns(0.75, 0.28, 4, 100, 7).unwrap();
        assert!((out.value - 3.36).abs() < 1e-3, "{}", out.value);

        let out = maximize_s_ns(0.9, 0.3, 4, 100, 7).unwrap();
        let bound = s_max_ns(0.9, 0.3).unwrap().0;
        assert!(out.value <= bound + 1e-6, "{} > {bound}", out.value);
    }

    #[test]
    fn fac_oracle_examples() {
        let out = maximize_s_fac(1.0, 0.4, 4, 100, 7).unwrap();
        assert!((out.value - 3.2).abs() < 1e-3, "{}", out.value);
        let out = maximize_s_fac(0.8, 0.45, 4, 100, 7).unwrap();
        assert!((out.value - 3.76).abs() < 1e-3, "{}", out.value);
        let bound = s_max_fac(0.8, 0.45).unwrap().0;
        assert!(out.value <= bound + 1e-6);
    }

    #[test]
    fn returned_model_meets_constraints() {
        let out = maximize_s_fac(0.7, 0.35, 4, 20, 3).unwrap();
        let m = out.model.unwrap();
        m.check(1e-9).unwrap();
        assert!((guessing_probability(&m) - 0.7).abs() < 1e-9);
        assert!(free_will_parameter(&m) <= 0.35 + 1e-9);
        assert!(m
            .components
            .iter()
            .all(|c| c.weight == 0.0 || c.settings.is_factorizable(1e-9)));
        assert_eq!(observed_s(&m, 1e-9).unwrap(), out.value);
    }

    #[test]
    fn oracle_is_reproducible() {
        let a = maximize_s_ns(0.8, 0.3, 4, 8, 11).unwrap();
        let b = maximize_s_ns(0.8, 0.3, 4, 8, 11).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn more_components_do_not_beat_the_bound() {
        let out = maximize_s_ns(0.8, 0.29, 7, 30, 5).unwrap();
        assert!(out.value <= s_max_ns(0.8, 0.29).unwrap().0 + 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(maximize_s_ns(0.4, 0.3, 4, 1, 0).is_err());
        assert!(maximize_s_ns(0.8, 0.2, 4, 1, 0).is_err());
        assert!(maximize_s_ns(0.8, 0.3, 3, 1, 0).is_err());
    }

    #[test]
    fn report_json_fields() {
        let opts = OracleOptions {
            restarts: 4,
            ..Default::default()
        };
        let r = oracle_report(Mode::Ns, 1.0, 0.3, &opts).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["G", "P", "bound_closed_form", "bound_oracle", "gap", "restarts", "seed"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert!(r.is_sound(1e-6));
    }
}
