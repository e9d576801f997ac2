//! Two-qubit strategies for CHSH games with biased setting distributions.
//!
//! Observables are dichotomic, `n·σ` for a unit Bloch vector `n`. Expectation
//! values are computed with explicit 4×4 complex arithmetic rather than the
//! Bloch-vector shortcuts, so the closed forms in [`crate::bounds`] are checked
//! against an independent evaluation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{alpha_opt, BiasedDistribution};
use crate::error::{domain_err, validation_err, Result};

type C = Complex64;
type Mat2 = [[C; 2]; 2];

const UNIT_TOL: f64 = 1e-12;

const fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

const IDENTITY: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];

/// Pauli matrices X, Y, Z.
const PAULI: [Mat2; 3] = [
    [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
    [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
];

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Dichotomic observable `n·σ` with eigenvalues ±1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Observable {
    bloch: [f64; 3],
}

impl TryFrom<[f64; 3]> for Observable {
    type Error = crate::Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Observable::new(v)
    }
}

impl From<Observable> for [f64; 3] {
    fn from(o: Observable) -> Self {
        o.bloch
    }
}

impl Observable {
    pub const X: Observable = Observable { bloch: [1.0, 0.0, 0.0] };
    pub const Z: Observable = Observable { bloch: [0.0, 0.0, 1.0] };

    /// Requires a unit Bloch vector.
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let n = norm3(bloch);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(validation_err!("Bloch vector norm {n} is not 1"));
        }
        Ok(Observable { bloch })
    }

    /// Normalizes `v`, which must be nonzero.
    pub fn from_direction(v: [f64; 3]) -> Result<Self> {
        let n = norm3(v);
        if n < 1e-300 {
            return Err(validation_err!("zero Bloch direction"));
        }
        Ok(Observable {
            bloch: v.map(|x| x / n),
        })
    }

    /// `X cos θ + Z sin θ`.
    pub fn in_xz_plane(theta: f64) -> Self {
        Observable {
            bloch: [theta.cos(), 0.0, theta.sin()],
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn matrix(&self) -> Mat2 {
        let mut m = [[C::new(0.0, 0.0); 2]; 2];
        for (coef, pauli) in self.bloch.iter().zip(PAULI.iter()) {
            for r in 0..2 {
                for col in 0..2 {
                    m[r][col] += pauli[r][col] * *coef;
                }
            }
        }
        m
    }
}

/// Pure two-qubit state in the basis `|00>, |01>, |10>, |11>` (Alice's qubit first).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    amps: [C; 4],
}

impl TwoQubitState {
    /// Requires unit norm; fixes the global phase so the first nonzero amplitude is real positive.
    pub fn new(amps: [C; 4]) -> Result<Self> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(validation_err!("state norm {n} is not 1"));
        }
        Ok(TwoQubitState { amps: fix_phase(amps) })
    }

    pub fn normalized(amps: [C; 4]) -> Result<Self> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-300 {
            return Err(validation_err!("zero state vector"));
        }
        Ok(TwoQubitState {
            amps: fix_phase(amps.map(|a| a / n)),
        })
    }

    /// `(|00> + |11>)/√2`.
    pub fn maximally_entangled() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        TwoQubitState {
            amps: [c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)],
        }
    }

    /// `cos θ |00> + sin θ |11>`.
    pub fn schmidt(theta: f64) -> Result<Self> {
        Self::new([c(theta.cos(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(theta.sin(), 0.0)])
    }

    pub fn product_00() -> Self {
        TwoQubitState {
            amps: [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        }
    }

    pub fn amplitudes(&self) -> [C; 4] {
        self.amps
    }

    /// `<ψ| A ⊗ B |ψ>` for arbitrary 2×2 operators.
    #[allow(clippy::needless_range_loop)]
    pub fn expectation(&self, alice: &Mat2, bob: &Mat2) -> C {
        let mut acc = C::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                let bra = self.amps[2 * a + b].conj();
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        acc += bra * alice[a][a2] * bob[b][b2] * self.amps[2 * a2 + b2];
                    }
                }
            }
        }
        acc
    }
}

fn fix_phase(amps: [C; 4]) -> [C; 4] {
    match amps.iter().find(|a| a.norm() > UNIT_TOL) {
        Some(first) => {
            let phase = first.conj() / first.norm();
            amps.map(|a| a * phase)
        }
        None => amps,
    }
}

fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for col in 0..2 {
            m[r][col] = x[r][0] * y[0][col] + x[r][1] * y[1][col];
        }
    }
    m
}

fn mat_add(x: &Mat2, y: &Mat2) -> Mat2 {
    std::array::from_fn(|r| std::array::from_fn(|col| x[r][col] + y[r][col]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumStrategy {
    pub state: TwoQubitState,
    /// Alice's observables `A_0, A_1`.
    pub alice: [Observable; 2],
    /// Bob's observables `B_0, B_1`.
    pub bob: [Observable; 2],
    /// Angle between Bob's Bloch vectors, `β ∈ [0, π]`, so that `2 cos β = α`.
    pub beta: f64,
}

impl QuantumStrategy {
    pub fn new(state: TwoQubitState, alice: [Observable; 2], bob: [Observable; 2]) -> Self {
        let beta = dot3(bob[0].bloch, bob[1].bloch).clamp(-1.0, 1.0).acos();
        QuantumStrategy {
            state,
            alice,
            bob,
            beta,
        }
    }

    /// Correlator `<ψ| A_j ⊗ B_k |ψ>` (complex; the imaginary part is rounding).
    pub fn correlator(&self, j: usize, k: usize) -> C {
        self.state.expectation(&self.alice[j].matrix(), &self.bob[k].matrix())
    }

    /// `α = <ψ| I ⊗ (B0 B1 + B1 B0) |ψ>`.
    pub fn anticommutator(&self) -> C {
        let (b0, b1) = (self.bob[0].matrix(), self.bob[1].matrix());
        self.state
            .expectation(&IDENTITY, &mat_add(&mat_mul(&b0, &b1), &mat_mul(&b1, &b0)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StrategyDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: StrategyDocument = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// JSON layout: amplitudes as `(re, im)` pairs plus four Bloch vectors.
#[derive(Serialize, Deserialize)]
struct StrategyDocument {
    state: [[f64; 2]; 4],
    a0: Observable,
    a1: Observable,
    b0: Observable,
    b1: Observable,
    beta: f64,
}

impl From<&QuantumStrategy> for StrategyDocument {
    fn from(s: &QuantumStrategy) -> Self {
        StrategyDocument {
            state: s.state.amps.map(|a| [a.re, a.im]),
            a0: s.alice[0],
            a1: s.alice[1],
            b0: s.bob[0],
            b1: s.bob[1],
            beta: s.beta,
        }
    }
}

impl TryFrom<StrategyDocument> for QuantumStrategy {
    type Error = crate::Error;

    fn try_from(d: StrategyDocument) -> Result<Self> {
        let state = TwoQubitState::new(d.state.map(|[re, im]| c(re, im)))?;
        Ok(QuantumStrategy::new(state, [d.a0, d.a1], [d.b0, d.b1]))
    }
}

fn signed_value(s: &QuantumStrategy, dist: &BiasedDistribution<f64>) -> C {
    let mut acc = C::new(0.0, 0.0);
    for j in 0..2 {
        for k in 0..2 {
            let sign = if j & k == 1 { -1.0 } else { 1.0 };
            acc += s.correlator(j, k) * (sign * dist.get(j, k));
        }
    }
    acc * 4.0
}

/// `S_Q = 4·|Σ (-1)^{jk} p_jk <ψ| A_j ⊗ B_k |ψ>|`.
pub fn evaluate_strategy(s: &QuantumStrategy, dist: &BiasedDistribution<f64>) -> f64 {
    signed_value(s, dist).re.abs()
}

/// Largest Born-rule marginal over both parties, both settings and both outcomes.
pub fn strategy_guessing_probability(s: &QuantumStrategy) -> f64 {
    let mut best: f64 = 0.0;
    for obs in s.alice {
        let ev = s.state.expectation(&obs.matrix(), &IDENTITY).re;
        best = best.max((1.0 + ev) / 2.0).max((1.0 - ev) / 2.0);
    }
    for obs in s.bob {
        let ev = s.state.expectation(&IDENTITY, &obs.matrix()).re;
        best = best.max((1.0 + ev) / 2.0).max((1.0 - ev) / 2.0);
    }
    best
}

/// Maximally entangled strategy saturating the biased Tsirelson-type bound.
///
/// Bob measures `X` and `X cos β + Z sin β` with `2 cos β = α_opt`; Alice
/// measures along the normalized directions of `p00 B0 + p01 B1` and
/// `p10 B0 - p11 B1`.
pub fn optimal_settings(dist: &BiasedDistribution<f64>) -> Result<QuantumStrategy> {
    let alpha = alpha_opt(dist)?;
    if alpha.abs() >= 2.0 {
        return Err(domain_err!(
            "|α| = {} ≥ 2: no entangled strategy beats the deterministic value 4 - 8·p_min for this distribution",
            alpha.abs()
        ));
    }
    let cos_b = alpha / 2.0;
    let sin_b = (1.0 - cos_b * cos_b).sqrt();
    let [p00, p01, p10, p11] = dist.as_array();
    let a0 = Observable::from_direction([p00 + p01 * cos_b, 0.0, p01 * sin_b])?;
    let a1 = Observable::from_direction([p10 - p11 * cos_b, 0.0, -p11 * sin_b])?;
    let b1 = Observable::new([cos_b, 0.0, sin_b])?;
    Ok(QuantumStrategy::new(
        TwoQubitState::maximally_entangled(),
        [a0, a1],
        [Observable::X, b1],
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct SeeSawOptions {
    /// Stop when a full sweep improves the signed value by less than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Power-iteration steps for the state update within one sweep.
    pub power_steps: usize,
}

impl Default for SeeSawOptions {
    fn default() -> Self {
        SeeSawOptions {
            tolerance: 1e-12,
            max_sweeps: 20_000,
            power_steps: 8,
        }
    }
}

/// Correlation tensor `T_il = <ψ| σ_i ⊗ σ_l |ψ>`.
fn correlation_tensor(state: &TwoQubitState) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|l| state.expectation(&PAULI[i], &PAULI[l]).re))
}

/// `(H + I)ψ` for the Bell operator `H = Σ (-1)^{jk} p_jk A_j ⊗ B_k`, whose
/// spectrum lies in `[-1, 1]`.
fn shifted_bell_apply(s: &QuantumStrategy, dist: &BiasedDistribution<f64>, psi: &[C; 4]) -> [C; 4] {
    let mut out = *psi;
    for j in 0..2 {
        let am = s.alice[j].matrix();
        for k in 0..2 {
            let bm = s.bob[k].matrix();
            let w = if j & k == 1 { -dist.get(j, k) } else { dist.get(j, k) };
            for a in 0..2 {
                for b in 0..2 {
                    let mut v = C::new(0.0, 0.0);
                    for a2 in 0..2 {
                        for b2 in 0..2 {
                            v += am[a][a2] * bm[b][b2] * psi[2 * a2 + b2];
                        }
                    }
                    out[2 * a + b] += v * w;
                }
            }
        }
    }
    out
}

/// Monotone block-coordinate ascent on the signed CHSH value: each block
/// (Bob's Bloch vectors, Alice's Bloch vectors, the state) is replaced by its
/// best response to the others.
pub fn see_saw(start: QuantumStrategy, dist: &BiasedDistribution<f64>, opts: &SeeSawOptions) -> QuantumStrategy {
    let sgn = |j: usize, k: usize| if j & k == 1 { -dist.get(j, k) } else { dist.get(j, k) };
    let mut s = start;
    let mut value = signed_value(&s, dist).re;
    for _ in 0..opts.max_sweeps {
        let t = correlation_tensor(&s.state);
        for k in 0..2 {
            let mut v = [0.0; 3];
            for j in 0..2 {
                let a = s.alice[j].bloch;
                for (l, vl) in v.iter_mut().enumerate() {
                    *vl += sgn(j, k) * (0..3).map(|i| a[i] * t[i][l]).sum::<f64>();
                }
            }
            if let Ok(o) = Observable::from_direction(v) {
                s.bob[k] = o;
            }
        }
        for j in 0..2 {
            let mut v = [0.0; 3];
            for k in 0..2 {
                let b = s.bob[k].bloch;
                for (i, vi) in v.iter_mut().enumerate() {
                    *vi += sgn(j, k) * (0..3).map(|l| t[i][l] * b[l]).sum::<f64>();
                }
            }
            if let Ok(o) = Observable::from_direction(v) {
                s.alice[j] = o;
            }
        }
        let mut psi = s.state.amps;
        for _ in 0..opts.power_steps {
            psi = shifted_bell_apply(&s, dist, &psi);
            let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            psi = psi.map(|a| a / n);
        }
        s.state = TwoQubitState { amps: fix_phase(psi) };
        let next = signed_value(&s, dist).re;
        let improved = next - value;
        value = next;
        if improved < opts.tolerance {
            break;
        }
    }
    QuantumStrategy::new(s.state, s.alice, s.bob)
}

fn random_unit<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if norm3(v) > 1e-6 {
            let n = norm3(v);
            return v.map(|x| x / n);
        }
    }
}

fn random_strategy<R: Rng>(rng: &mut R) -> QuantumStrategy {
    let amps: [C; 4] = std::array::from_fn(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let state = TwoQubitState::normalized(amps).unwrap_or_else(|_| TwoQubitState::maximally_entangled());
    let obs = |rng: &mut R| Observable {
        bloch: random_unit(rng),
    };
    let alice = [obs(rng), obs(rng)];
    let bob = [obs(rng), obs(rng)];
    QuantumStrategy::new(state, alice, bob)
}

/// Independent RNG stream for one restart.
pub(crate) fn restart_rng(seed: u64, restart: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    rng
}

/// `count` setting distributions drawn uniformly from the probability simplex.
pub fn random_distributions(count: usize, seed: u64) -> Vec<BiasedDistribution<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.random::<f64>()).ln());
            let t: f64 = e.iter().sum();
            if let Ok(d) = BiasedDistribution::new(e.map(|v| v / t), 1e-12) {
                break d;
            }
        })
        .collect()
}

/// Multi-start see-saw maximization of [`evaluate_strategy`] over pure
/// two-qubit states and arbitrary Bloch vectors. Each restart starts from a
/// random state and random observables drawn from its own `(seed, restart)`
/// stream, so the result does not depend on thread scheduling.
pub fn optimize_strategy_numeric(dist: &BiasedDistribution<f64>, restarts: usize, seed: u64) -> (f64, QuantumStrategy) {
    optimize_strategy_with(dist, restarts, seed, &SeeSawOptions::default())
}

pub fn optimize_strategy_with(
    dist: &BiasedDistribution<f64>,
    restarts: usize,
    seed: u64,
    opts: &SeeSawOptions,
) -> (f64, QuantumStrategy) {
    let restarts = restarts.max(1);
    (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = restart_rng(seed, r);
            let s = see_saw(random_strategy(&mut rng), dist, opts);
            (evaluate_strategy(&s, dist), r, s)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .map(|(v, _, s)| (v, s))
        .expect("at least one restart")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::s_q_max_dist;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn dist(p: [f64; 4]) -> BiasedDistribution<f64> {
        BiasedDistribution::new(p, 1e-12).unwrap()
    }

    fn tsirelson() -> QuantumStrategy {
        let h = FRAC_1_SQRT_2;
        QuantumStrategy::new(
            TwoQubitState::maximally_entangled(),
            [
                Observable::new([h, 0.0, h]).unwrap(),
                Observable::new([h, 0.0, -h]).unwrap(),
            ],
            [Observable::X, Observable::Z],
        )
    }

    #[test]
    fn uniform_optimal_settings_are_tsirelson() {
        let s = optimal_settings(&BiasedDistribution::uniform()).unwrap();
        assert!((s.beta - PI / 2.0).abs() < 1e-15);
        let t = tsirelson();
        for j in 0..2 {
            for (x, y) in s.alice[j].bloch().iter().zip(t.alice[j].bloch()) {
                assert!((x - y).abs() < 1e-15);
            }
            for (x, y) in s.bob[j].bloch().iter().zip(t.bob[j].bloch()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
        assert!((evaluate_strategy(&t, &BiasedDistribution::uniform()) - 2.0 * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn optimal_family_saturation() {
        let d = BiasedDistribution::optimal_family(0.26).unwrap();
        let s = optimal_settings(&d).unwrap();
        let (bound, _) = s_q_max_dist(&d).unwrap();
        assert!((evaluate_strategy(&s, &d) - bound).abs() < 1e-9);
        assert!((strategy_guessing_probability(&s) - 0.5).abs() < 1e-12);
        assert!(optimal_settings(&BiasedDistribution::optimal_family(0.32).unwrap()).is_err());
    }

    #[test]
    fn guessing_probability_examples() {
        let s = QuantumStrategy::new(TwoQubitState::product_00(), [Observable::Z; 2], [Observable::Z; 2]);
        assert!((strategy_guessing_probability(&s) - 1.0).abs() < 1e-15);
        for theta in [0.1, 0.4, 0.9, 1.3] {
            let s = QuantumStrategy::new(
                TwoQubitState::schmidt(theta).unwrap(),
                [Observable::Z; 2],
                [Observable::Z; 2],
            );
            let expect = theta.cos().powi(2).max(theta.sin().powi(2));
            assert!((strategy_guessing_probability(&s) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn state_phase_and_norm() {
        let s = TwoQubitState::normalized([c(0.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let a = s.amplitudes();
        assert!(a[1].im.abs() < 1e-15 && a[1].re > 0.0);
        assert!(TwoQubitState::new([c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(Observable::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn strategy_json_roundtrip() {
        let s = optimal_settings(&dist([0.3, 0.2, 0.25, 0.25])).unwrap();
        let back = QuantumStrategy::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.alice, s.alice);
        assert_eq!(back.bob, s.bob);
        assert_eq!(back.state, s.state);
        let v: serde_json::Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(v["state"][0].as_array().unwrap().len(), 2);
        assert_eq!(v["b0"], serde_json::json!([1.0, 0.0, 0.0]));
    }

    #[test]
    fn numeric_optimizer_examples() {
        let (v, _) = optimize_strategy_numeric(&BiasedDistribution::uniform(), 50, 7);
        assert!((v - 2.0 * SQRT_2).abs() < 1e-6, "{v}");

        let p = 0.32;
        let (v, _) = optimize_strategy_numeric(&BiasedDistribution::optimal_family(p).unwrap(), 50, 7);
        assert!(v <= 24.0 * p - 4.0 + 1e-6, "{v}");
        assert!(v >= 24.0 * p - 4.0 - 1e-4, "{v}");
    }

    #[test]
    fn numeric_optimizer_is_deterministic() {
        let d = dist([0.4, 0.3, 0.2, 0.1]);
        let (v1, s1) = optimize_strategy_numeric(&d, 8, 99);
        let (v2, s2) = optimize_strategy_numeric(&d, 8, 99);
        assert_eq!(v1.to_bits(), v2.to_bits());
        assert_eq!(s1, s2);
    }

    fn arb_dist() -> impl Strategy<Value = BiasedDistribution<f64>> {
        prop::array::uniform4(0.02f64..1.0).prop_map(|q| {
            let t: f64 = q.iter().sum();
            BiasedDistribution::new(q.map(|v| v / t), 1e-12).unwrap()
        })
    }

    fn arb_strategy() -> impl Strategy<Value = QuantumStrategy> {
        any::<u64>().prop_map(|seed| random_strategy(&mut restart_rng(seed, 0)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn optimal_settings_saturate_bound(d in arb_dist()) {
            prop_assume!(alpha_opt(&d).unwrap().abs() < 2.0);
            let s = optimal_settings(&d).unwrap();
            let (bound, _) = s_q_max_dist(&d).unwrap();
            prop_assert!((evaluate_strategy(&s, &d) - bound).abs() <= 1e-9);
            let alpha = alpha_opt(&d).unwrap();
            let anti = s.anticommutator();
            prop_assert!((anti.re - alpha).abs() <= 1e-12 && anti.im.abs() <= 1e-12);
            prop_assert!((2.0 * s.beta.cos() - alpha).abs() <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn correlators_are_real(s in arb_strategy()) {
            for j in 0..2 {
                for k in 0..2 {
                    prop_assert!(s.correlator(j, k).im.abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn product_states_stay_local(a in prop::array::uniform4(any::<u64>()), d in arb_dist()) {
            let mut rng = restart_rng(a[0], a[1]);
            let alice = [Observable { bloch: random_unit(&mut rng) }, Observable { bloch: random_unit(&mut rng) }];
            let bob = [Observable { bloch: random_unit(&mut rng) }, Observable { bloch: random_unit(&mut rng) }];
            let s = QuantumStrategy::new(TwoQubitState::product_00(), alice, bob);
            prop_assert!(evaluate_strategy(&s, &BiasedDistribution::uniform()) <= 2.0 + 1e-12);
            prop_assert!(evaluate_strategy(&s, &d) <= crate::bounds::s_deterministic_dist(&d) + 1e-12);
        }

        #[test]
        fn see_saw_is_monotone(seed in any::<u64>(), d in arb_dist()) {
            let start = random_strategy(&mut restart_rng(seed, 3));
            let before = signed_value(&start, &d).re;
            let after = signed_value(&see_saw(start, &d, &SeeSawOptions::default()), &d).re;
            prop_assert!(after >= before - 1e-12);
            let (bound, _) = s_q_max_dist(&d).unwrap();
            prop_assert!(after <= bound + 1e-6);
        }
    }
}
