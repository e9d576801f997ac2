//! No-signalling hidden-variable models for the two-party, two-setting,
//! two-outcome CHSH scenario.
//!
//! A model is a finite list of components, one per value of the hidden variable
//! `λ`. Each component carries its weight `ρ(λ)`, the settings distribution
//! `p(A_j, B_k | λ)` that `λ` imposes on the parties, and the conditional
//! outcome box `p̃(a, b | A_j, B_k, λ)`.

use serde::{Deserialize, Serialize};

use crate::error::{validation_err, Error, Result};
use crate::scalar::{abs, max, Scalar};

/// Outcome-table tolerance used when callers do not configure one.
pub const DEFAULT_TOL: f64 = 1e-9;

pub fn default_tol<T: Scalar>() -> T {
    T::from_f64_lossy(DEFAULT_TOL)
}

/// `(-1)^x` for a bit or bit product.
#[inline]
pub(crate) fn sign<T: Scalar>(bit: usize) -> T {
    if bit & 1 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

#[inline]
pub(crate) const fn setting_index(j: usize, k: usize) -> usize {
    2 * j + k
}

#[inline]
const fn box_index(a: usize, b: usize, j: usize, k: usize) -> usize {
    4 * setting_index(j, k) + 2 * a + b
}

/// Conditional outcome table `p̃(a, b | A_j, B_k)` for one hidden-variable value.
///
/// Stored as four rows, one per setting pair `(j, k)` in the order
/// `(0,0), (0,1), (1,0), (1,1)`; each row lists `(a, b) = (0,0), (0,1), (1,0), (1,1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    from = "[[T; 4]; 4]",
    into = "[[T; 4]; 4]",
    bound(serialize = "T: Serialize + Copy", deserialize = "T: Deserialize<'de> + Copy")
)]
pub struct ChshBox<T> {
    p: [T; 16],
}

impl<T: Copy> From<[[T; 4]; 4]> for ChshBox<T> {
    fn from(rows: [[T; 4]; 4]) -> Self {
        let mut p = [rows[0][0]; 16];
        for (s, row) in rows.iter().enumerate() {
            p[4 * s..4 * s + 4].copy_from_slice(row);
        }
        ChshBox { p }
    }
}

impl<T: Copy> From<ChshBox<T>> for [[T; 4]; 4] {
    fn from(b: ChshBox<T>) -> Self {
        std::array::from_fn(|s| std::array::from_fn(|ab| b.p[4 * s + ab]))
    }
}

impl<T: Scalar> ChshBox<T> {
    pub fn from_rows(rows: [[T; 4]; 4]) -> Self {
        rows.into()
    }

    pub fn rows(&self) -> [[T; 4]; 4] {
        (*self).into()
    }

    /// Builds a box from a function of `(a, b, j, k)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut p = [T::zero(); 16];
        for j in 0..2 {
            for k in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        p[box_index(a, b, j, k)] = f(a, b, j, k);
                    }
                }
            }
        }
        ChshBox { p }
    }

    /// The PR box: `p(a,b|j,k) = 1/2` iff `a ⊕ b = j·k`.
    pub fn pr_box() -> Self {
        Self::from_fn(|a, b, j, k| if (a ^ b) == (j & k) { T::half() } else { T::zero() })
    }

    pub fn uniform() -> Self {
        Self::from_fn(|_, _, _, _| T::quarter())
    }

    /// Local deterministic box with outputs `a = alice[j]`, `b = bob[k]`.
    pub fn deterministic(alice: [usize; 2], bob: [usize; 2]) -> Self {
        Self::from_fn(|a, b, j, k| {
            if a == alice[j] && b == bob[k] {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Box with marginals `m_j = p^A(0|j)`, `n_k = p^B(0|k)` and `c_jk = p(0,0|j,k)`.
    pub fn from_marginals(m: [T; 2], n: [T; 2], c: [T; 4]) -> Self {
        Self::from_fn(|a, b, j, k| {
            let c = c[setting_index(j, k)];
            match (a, b) {
                (0, 0) => c,
                (0, 1) => m[j] - c,
                (1, 0) => n[k] - c,
                _ => T::one() + c - m[j] - n[k],
            }
        })
    }

    #[inline]
    pub fn prob(&self, a: usize, b: usize, j: usize, k: usize) -> T {
        self.p[box_index(a, b, j, k)]
    }

    pub fn entries(&self) -> &[T; 16] {
        &self.p
    }

    /// Outcome correlator `E(j,k) = Σ_{a,b} (-1)^{a+b} p(a,b|j,k)`.
    pub fn correlator(&self, j: usize, k: usize) -> T {
        let mut e = T::zero();
        for a in 0..2 {
            for b in 0..2 {
                e = e + sign::<T>(a + b) * self.prob(a, b, j, k);
            }
        }
        e
    }

    /// Alice's marginal `p^A(a|A_j)` read off at Bob's setting `k`.
    pub fn alice_marginal_at(&self, a: usize, j: usize, k: usize) -> T {
        self.prob(a, 0, j, k) + self.prob(a, 1, j, k)
    }

    pub fn bob_marginal_at(&self, b: usize, j: usize, k: usize) -> T {
        self.prob(0, b, j, k) + self.prob(1, b, j, k)
    }

    /// `m_j = p^A(0|A_j)`. Only meaningful for no-signalling boxes.
    pub fn m(&self, j: usize) -> T {
        self.alice_marginal_at(0, j, 0)
    }

    /// `n_k = p^B(0|B_k)`. Only meaningful for no-signalling boxes.
    pub fn n(&self, k: usize) -> T {
        self.bob_marginal_at(0, 0, k)
    }

    /// Largest of the eight single-party marginal values `{m_j, 1-m_j, n_k, 1-n_k}`.
    pub fn local_guessing_probability(&self) -> T {
        let mut g = T::zero();
        for x in 0..2 {
            for v in [self.m(x), self.n(x)] {
                g = max(g, max(v, T::one() - v));
            }
        }
        g
    }

    /// `(1 - t)·self + t·other`.
    pub fn mix(&self, other: &Self, t: T) -> Self {
        let mut p = self.p;
        for (x, y) in p.iter_mut().zip(other.p.iter()) {
            *x = (T::one() - t) * *x + t * *y;
        }
        ChshBox { p }
    }

    pub fn validate(&self, tol: T) -> Result<()> {
        for (i, &v) in self.p.iter().enumerate() {
            if v < -tol {
                return Err(validation_err!("negative box entry {:?} at index {i}", v));
            }
        }
        for j in 0..2 {
            for k in 0..2 {
                let total = (0..4).fold(T::zero(), |acc, ab| acc + self.p[4 * setting_index(j, k) + ab]);
                if abs(total - T::one()) > tol {
                    return Err(validation_err!("box row (j={j}, k={k}) sums to {:?}", total));
                }
            }
        }
        for x in 0..2 {
            for o in 0..2 {
                let alice = abs(self.alice_marginal_at(o, x, 0) - self.alice_marginal_at(o, x, 1));
                if alice > tol {
                    return Err(validation_err!(
                        "signalling: Alice's marginal p(a={o}|A_{x}) depends on Bob's setting"
                    ));
                }
                let bob = abs(self.bob_marginal_at(o, 0, x) - self.bob_marginal_at(o, 1, x));
                if bob > tol {
                    return Err(validation_err!(
                        "signalling: Bob's marginal p(b={o}|B_{x}) depends on Alice's setting"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// CHSH value `|Σ (-1)^{a+b+jk} p(a,b|j,k)|` of a single box.
pub fn chsh_of_box<T: Scalar>(b: &ChshBox<T>, tol: T) -> Result<T> {
    b.validate(tol)?;
    Ok(abs(signed_chsh(b)))
}

fn signed_chsh<T: Scalar>(b: &ChshBox<T>) -> T {
    let mut s = T::zero();
    for j in 0..2 {
        for k in 0..2 {
            s = s + sign::<T>(j * k) * b.correlator(j, k);
        }
    }
    s
}

/// `K = |m0-n0| + |m0-n1| + |m1-n0| + |m1+n1-1|`, which dominates `2G(λ) - 1`.
pub fn proof_quantity_k<T: Scalar>(b: &ChshBox<T>) -> T {
    let (m0, m1, n0, n1) = (b.m(0), b.m(1), b.n(0), b.n(1));
    abs(m0 - n0) + abs(m0 - n1) + abs(m1 - n0) + abs(m1 + n1 - T::one())
}

/// Settings distribution `q(j,k) = p(A_j, B_k | λ)` in the order `q00, q01, q10, q11`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SettingsDistribution<T> {
    q: [T; 4],
}

impl<T: Scalar> SettingsDistribution<T> {
    pub fn new(q: [T; 4]) -> Self {
        SettingsDistribution { q }
    }

    pub fn uniform() -> Self {
        Self::new([T::quarter(); 4])
    }

    /// Product distribution `p^A(j)·p^B(k)` with `p^A(0) = alice0`, `p^B(0) = bob0`.
    pub fn product(alice0: T, bob0: T) -> Self {
        let a = [alice0, T::one() - alice0];
        let b = [bob0, T::one() - bob0];
        Self::new(std::array::from_fn(|s| a[s / 2] * b[s % 2]))
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> T {
        self.q[setting_index(j, k)]
    }

    pub fn as_array(&self) -> [T; 4] {
        self.q
    }

    pub fn max_entry(&self) -> T {
        self.q.iter().copied().fold(self.q[0], max)
    }

    pub fn validate(&self, tol: T) -> Result<()> {
        if let Some(v) = self.q.iter().find(|&&v| v < -tol) {
            return Err(validation_err!("negative settings probability {:?}", v));
        }
        let total = self.q.iter().fold(T::zero(), |acc, &v| acc + v);
        if abs(total - T::one()) > tol {
            return Err(validation_err!("settings distribution sums to {:?}", total));
        }
        Ok(())
    }

    /// Rank-one test `|q00·q11 - q01·q10| ≤ tol`.
    pub fn is_factorizable(&self, tol: T) -> bool {
        abs(self.q[0] * self.q[3] - self.q[1] * self.q[2]) <= tol
    }
}

pub fn is_factorizable<T: Scalar>(settings: &SettingsDistribution<T>, tol: T) -> bool {
    settings.is_factorizable(tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize + Copy", deserialize = "T: Deserialize<'de> + Copy"))]
pub struct Component<T> {
    pub weight: T,
    pub settings: SettingsDistribution<T>,
    #[serde(rename = "box")]
    pub chsh_box: ChshBox<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize + Copy", deserialize = "T: Deserialize<'de> + Copy"))]
pub struct HiddenVariableModel<T> {
    pub components: Vec<Component<T>>,
}

impl<T: Scalar> HiddenVariableModel<T> {
    pub fn new(components: Vec<Component<T>>) -> Self {
        HiddenVariableModel { components }
    }

    /// One component with weight one.
    pub fn single(settings: SettingsDistribution<T>, chsh_box: ChshBox<T>) -> Self {
        Self::new(vec![Component {
            weight: T::one(),
            settings,
            chsh_box,
        }])
    }

    pub fn total_weight(&self) -> T {
        self.components.iter().fold(T::zero(), |acc, c| acc + c.weight)
    }

    /// Observed input distribution `p(A_j, B_k) = Σ_λ ρ(λ) p(A_j, B_k | λ)`.
    pub fn input_distribution(&self) -> [T; 4] {
        let mut out = [T::zero(); 4];
        for c in &self.components {
            for (o, &q) in out.iter_mut().zip(c.settings.q.iter()) {
                *o = *o + c.weight * q;
            }
        }
        out
    }

    /// Bayes-mixed observed box `p̃(a,b|j,k) = Σ_λ ρ(λ|j,k) p̃(a,b|j,k,λ)`.
    pub fn observed_box(&self) -> Result<ChshBox<T>> {
        let inputs = self.input_distribution();
        if let Some(s) = inputs.iter().position(|v| *v <= T::zero()) {
            return Err(validation_err!("setting pair {s} never occurs; observed box undefined"));
        }
        Ok(ChshBox::from_fn(|a, b, j, k| {
            let s = setting_index(j, k);
            let joint = self.components.iter().fold(T::zero(), |acc, c| {
                acc + c.weight * c.settings.q[s] * c.chsh_box.prob(a, b, j, k)
            });
            joint / inputs[s]
        }))
    }

    fn check_uniform_inputs(&self, tol: T) -> Result<()> {
        let inputs = self.input_distribution();
        for (s, &v) in inputs.iter().enumerate() {
            if abs(v - T::quarter()) > tol {
                return Err(validation_err!(
                    "observed input probability for pair (j={}, k={}) is {:?}, expected 1/4",
                    s / 2,
                    s % 2,
                    v
                ));
            }
        }
        Ok(())
    }

    /// Runs every invariant check and returns the first failure.
    pub fn check(&self, tol: T) -> Result<()> {
        if self.components.is_empty() {
            return Err(validation_err!("model has no components"));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.weight < -tol || c.weight > T::one() + tol {
                return Err(validation_err!("component {i}: weight {:?} outside [0, 1]", c.weight));
            }
            c.settings.validate(tol).map_err(|e| prefix(i, e))?;
            c.chsh_box.validate(tol).map_err(|e| prefix(i, e))?;
        }
        let w = self.total_weight();
        if abs(w - T::one()) > tol {
            return Err(validation_err!("weights sum to {:?}", w));
        }
        self.check_uniform_inputs(tol)
    }
}

fn prefix(i: usize, e: Error) -> Error {
    match e {
        Error::Validation(m) => Error::Validation(format!("component {i}: {m}")),
        other => other,
    }
}

/// Signed sub-game sum `Σ_{λ,j,k} (-1)^{jk} ρ(λ) q_λ(j,k) E_λ(j,k)`, before the factor 4.
pub(crate) fn signed_subgame_sum<T: Scalar>(model: &HiddenVariableModel<T>) -> T {
    let mut s = T::zero();
    for c in &model.components {
        for j in 0..2 {
            for k in 0..2 {
                s = s + sign::<T>(j * k) * c.weight * c.settings.get(j, k) * c.chsh_box.correlator(j, k);
            }
        }
    }
    s
}

/// Observed CHSH value `4·|Σ (-1)^{jk} ρ(λ) q_λ(j,k) E_λ(j,k)|`.
///
/// Requires uniform observed inputs; otherwise the sub-game sum does not equal
/// the CHSH value of the observed statistics.
pub fn observed_s<T: Scalar>(model: &HiddenVariableModel<T>, tol: T) -> Result<T> {
    model.check_uniform_inputs(tol)?;
    let four = T::two() * T::two();
    Ok(four * abs(signed_subgame_sum(model)))
}

/// `G = Σ_λ ρ(λ) G(λ)`.
pub fn guessing_probability<T: Scalar>(model: &HiddenVariableModel<T>) -> T {
    model.components.iter().fold(T::zero(), |acc, c| {
        acc + c.weight * c.chsh_box.local_guessing_probability()
    })
}

/// `P = max_{λ: ρ(λ) > 0, j, k} p(A_j, B_k | λ)`.
pub fn free_will_parameter<T: Scalar>(model: &HiddenVariableModel<T>) -> T {
    model
        .components
        .iter()
        .filter(|c| c.weight > T::zero())
        .fold(T::zero(), |acc, c| max(acc, c.settings.max_entry()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelReport<T> {
    #[serde(rename = "S")]
    pub s: T,
    #[serde(rename = "G")]
    pub g: T,
    #[serde(rename = "P")]
    pub p: T,
    pub factorizable: bool,
    pub valid: bool,
    /// First failed invariant, if any.
    pub failure: Option<String>,
}

/// Validates `model` and aggregates `S`, `G`, `P` and settings factorizability.
///
/// `S` is reported from the sub-game sum even when the model is invalid, so a
/// report is always produced.
pub fn validate<T: Scalar>(model: &HiddenVariableModel<T>, tol: T) -> ModelReport<T> {
    let failure = model.check(tol).err().map(|e| e.to_string());
    let four = T::two() * T::two();
    ModelReport {
        s: four * abs(signed_subgame_sum(model)),
        g: guessing_probability(model),
        p: free_will_parameter(model),
        factorizable: model
            .components
            .iter()
            .filter(|c| c.weight > T::zero())
            .all(|c| c.settings.is_factorizable(tol)),
        valid: failure.is_none(),
        failure,
    }
}

impl HiddenVariableModel<f64> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
