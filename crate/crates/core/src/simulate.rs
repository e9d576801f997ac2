//! Monte Carlo CHSH experiments under a hidden-variable model.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`. Trial `t`
//! consumes exactly three 64-bit outputs (hidden variable, setting pair,
//! outcome pair), i.e. stream words `6t .. 6t + 6`, so any trial can be
//! reached with `set_word_pos` and trial ranges are generated in parallel with
//! bit-identical results.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{min_entropy_bound, Mode};
use crate::error::{validation_err, Error, Result};
use crate::model::{HiddenVariableModel, DEFAULT_TOL};

const WORDS_PER_TRIAL: u128 = 6;
const CHUNK: u64 = 1 << 16;

/// Outcome counts `N(a, b, j, k)`, stored at `4·(2j+k) + 2a + b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialCounts {
    pub n: u64,
    pub counts: [u64; 16],
}

#[inline]
fn cell(a: usize, b: usize, j: usize, k: usize) -> usize {
    4 * (2 * j + k) + 2 * a + b
}

impl TrialCounts {
    pub fn empty() -> Self {
        TrialCounts { n: 0, counts: [0; 16] }
    }

    pub fn from_counts(counts: [u64; 16]) -> Self {
        TrialCounts {
            n: counts.iter().sum(),
            counts,
        }
    }

    pub fn get(&self, a: usize, b: usize, j: usize, k: usize) -> u64 {
        self.counts[cell(a, b, j, k)]
    }

    pub fn setting_total(&self, j: usize, k: usize) -> u64 {
        let s = 4 * (2 * j + k);
        self.counts[s..s + 4].iter().sum()
    }

    /// Empirical `p(A_j, B_k)` in the order `(0,0), (0,1), (1,0), (1,1)`.
    pub fn input_frequencies(&self) -> [f64; 4] {
        std::array::from_fn(|s| self.setting_total(s / 2, s % 2) as f64 / self.n as f64)
    }

    pub fn merge(&mut self, other: &TrialCounts) {
        self.n += other.n;
        for (x, y) in self.counts.iter_mut().zip(other.counts.iter()) {
            *x += y;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.counts.iter().sum();
        if total != self.n {
            return Err(validation_err!("counts sum to {total}, expected n = {}", self.n));
        }
        Ok(())
    }

    /// CSV with header `a,b,j,k,count`, rows in lexicographic `(a, b, j, k)` order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,j,k,count\n");
        for a in 0..2 {
            for b in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        out.push_str(&format!("{a},{b},{j},{k},{}\n", self.get(a, b, j, k)));
                    }
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("a,b,j,k,count") => {}
            other => {
                return Err(Error::Serialization(format!(
                    "expected header a,b,j,k,count, found {other:?}"
                )))
            }
        }
        let mut counts = [0u64; 16];
        let mut seen = [false; 16];
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Serialization(format!("row {}: expected 5 fields", i + 1)));
            }
            let bit = |f: &str| -> Result<usize> {
                match f {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    _ => Err(Error::Serialization(format!("row {}: {f:?} is not a bit", i + 1))),
                }
            };
            let idx = cell(bit(fields[0])?, bit(fields[1])?, bit(fields[2])?, bit(fields[3])?);
            if seen[idx] {
                return Err(Error::Serialization(format!("row {}: duplicate cell", i + 1)));
            }
            seen[idx] = true;
            counts[idx] = fields[4]
                .parse()
                .map_err(|e| Error::Serialization(format!("row {}: {e}", i + 1)))?;
        }
        Ok(Self::from_counts(counts))
    }
}

/// Which outcome Eve tries to guess in each trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PartyRule {
    /// Alice's most likely outcome at the realized `j`.
    Alice,
    /// Bob's most likely outcome at the realized `k`.
    Bob,
    /// The party whose marginal attains `G(λ)` (Alice on ties), guessed at
    /// that party's realized setting.
    #[default]
    Best,
}

impl std::str::FromStr for PartyRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alice" => Ok(PartyRule::Alice),
            "bob" => Ok(PartyRule::Bob),
            "best" => Ok(PartyRule::Best),
            other => Err(validation_err!(
                "unknown guessing rule {other:?}; expected alice, bob or best"
            )),
        }
    }
}

/// Inverse-CDF sampler over a short discrete distribution.
#[derive(Clone, Debug)]
struct Cdf {
    cum: Vec<f64>,
    last: usize,
}

impl Cdf {
    fn new(p: &[f64]) -> Self {
        let mut acc = 0.0;
        let cum = p
            .iter()
            .map(|&x| {
                acc += x.max(0.0);
                acc
            })
            .collect();
        let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
        Cdf { cum, last }
    }

    #[inline]
    fn sample(&self, u: f64) -> usize {
        self.cum
            .iter()
            .position(|&c| u < c)
            .map_or(self.last, |i| i.min(self.last))
    }
}

#[inline]
fn unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct Sampler {
    lambda: Cdf,
    settings: Vec<Cdf>,
    outcomes: Vec<[Cdf; 4]>,
    /// Per `(λ, setting pair)`: `(party, guessed outcome)`, party 0 = Alice.
    guesses: Vec<[(usize, usize); 4]>,
}

impl Sampler {
    fn new(model: &HiddenVariableModel<f64>, rule: PartyRule) -> Self {
        let weights: Vec<f64> = model.components.iter().map(|c| c.weight).collect();
        let settings = model
            .components
            .iter()
            .map(|c| Cdf::new(&c.settings.as_array()))
            .collect();
        let outcomes = model
            .components
            .iter()
            .map(|c| std::array::from_fn(|s| Cdf::new(&c.chsh_box.entries()[4 * s..4 * s + 4])))
            .collect();
        let guesses = model
            .components
            .iter()
            .map(|c| {
                let b = &c.chsh_box;
                let party = match rule {
                    PartyRule::Alice => 0,
                    PartyRule::Bob => 1,
                    PartyRule::Best => {
                        let alice = (0..2).map(|j| b.m(j).max(1.0 - b.m(j))).fold(0.0, f64::max);
                        let bob = (0..2).map(|k| b.n(k).max(1.0 - b.n(k))).fold(0.0, f64::max);
                        usize::from(bob > alice)
                    }
                };
                std::array::from_fn(|s| {
                    let (j, k) = (s / 2, s % 2);
                    let p0 = if party == 0 { b.m(j) } else { b.n(k) };
                    (party, usize::from(p0 < 0.5))
                })
            })
            .collect();
        Sampler {
            lambda: Cdf::new(&weights),
            settings,
            outcomes,
            guesses,
        }
    }

    /// Counts and number of correct guesses for trials `start .. start + len`.
    fn run_range(&self, seed: u64, start: u64, len: u64) -> (TrialCounts, u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(WORDS_PER_TRIAL * start as u128);
        let mut counts = [0u64; 16];
        let mut correct = 0u64;
        for _ in 0..len {
            let l = self.lambda.sample(unit(rng.next_u64()));
            let s = self.settings[l].sample(unit(rng.next_u64()));
            let ab = self.outcomes[l][s].sample(unit(rng.next_u64()));
            counts[4 * s + ab] += 1;
            let (party, guess) = self.guesses[l][s];
            let actual = if party == 0 { ab >> 1 } else { ab & 1 };
            correct += u64::from(actual == guess);
        }
        (TrialCounts { n: len, counts }, correct)
    }

    fn run(&self, n: u64, seed: u64, chunk: u64) -> (TrialCounts, u64) {
        let chunks = n.div_ceil(chunk);
        let parts: Vec<(TrialCounts, u64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * chunk;
                self.run_range(seed, start, chunk.min(n - start))
            })
            .collect();
        let mut total = TrialCounts::empty();
        let mut correct = 0;
        for (c, k) in &parts {
            total.merge(c);
            correct += k;
        }
        (total, correct)
    }
}

fn prepare(model: &HiddenVariableModel<f64>, n: u64, rule: PartyRule) -> Result<Sampler> {
    if n == 0 {
        return Err(validation_err!("at least one trial required"));
    }
    model.check(DEFAULT_TOL)?;
    Ok(Sampler::new(model, rule))
}

/// Samples `n` i.i.d. trials: `λ ~ ρ`, `(j, k) ~ p(·|λ)`, `(a, b) ~ box_λ(·|j, k)`.
pub fn run_trials(model: &HiddenVariableModel<f64>, n: u64, seed: u64) -> Result<TrialCounts> {
    Ok(prepare(model, n, PartyRule::Best)?.run(n, seed, CHUNK).0)
}

/// Fraction of `n` trials in which Eve, knowing `λ` and the realized
/// settings, guesses the targeted outcome correctly. Uses the same trial
/// stream as [`run_trials`].
pub fn eve_guess_accuracy(model: &HiddenVariableModel<f64>, n: u64, seed: u64, target: PartyRule) -> Result<f64> {
    let (_, correct) = prepare(model, n, target)?.run(n, seed, CHUNK);
    Ok(correct as f64 / n as f64)
}

/// Plug-in CHSH estimate and its standard error.
///
/// `Ê(jk) = Σ (-1)^{a+b} N(a,b,j,k) / N(j,k)`; the error combines the
/// per-pair binomial variances `(1 - Ê²)/N(j,k)` in quadrature.
pub fn estimate_s(counts: &TrialCounts) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut var = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            let total = counts.setting_total(j, k);
            if total == 0 {
                return Err(validation_err!("setting pair (j={j}, k={k}) was never observed"));
            }
            let nt = total as f64;
            let signed = counts.get(0, 0, j, k) as f64 + counts.get(1, 1, j, k) as f64
                - counts.get(0, 1, j, k) as f64
                - counts.get(1, 0, j, k) as f64;
            let e = signed / nt;
            sum += if j * k == 1 { -e } else { e };
            var += (1.0 - e * e).max(0.0) / nt;
        }
    }
    Ok((sum.abs(), var.sqrt()))
}

/// Certified min-entropy, in bits, of `n` runs with observed CHSH value
/// `s_hat` under free-will parameter `p_assumed`.
pub fn certify_from_estimate(s_hat: f64, n: u64, p_assumed: f64, mode: Mode) -> Result<f64> {
    if p_assumed < 0.25 {
        return Err(Error::Certification(format!(
            "P = {p_assumed} is below 1/4, the value for fully free settings"
        )));
    }
    match mode {
        Mode::Ns if p_assumed >= 1.0 / 3.0 => {
            return Err(Error::Certification(format!(
                "P = {p_assumed} ≥ 1/3: deterministic no-signalling models reach S = 4, so no bits can be certified \
                 (quantum-certified expansion already fails from P = 3/10)"
            )))
        }
        Mode::Fac if p_assumed >= 0.5 => {
            return Err(Error::Certification(format!(
                "P = {p_assumed} ≥ 1/2: deterministic models with factorizable settings reach S = 4, so no bits can be certified"
            )))
        }
        _ => {}
    }
    let g = mode.g_bound(s_hat, p_assumed)?;
    min_entropy_bound(g, n)
}

/// [`certify_from_estimate`] applied to the plug-in estimate of `counts`.
pub fn certify(counts: &TrialCounts, p_assumed: f64, mode: Mode) -> Result<f64> {
    let (s_hat, _) = estimate_s(counts)?;
    certify_from_estimate(s_hat, counts.n, p_assumed, mode)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: u64,
    pub seed: u64,
    #[serde(rename = "S_hat")]
    pub s_hat: f64,
    #[serde(rename = "S_stderr")]
    pub s_stderr: f64,
    pub input_freqs: [f64; 4],
    pub eve_accuracy: f64,
    pub certified_bits: f64,
}

impl SimulationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One pass producing counts, Eve's accuracy and the certified entropy.
pub fn simulate(
    model: &HiddenVariableModel<f64>,
    n: u64,
    seed: u64,
    p_assumed: f64,
    mode: Mode,
    rule: PartyRule,
) -> Result<(TrialCounts, SimulationReport)> {
    let (counts, correct) = prepare(model, n, rule)?.run(n, seed, CHUNK);
    let (s_hat, s_stderr) = estimate_s(&counts)?;
    let certified_bits = certify_from_estimate(s_hat, n, p_assumed, mode)?;
    let report = SimulationReport {
        n,
        seed,
        s_hat,
        s_stderr,
        input_freqs: counts.input_frequencies(),
        eve_accuracy: correct as f64 / n as f64,
        certified_bits,
    };
    Ok((counts, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::s_max_ns;
    use crate::model::{ChshBox, Component, SettingsDistribution};
    use crate::optimal_models::{build_fac_model_low_p, build_general_model};
    use proptest::prelude::*;

    fn pr_model() -> HiddenVariableModel<f64> {
        HiddenVariableModel::single(SettingsDistribution::uniform(), ChshBox::pr_box())
    }

    #[test]
    fn pr_box_support() {
        let c = run_trials(&pr_model(), 20_000, 1).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        if (a ^ b) != (j & k) {
                            assert_eq!(c.get(a, b, j, k), 0);
                        }
                    }
                }
            }
        }
        assert_eq!(estimate_s(&c).unwrap().0, 4.0);
    }

    #[test]
    fn chunking_does_not_change_counts() {
        let m = build_general_model(0.8f64, 0.3).unwrap();
        let s = Sampler::new(&m, PartyRule::Best);
        let a = s.run(100_003, 9, 1 << 16);
        let b = s.run(100_003, 9, 977);
        let c = s.run_range(9, 0, 100_003);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn reproducible_and_seed_sensitive() {
        let m = build_general_model(0.9f64, 0.28).unwrap();
        let a = run_trials(&m, 50_000, 3).unwrap();
        assert_eq!(a, run_trials(&m, 50_000, 3).unwrap());
        assert_ne!(a, run_trials(&m, 50_000, 4).unwrap());
        a.validate().unwrap();
    }

    #[test]
    fn estimate_examples() {
        let mut uniform_pr = [0u64; 16];
        for s in 0..4 {
            for ab in 0..4 {
                let (a, b) = (ab >> 1, ab & 1);
                if (a ^ b) == ((s >> 1) & s & 1) {
                    uniform_pr[4 * s + ab] = 250;
                }
            }
        }
        assert_eq!(estimate_s(&TrialCounts::from_counts(uniform_pr)).unwrap().0, 4.0);
        assert_eq!(estimate_s(&TrialCounts::from_counts([7; 16])).unwrap().0, 0.0);

        // Expected counts of the deterministic, fully free model.
        let m = build_general_model(1.0f64, 0.25).unwrap();
        let n = 1600.0;
        let mut exact = [0u64; 16];
        for c in &m.components {
            for s in 0..4 {
                for ab in 0..4 {
                    exact[4 * s + ab] +=
                        (n * c.weight * c.settings.as_array()[s] * c.chsh_box.entries()[4 * s + ab]).round() as u64;
                }
            }
        }
        let (s, _) = estimate_s(&TrialCounts::from_counts(exact)).unwrap();
        assert!((s - 2.0).abs() < 1e-12);

        let mut missing = [1u64; 16];
        missing[12..16].copy_from_slice(&[0; 4]);
        assert!(estimate_s(&TrialCounts::from_counts(missing)).is_err());
    }

    #[test]
    fn statistics_of_table_models() {
        for (g, p) in [(1.0, 0.25), (0.8, 0.3)] {
            let m = build_general_model(g, p).unwrap();
            let (c, r) = simulate(&m, 200_000, 5, p, Mode::Ns, PartyRule::Best).unwrap();
            let target = s_max_ns(g, p).unwrap().0;
            assert!(
                (r.s_hat - target).abs() < 5.0 * r.s_stderr,
                "S {} vs {target} ± {}",
                r.s_hat,
                r.s_stderr
            );
            for f in c.input_frequencies() {
                assert!((f - 0.25).abs() < 5.0 * (0.25f64 * 0.75 / 200_000.0).sqrt());
            }
            assert!((r.eve_accuracy - g).abs() < 0.005, "{} vs {g}", r.eve_accuracy);
        }
    }

    #[test]
    fn eve_examples() {
        let det = HiddenVariableModel::single(SettingsDistribution::uniform(), ChshBox::deterministic([0, 1], [1, 1]));
        for rule in [PartyRule::Alice, PartyRule::Bob, PartyRule::Best] {
            assert_eq!(eve_guess_accuracy(&det, 10_000, 2, rule).unwrap(), 1.0);
        }
        let acc = eve_guess_accuracy(&pr_model(), 200_000, 2, PartyRule::Best).unwrap();
        assert!((acc - 0.5).abs() < 0.005);
    }

    #[test]
    fn best_rule_targets_the_biased_party() {
        // Alice uniform, Bob deterministic.
        let b = ChshBox::from_marginals([0.5, 0.5], [1.0, 1.0], [0.5; 4]);
        let m = HiddenVariableModel::single(SettingsDistribution::uniform(), b);
        assert_eq!(eve_guess_accuracy(&m, 10_000, 0, PartyRule::Best).unwrap(), 1.0);
        assert!((eve_guess_accuracy(&m, 100_000, 0, PartyRule::Alice).unwrap() - 0.5).abs() < 0.01);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let skewed = HiddenVariableModel::single(SettingsDistribution::new([0.4, 0.2, 0.2, 0.2]), ChshBox::pr_box());
        assert!(run_trials(&skewed, 10, 0).is_err());
        let m = HiddenVariableModel::new(vec![Component {
            weight: 0.5,
            settings: SettingsDistribution::uniform(),
            chsh_box: ChshBox::pr_box(),
        }]);
        assert!(eve_guess_accuracy(&m, 10, 0, PartyRule::Best).is_err());
        assert!(run_trials(&pr_model(), 0, 0).is_err());
    }

    #[test]
    fn certify_examples() {
        let tsirelson = 2.0 * 2f64.sqrt();
        let bits = certify_from_estimate(tsirelson, 1000, 0.25, Mode::Ns).unwrap();
        assert!((bits + 1000.0 * (1.5 - 2f64.sqrt() / 2.0).log2()).abs() < 1e-9);
        assert!((bits - 334.8).abs() < 0.05, "{bits}");

        let det = s_max_ns(1.0, 0.3).unwrap().0;
        assert_eq!(certify_from_estimate(det, 100, 0.3, Mode::Ns).unwrap(), 0.0);
        assert_eq!(certify_from_estimate(det - 0.5, 100, 0.3, Mode::Ns).unwrap(), 0.0);

        let bits = certify_from_estimate(3.7, 100, 0.3, Mode::Ns).unwrap();
        assert!((bits + 100.0 * (11.0f64 / 16.0).log2()).abs() < 1e-9);

        for p in [1.0 / 3.0, 0.4] {
            assert!(matches!(
                certify_from_estimate(3.9, 10, p, Mode::Ns),
                Err(Error::Certification(_))
            ));
        }
        assert!(matches!(
            certify_from_estimate(3.9, 10, 0.5, Mode::Fac),
            Err(Error::Certification(_))
        ));
        assert!(certify_from_estimate(3.9, 10, 0.45, Mode::Fac).unwrap() > 0.0);
        assert!(matches!(
            certify_from_estimate(3.0, 10, 0.2, Mode::Ns),
            Err(Error::Certification(_))
        ));
    }

    #[test]
    fn csv_roundtrip() {
        let c = run_trials(&build_fac_model_low_p(1.0f64, 0.4).unwrap(), 5000, 8).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("a,b,j,k,count\n"));
        assert_eq!(csv.lines().count(), 17);
        assert_eq!(TrialCounts::from_csv(&csv).unwrap(), c);
        assert!(TrialCounts::from_csv("a,b,j,k,count\n2,0,0,0,1\n").is_err());
    }

    #[test]
    fn report_json_fields() {
        let (_, r) = simulate(&pr_model(), 1000, 1, 0.25, Mode::Ns, PartyRule::Best).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        for key in ["S_hat", "S_stderr", "input_freqs", "eve_accuracy", "certified_bits"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let sum: f64 = r.input_freqs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(r.certified_bits >= 0.0);
    }

    proptest! {
        #[test]
        fn certify_is_monotone_in_s(s1 in 0.0f64..4.0, s2 in 0.0f64..4.0, p in 0.25f64..0.333, n in 1u64..10_000) {
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let a = certify_from_estimate(lo, n, p, Mode::Ns).unwrap();
            let b = certify_from_estimate(hi, n, p, Mode::Ns).unwrap();
            prop_assert!(b >= a);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn eve_never_beats_the_model_guessing_probability(g in 0.5f64..1.0, p in 0.25f64..0.3333, seed in 0u64..1000) {
            let m = build_general_model(g, p).unwrap();
            let n = 20_000u64;
            let acc = eve_guess_accuracy(&m, n, seed, PartyRule::Best).unwrap();
            let sigma = (g * (1.0 - g) / n as f64).sqrt().max(1.0 / n as f64);
            prop_assert!(acc <= g + 5.0 * sigma + 1e-12);
        }
    }
}
