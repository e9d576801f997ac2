//! Closed-form trade-offs between the CHSH value `S`, the guessing probability
//! `G` and the free-will parameter `P`.
//!
//! The no-signalling and factorizable bounds are polynomial and work over any
//! [`Scalar`], including exact rationals. The quantum quantities need square
//! roots and are restricted to [`Real`].

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, validation_err, Result};
use crate::scalar::{abs, max, min, Real, Scalar};

/// Which case of a piecewise bound produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundBranch {
    ClosedForm,
    SaturatedAt4,
    Deterministic,
    Quantum,
}

impl BoundBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundBranch::ClosedForm => "closed-form",
            BoundBranch::SaturatedAt4 => "saturated-at-4",
            BoundBranch::Deterministic => "deterministic",
            BoundBranch::Quantum => "quantum",
        }
    }
}

impl std::fmt::Display for BoundBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn four<T: Scalar>() -> T {
    T::two() * T::two()
}

fn eight<T: Scalar>() -> T {
    four::<T>() * T::two()
}

fn check_g<T: Scalar>(g: T) -> Result<()> {
    if g < T::half() || g > T::one() {
        return Err(domain_err!("guessing probability {:?} outside [1/2, 1]", g));
    }
    Ok(())
}

fn check_p<T: Scalar>(p: T) -> Result<()> {
    if p < T::quarter() || p > T::one() {
        return Err(domain_err!("free-will parameter {:?} outside [1/4, 1]", p));
    }
    Ok(())
}

fn check_s<T: Scalar>(s: T) -> Result<()> {
    if s < T::zero() || s > four() {
        return Err(domain_err!("CHSH value {:?} outside [0, 4]", s));
    }
    Ok(())
}

/// Largest CHSH value of any no-signalling model with uniform observed inputs:
/// `4 - 8(2G-1)(1-3P)` for `P ≤ 1/3`, else 4.
pub fn s_max_ns<T: Scalar>(g: T, p: T) -> Result<(T, BoundBranch)> {
    check_g(g)?;
    check_p(p)?;
    if p <= T::ratio(1, 3) {
        let three = T::two() + T::one();
        Ok((
            four::<T>() - eight::<T>() * (T::two() * g - T::one()) * (T::one() - three * p),
            BoundBranch::ClosedForm,
        ))
    } else {
        Ok((four(), BoundBranch::SaturatedAt4))
    }
}

/// Same trade-off when every `p(A_j, B_k | λ)` is a product distribution:
/// `4 - 4(2G-1)(1-2P)` for `P ≤ 1/2`, else 4.
pub fn s_max_fac<T: Scalar>(g: T, p: T) -> Result<(T, BoundBranch)> {
    check_g(g)?;
    check_p(p)?;
    if p <= T::half() {
        Ok((
            four::<T>() - four::<T>() * (T::two() * g - T::one()) * (T::one() - T::two() * p),
            BoundBranch::ClosedForm,
        ))
    } else {
        Ok((four(), BoundBranch::SaturatedAt4))
    }
}

fn g_from_deterministic_bound<T: Scalar>(s: T, s_det: T) -> T {
    min(
        T::half() * (T::one() + (four::<T>() - s) / (four::<T>() - s_det)),
        T::one(),
    )
}

/// Upper bound on `G` given an observed `S`, valid for `1/4 ≤ P < 1/3`.
pub fn g_bound_ns<T: Scalar>(s: T, p: T) -> Result<T> {
    check_s(s)?;
    check_p(p)?;
    if p >= T::ratio(1, 3) {
        return Err(domain_err!(
            "P = {:?} ≥ 1/3: a deterministic model reaches S = 4, so no guessing-probability bound below 1 exists",
            p
        ));
    }
    let (s_det, _) = s_max_ns(T::one(), p)?;
    Ok(g_from_deterministic_bound(s, s_det))
}

/// Factorizable analogue of [`g_bound_ns`], valid for `1/4 ≤ P < 1/2`.
pub fn g_bound_fac<T: Scalar>(s: T, p: T) -> Result<T> {
    check_s(s)?;
    check_p(p)?;
    if p >= T::half() {
        return Err(domain_err!(
            "P = {:?} ≥ 1/2: a factorizable deterministic model reaches S = 4, so no guessing-probability bound below 1 exists",
            p
        ));
    }
    let (s_det, _) = s_max_fac(T::one(), p)?;
    Ok(g_from_deterministic_bound(s, s_det))
}

/// Adversary class a bound applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Arbitrary no-signalling models.
    Ns,
    /// Models whose settings distributions factorize within each component.
    Fac,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Ns => "ns",
            Mode::Fac => "fac",
        }
    }

    pub fn s_max<T: Scalar>(&self, g: T, p: T) -> Result<(T, BoundBranch)> {
        match self {
            Mode::Ns => s_max_ns(g, p),
            Mode::Fac => s_max_fac(g, p),
        }
    }

    pub fn g_bound<T: Scalar>(&self, s: T, p: T) -> Result<T> {
        match self {
            Mode::Ns => g_bound_ns(s, p),
            Mode::Fac => g_bound_fac(s, p),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ns" => Ok(Mode::Ns),
            "fac" => Ok(Mode::Fac),
            other => Err(validation_err!("unknown mode {other:?}; expected ns or fac")),
        }
    }
}

/// Quantum optimum over biased-settings CHSH games with largest setting
/// probability `P`.
///
/// Below `P = 3/10` the maximally entangled strategy wins with
/// `4(1-2P)^{3/2}/√(1-3P)`; from `3/10` to `1/3` a deterministic strategy
/// reaching `24P - 4` is optimal; above `1/3` the value saturates at 4.
pub fn s_max_quantum<T: Real>(p: T) -> Result<(T, BoundBranch)> {
    check_p(p)?;
    let three = T::two() + T::one();
    if p < T::ratio(3, 10) {
        let one_minus_2p = T::one() - T::two() * p;
        let v = four::<T>() * one_minus_2p * one_minus_2p.sqrt() / (T::one() - three * p).sqrt();
        Ok((v, BoundBranch::Quantum))
    } else if p <= T::ratio(1, 3) {
        Ok((T::from_i64(24).unwrap() * p - four::<T>(), BoundBranch::Deterministic))
    } else {
        Ok((four(), BoundBranch::SaturatedAt4))
    }
}

/// Quantum optimum when the adversary is restricted to product settings
/// distributions: `4√(4P² + (1-2P)²)` for `1/4 ≤ P < 1/2`.
pub fn s_max_quantum_fac<T: Real>(p: T) -> Result<T> {
    check_p(p)?;
    if p >= T::half() {
        return Err(domain_err!(
            "P = {:?} outside [1/4, 1/2) for the factorizable quantum bound",
            p
        ));
    }
    let q = T::one() - T::two() * p;
    Ok(four::<T>() * (four::<T>() * p * p + q * q).sqrt())
}

/// Single-run min-entropy lower bound `-n·log2(G)` in bits.
pub fn min_entropy_bound<T: Real>(g: T, n: u64) -> Result<T> {
    check_g(g)?;
    if n == 0 {
        return Err(domain_err!("number of runs must be at least 1"));
    }
    let bits = -T::from_u64(n).unwrap() * g.log2();
    // -0.0 at G = 1
    Ok(if bits == T::zero() { T::zero() } else { bits })
}

/// Probability distribution `(p00, p01, p10, p11)` over the four setting pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BiasedDistribution<T> {
    p: [T; 4],
}

impl<T: Scalar> BiasedDistribution<T> {
    pub fn new(p: [T; 4], tol: T) -> Result<Self> {
        if let Some(v) = p.iter().find(|&&v| v < T::zero()) {
            return Err(validation_err!("negative setting probability {:?}", v));
        }
        let total = p.iter().fold(T::zero(), |acc, &v| acc + v);
        if abs(total - T::one()) > tol {
            return Err(validation_err!("setting probabilities sum to {:?}", total));
        }
        Ok(BiasedDistribution { p })
    }

    pub fn uniform() -> Self {
        BiasedDistribution { p: [T::quarter(); 4] }
    }

    /// The family `(P, P, P, 1 - 3P)`, optimal for a fixed largest entry `P ≤ 1/3`.
    pub fn optimal_family(p: T) -> Result<Self> {
        let three = T::two() + T::one();
        if p < T::quarter() || p > T::ratio(1, 3) {
            return Err(domain_err!("family (P,P,P,1-3P) needs P in [1/4, 1/3], got {:?}", p));
        }
        Ok(BiasedDistribution {
            p: [p, p, p, T::one() - three * p],
        })
    }

    pub fn as_array(&self) -> [T; 4] {
        self.p
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> T {
        self.p[2 * j + k]
    }

    pub fn p_min(&self) -> T {
        self.p.iter().copied().fold(self.p[0], min)
    }

    pub fn p_max(&self) -> T {
        self.p.iter().copied().fold(self.p[0], max)
    }

    fn has_zero(&self) -> bool {
        self.p.iter().any(|v| v.is_zero())
    }

    /// `Σ 1/p_jk - 2/p_min`; negative exactly when the optimal `α` leaves `[-2, 2]`.
    pub fn deterministic_dominance_margin(&self) -> Result<T> {
        if self.has_zero() {
            return Err(domain_err!(
                "dominance margin undefined with a zero setting probability"
            ));
        }
        let inv = self.p.iter().fold(T::zero(), |acc, &v| acc + T::one() / v);
        Ok(inv - T::two() / self.p_min())
    }
}

/// Optimal value of `α = <ψ| I ⊗ {B0, B1} |ψ>` for the biased CHSH game.
pub fn alpha_opt<T: Scalar>(dist: &BiasedDistribution<T>) -> Result<T> {
    if dist.has_zero() {
        return Err(domain_err!("optimal α is singular when a setting probability is zero"));
    }
    let [p00, p01, p10, p11] = dist.p;
    let (a2, b2, c2, d2) = (p00 * p00, p01 * p01, p10 * p10, p11 * p11);
    let num = a2 * b2 * (c2 + d2) - c2 * d2 * (a2 + b2);
    let den = p00 * p01 * p10 * p11 * (p00 * p01 + p10 * p11);
    Ok(num / den)
}

/// Value `4 - 8·p_min` of the best deterministic strategy, which loses only on
/// the least likely setting pair.
pub fn s_deterministic_dist<T: Scalar>(dist: &BiasedDistribution<T>) -> T {
    four::<T>() - eight::<T>() * dist.p_min()
}

/// Maximal quantum CHSH value for a fixed settings distribution.
pub fn s_q_max_dist<T: Real>(dist: &BiasedDistribution<T>) -> Result<(T, BoundBranch)> {
    if dist.has_zero() || alpha_opt(dist)?.abs() >= T::two() {
        return Ok((s_deterministic_dist(dist), BoundBranch::Deterministic));
    }
    let [p00, p01, p10, p11] = dist.p;
    let v = four::<T>()
        * (p00 * p01 + p10 * p11).sqrt()
        * ((p00 * p00 + p01 * p01) / (p00 * p01) + (p10 * p10 + p11 * p11) / (p10 * p11)).sqrt();
    Ok((v, BoundBranch::Quantum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn s_max_ns_examples() {
        assert_eq!(s_max_ns(r(1, 1), r(1, 4)).unwrap(), (r(2, 1), BoundBranch::ClosedForm));
        assert_eq!(s_max_ns(r(1, 2), r(7, 25)).unwrap().0, r(4, 1));
        assert_eq!(s_max_ns(r(1, 1), r(1, 3)).unwrap(), (r(4, 1), BoundBranch::ClosedForm));
        assert_eq!(
            s_max_ns(r(1, 1), r(1, 2)).unwrap(),
            (r(4, 1), BoundBranch::SaturatedAt4)
        );
        // 12 - 24P - 16G + 48GP at G = 3/4, P = 3/10
        assert_eq!(s_max_ns(r(3, 4), r(3, 10)).unwrap().0, r(18, 5));
        assert_eq!(s_max_ns(r(1, 1), r(3, 10)).unwrap().0, r(16, 5));
        assert!(s_max_ns(0.4, 0.3).is_err());
        assert!(s_max_ns(0.7, 0.2).is_err());
    }

    #[test]
    fn g_bound_ns_examples() {
        close(g_bound_ns(2.0 * SQRT_2, 0.25).unwrap(), 1.5 - 2.0 * SQRT_2 / 4.0, 1e-15);
        assert_eq!(g_bound_ns(0.0, 0.3).unwrap(), 1.0);
        // S_max(1, 3/10) = 16/5
        assert_eq!(g_bound_ns(r(16, 5), r(3, 10)).unwrap(), r(1, 1));
        assert_eq!(g_bound_ns(r(17, 5), r(3, 10)).unwrap(), r(7, 8));
        assert_eq!(g_bound_ns(r(37, 10), r(3, 10)).unwrap(), r(11, 16));
        assert!(matches!(g_bound_ns(3.0, 1.0 / 3.0), Err(crate::Error::Domain(_))));
        assert!(g_bound_ns(4.5, 0.3).is_err());
    }

    #[test]
    fn s_max_fac_examples() {
        assert_eq!(s_max_fac(r(1, 1), r(1, 4)).unwrap().0, r(2, 1));
        assert_eq!(s_max_fac(r(1, 2), r(2, 5)).unwrap().0, r(4, 1));
        assert_eq!(s_max_fac(r(1, 1), r(2, 5)).unwrap().0, r(16, 5));
        assert_eq!(
            s_max_fac(r(1, 1), r(3, 5)).unwrap(),
            (r(4, 1), BoundBranch::SaturatedAt4)
        );
    }

    #[test]
    fn g_bound_fac_examples() {
        assert_eq!(g_bound_fac(r(2, 1), r(1, 4)).unwrap(), r(1, 1));
        close(g_bound_fac(2.0 * SQRT_2, 0.25).unwrap(), 1.5 - SQRT_2 / 2.0, 1e-15);
        assert_eq!(g_bound_fac(r(3, 1), r(3, 10)).unwrap(), r(13, 16));
        assert!(g_bound_fac(3.0, 0.5).is_err());
    }

    #[test]
    fn quantum_examples() {
        let (v, tag) = s_max_quantum(0.25).unwrap();
        close(v, 2.0 * SQRT_2, 1e-15);
        assert_eq!(tag, BoundBranch::Quantum);
        let (v, tag) = s_max_quantum(0.3).unwrap();
        close(v, 3.2, 1e-14);
        assert_eq!(tag, BoundBranch::Deterministic);
        close(4.0 * 0.4f64.powf(1.5) / 0.1f64.sqrt(), 3.2, 1e-14);
        assert_eq!(s_max_quantum(1.0 / 3.0).unwrap().0, 4.0);
        assert_eq!(s_max_quantum(0.5).unwrap(), (4.0, BoundBranch::SaturatedAt4));
        assert!(s_max_quantum(0.2).is_err());

        close(s_max_quantum_fac(0.25).unwrap(), 2.0 * SQRT_2, 1e-15);
        close(s_max_quantum_fac(0.3).unwrap(), 4.0 * 0.52f64.sqrt(), 1e-15);
        close(s_max_quantum_fac(0.5 - 1e-9).unwrap(), 4.0, 1e-7);
        assert!(s_max_quantum_fac(0.5).is_err());
    }

    #[test]
    fn min_entropy_examples() {
        assert_eq!(min_entropy_bound(0.5, 1).unwrap(), 1.0);
        assert_eq!(min_entropy_bound(1.0, 17).unwrap(), 0.0);
        close(
            min_entropy_bound(0.75, 100).unwrap(),
            100.0 * (4.0f64 / 3.0).log2(),
            1e-12,
        );
        close(min_entropy_bound(0.75, 100).unwrap(), 41.504, 1e-3);
        assert!(min_entropy_bound(0.4, 1).is_err());
        assert!(min_entropy_bound(0.7, 0).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(
            alpha_opt(&BiasedDistribution::<Rational64>::uniform()).unwrap(),
            r(0, 1)
        );
        let a = alpha_opt(&BiasedDistribution::optimal_family(0.26f64).unwrap()).unwrap();
        assert!(a.abs() <= 2.0, "{a}");
        let a = alpha_opt(&BiasedDistribution::optimal_family(0.32f64).unwrap()).unwrap();
        assert!(a.abs() > 2.0, "{a}");
        let d = BiasedDistribution::new([0.5, 0.5, 0.0, 0.0], 1e-12).unwrap();
        assert!(alpha_opt(&d).is_err());
        assert_eq!(s_q_max_dist(&d).unwrap(), (4.0, BoundBranch::Deterministic));
    }

    #[test]
    fn s_q_max_dist_examples() {
        let (v, tag) = s_q_max_dist(&BiasedDistribution::<f64>::uniform()).unwrap();
        close(v, 2.0 * SQRT_2, 1e-15);
        assert_eq!(tag, BoundBranch::Quantum);

        let (v, _) = s_q_max_dist(&BiasedDistribution::optimal_family(0.28).unwrap()).unwrap();
        close(v, 4.0 * 0.44f64.powf(1.5) / 0.16f64.sqrt(), 1e-13);
        close(v, 2.9186, 1e-4);

        let d = BiasedDistribution::new([0.4, 0.3, 0.2, 0.1], 1e-12).unwrap();
        let margin = d.deterministic_dominance_margin().unwrap();
        close(margin, 2.5 + 10.0 / 3.0 + 5.0 + 10.0 - 20.0, 1e-12);
        let (v, tag) = s_q_max_dist(&d).unwrap();
        assert_eq!(tag, BoundBranch::Quantum);
        assert!(v > 3.2);

        assert_eq!(
            s_q_max_dist(&BiasedDistribution::optimal_family(0.32).unwrap())
                .unwrap()
                .1,
            BoundBranch::Deterministic
        );
        assert!(BiasedDistribution::new([0.5, 0.5, 0.5, -0.5], 1e-12).is_err());
    }

    #[test]
    fn quantum_family_matches_optimal_family_distribution() {
        for i in 0..50 {
            let p = 0.25 + 0.05 * i as f64 / 50.0;
            let (a, _) = s_max_quantum(p).unwrap();
            let (b, _) = s_q_max_dist(&BiasedDistribution::optimal_family(p).unwrap()).unwrap();
            close(a, b, 1e-12);
        }
    }

    fn grid() -> impl Iterator<Item = (f64, f64)> {
        (0..100).flat_map(|i| (0..100).map(move |j| (0.5 + 0.5 * i as f64 / 99.0, 0.25 + 0.75 * j as f64 / 99.0)))
    }

    #[test]
    fn factorizable_never_exceeds_general() {
        for (g, p) in grid() {
            assert!(
                s_max_fac(g, p).unwrap().0 <= s_max_ns(g, p).unwrap().0 + 1e-15,
                "G={g} P={p}"
            );
        }
    }

    #[test]
    fn monotone_and_continuous() {
        for (g, p) in grid() {
            let dg = 1e-3;
            if g + dg <= 1.0 {
                assert!(s_max_ns(g + dg, p).unwrap().0 <= s_max_ns(g, p).unwrap().0 + 1e-15);
                assert!(s_max_fac(g + dg, p).unwrap().0 <= s_max_fac(g, p).unwrap().0 + 1e-15);
            }
            if p + dg <= 1.0 {
                assert!(s_max_ns(g, p + dg).unwrap().0 >= s_max_ns(g, p).unwrap().0 - 1e-15);
                assert!(s_max_fac(g, p + dg).unwrap().0 >= s_max_fac(g, p).unwrap().0 - 1e-15);
            }
        }
        let third = r(1, 3);
        for g in [r(1, 2), r(3, 4), r(1, 1)] {
            assert_eq!(s_max_ns(g, third).unwrap().0, r(4, 1));
            assert_eq!(s_max_fac(g, r(1, 2)).unwrap().0, r(4, 1));
        }
        let eps = 1e-12;
        close(s_max_quantum(0.3 - eps).unwrap().0, s_max_quantum(0.3).unwrap().0, 1e-9);
        close(
            s_max_quantum(1.0 / 3.0 + eps).unwrap().0,
            s_max_quantum(1.0 / 3.0).unwrap().0,
            1e-9,
        );
        for j in 0..100 {
            let p = 0.25 + 0.75 * j as f64 / 99.0;
            assert!(s_max_quantum(p).unwrap().0 <= s_max_ns(0.5, p).unwrap().0 + 1e-12);
        }
    }

    #[test]
    fn g_bound_inverts_s_max_exactly_over_rationals() {
        for gi in 0..=10 {
            for pi in 0..8 {
                let g = r(50 + 5 * gi, 100);
                let p = r(25 + pi, 100);
                let (s, _) = s_max_ns(g, p).unwrap();
                assert_eq!(g_bound_ns(s, p).unwrap(), g);
            }
        }
    }

    fn arb_dist() -> impl Strategy<Value = BiasedDistribution<f64>> {
        prop::array::uniform4(1e-3f64..1.0).prop_map(|q| {
            let t: f64 = q.iter().sum();
            BiasedDistribution::new(q.map(|v| v / t), 1e-12).unwrap()
        })
    }

    proptest! {
        #[test]
        fn g_bound_inverts_s_max(g in 0.5f64..=1.0, p in 0.25f64..0.333) {
            let (s, _) = s_max_ns(g, p).unwrap();
            prop_assert!((g_bound_ns(s, p).unwrap() - g).abs() <= 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn quantum_at_least_deterministic(d in arb_dist()) {
            let (v, _) = s_q_max_dist(&d).unwrap();
            prop_assert!(v >= s_deterministic_dist(&d) - 1e-12);
        }

        #[test]
        fn dominance_margin_tracks_alpha(d in arb_dist()) {
            let a = alpha_opt(&d).unwrap();
            let m = d.deterministic_dominance_margin().unwrap();
            // Skip the measure-zero boundary where rounding decides.
            prop_assume!((a.abs() - 2.0).abs() > 1e-6 && m.abs() > 1e-6);
            prop_assert_eq!(m < 0.0, a.abs() > 2.0, "α={} margin={}", a, m);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        /// At fixed largest entry P, random distributions never beat (P, P, P, 1-3P).
        #[test]
        fn optimal_family_dominates(p in 0.25f64..0.3333, seeds in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 50)) {
            let (best, _) = s_q_max_dist(&BiasedDistribution::optimal_family(p).unwrap()).unwrap();
            for (u, v) in seeds {
                // p00 = P is the largest entry; remaining mass 1-P split over three entries, each ≤ P.
                let rest = 1.0 - p;
                let lo = (rest - 2.0 * p).max(0.0);
                let x = lo + u * (p.min(rest) - lo);
                let rem = rest - x;
                let lo2 = (rem - p).max(0.0);
                let y = lo2 + v * (p.min(rem) - lo2);
                let z = rem - y;
                prop_assume!(z >= 0.0 && z <= p + 1e-15);
                let d = BiasedDistribution::new([p, x, y, z], 1e-12).unwrap();
                let (val, _) = s_q_max_dist(&d).unwrap();
                prop_assert!(val <= best + 1e-12, "{:?} gives {} > {}", d, val, best);
            }
        }
    }
}
