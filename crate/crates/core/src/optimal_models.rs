//! Explicit four-component models that saturate the no-signalling and
//! factorizable trade-offs.
//!
//! All constructors share the same four outcome tables, parameterized by `G`;
//! they differ only in the settings distributions attached to each `λ`. The
//! weights are uniform, which is what makes the observed inputs uniform.

use crate::error::{domain_err, Result};
use crate::model::{ChshBox, Component, HiddenVariableModel, SettingsDistribution};
use crate::scalar::Scalar;

/// Outcome rows `[p(00), p(01), p(10), p(11)]` for `λ_1..λ_4`, each listed
/// for the setting pairs `A0B0, A0B1, A1B0, A1B1`.
fn outcome_tables<T: Scalar>(g: T) -> [ChshBox<T>; 4] {
    let z = T::zero();
    let h = T::one() - g;
    let d = T::two() * g - T::one();
    // (p00, p11, p01, p10) as tabulated, reordered to (00, 01, 10, 11).
    let row = |p00: T, p11: T, p01: T, p10: T| [p00, p01, p10, p11];
    let agree = row(g, h, z, z);
    [
        ChshBox::from_rows([agree, agree, agree, row(d, z, h, h)]),
        ChshBox::from_rows([agree, agree, row(h, h, z, d), row(z, z, h, g)]),
        ChshBox::from_rows([agree, row(h, h, d, z), agree, row(z, z, g, h)]),
        ChshBox::from_rows([row(h, h, d, z), agree, row(h, g, z, z), row(z, z, h, g)]),
    ]
}

fn assemble<T: Scalar>(g: T, settings: [[T; 4]; 4]) -> HiddenVariableModel<T> {
    let boxes = outcome_tables(g);
    HiddenVariableModel::new(
        boxes
            .into_iter()
            .zip(settings)
            .map(|(chsh_box, q)| Component {
                weight: T::quarter(),
                settings: SettingsDistribution::new(q),
                chsh_box,
            })
            .collect(),
    )
}

fn check_g<T: Scalar>(g: T) -> Result<()> {
    if g < T::half() || g > T::one() {
        return Err(domain_err!("G = {:?} outside [1/2, 1]", g));
    }
    Ok(())
}

fn check_range<T: Scalar>(name: &str, v: T, lo: T, hi: T) -> Result<()> {
    if v < lo || v > hi {
        return Err(domain_err!("{name} = {:?} outside [{:?}, {:?}]", v, lo, hi));
    }
    Ok(())
}

/// Optimal general model for `1/4 ≤ P ≤ 1/3`: each `λ` gives three setting
/// pairs probability `P` and the remaining one `1 - 3P`.
pub fn build_general_model<T: Scalar>(g: T, p: T) -> Result<HiddenVariableModel<T>> {
    check_g(g)?;
    check_range("P", p, T::quarter(), T::ratio(1, 3))?;
    let r = T::one() - (T::two() + T::one()) * p;
    Ok(assemble(g, [[p, p, p, r], [p, p, r, p], [p, r, p, p], [r, p, p, p]]))
}

/// Model for `P ≥ 1/3` with settings columns `(P,Q,Q',0)`, `(Q',P,0,Q)`,
/// `(Q,0,P,Q')`, `(0,Q',Q,P)`. Each `λ` never uses one setting pair, so the
/// observed CHSH value is 4 for every `G`.
pub fn build_high_p_model<T: Scalar>(g: T, p: T, q: T, q_prime: T, tol: T) -> Result<HiddenVariableModel<T>> {
    check_g(g)?;
    check_range("P", p, T::ratio(1, 3), T::one())?;
    check_range("Q", q, T::zero(), p)?;
    check_range("Q'", q_prime, T::zero(), p)?;
    let total = p + q + q_prime;
    if crate::scalar::abs(total - T::one()) > tol {
        return Err(domain_err!("P + Q + Q' = {:?}, expected 1", total));
    }
    let z = T::zero();
    Ok(assemble(
        g,
        [
            [p, q, q_prime, z],
            [q_prime, p, z, q],
            [q, z, p, q_prime],
            [z, q_prime, q, p],
        ],
    ))
}

/// Factorizable optimum for `1/2 ≤ P ≤ 1`: the high-P model with `Q = 1 - P`, `Q' = 0`.
pub fn build_fac_model_high_p<T: Scalar>(g: T, p: T) -> Result<HiddenVariableModel<T>> {
    check_range("P", p, T::half(), T::one())?;
    build_high_p_model(g, p, T::one() - p, T::zero(), T::zero())
}

/// Factorizable optimum for `1/4 ≤ P ≤ 1/2`, saturating `4 - 4(2G-1)(1-2P)`.
pub fn build_fac_model_low_p<T: Scalar>(g: T, p: T) -> Result<HiddenVariableModel<T>> {
    check_g(g)?;
    check_range("P", p, T::quarter(), T::half())?;
    let r = T::half() - p;
    Ok(assemble(g, [[p, p, r, r], [r, p, r, p], [p, r, p, r], [r, r, p, p]]))
}
