//! Γ_S(z), Φ_S, lowest coefficients and the Seifert-matrix potential function.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::milnor::{c_matrix_from_mu, leading_block, CHatMatrix, LinkingData, MilnorError, MuTable};
use crate::series::{
    conway_from_laurent, det, format_rational, is_perfect_square, rational_guess, sqrt1pu, u_of_z, ConwayPoly,
    LaurentPoly, MultiSeries, SeriesError, USeries, ZSeries, Q,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorError {
    #[error(transparent)]
    Milnor(#[from] MilnorError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("μ̄ of length {0} is nonzero, so the order-{1} hypothesis fails")]
    Hypothesis(usize, usize),
    #[error("table depth {0} is below the requested order {1}")]
    TableTooShallow(usize, usize),
    #[error("linking numbers are not all zero")]
    NotSplit,
    #[error("Seifert matrix is not square")]
    NotSquare,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaResult {
    pub m: usize,
    pub e: usize,
    /// `λ_ij(u) = u c_ij(u)`, `1 <= i,j <= m-1`.
    pub lambda: Vec<Vec<USeries>>,
    pub phi_u: USeries,
    pub gamma_u: USeries,
    pub gamma_z: ZSeries,
    /// Both displayed forms of Γ agreed.
    pub consistent: bool,
    pub integral: bool,
}

impl GammaResult {
    /// Γ as a rational function of `z` when a short one fits the series.
    pub fn rational_form(&self) -> Option<String> {
        rational_guess(&self.gamma_z).map(|(p, d)| format_rational(&p, &d, "z"))
    }

    pub fn to_json(&self, checks: Option<&GammaChecks>) -> Value {
        json!({
            "m": self.m,
            "e": self.e,
            "gamma_z": self.gamma_z.to_json(),
            "phi_u": self.phi_u.to_json(),
            "lambda": self.lambda.iter().map(|r| r.iter().map(|s| s.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "consistent": self.consistent,
            "integral": self.integral,
            "rational": self.rational_form(),
            "checks": checks.map(|c| c.to_json()),
        })
    }
}

/// Γ_S from a μ̄ table of depth `q`; series are exact through degree `q - 1`.
pub fn gamma(mu: &MuTable) -> Result<GammaResult, FactorError> {
    let c = c_matrix_from_mu(mu)?;
    let m = mu.m();
    let d = mu.q() - 1;
    let u = USeries::var(d);
    let cb: Vec<Vec<USeries>> = leading_block(&c.entries)
        .into_iter()
        .map(|r| r.into_iter().map(|s| s.retruncate(d)).collect())
        .collect();
    let lambda: Vec<Vec<USeries>> = cb.iter().map(|r| r.iter().map(|s| &u * s).collect()).collect();
    let one = USeries::one(d);
    let det_lambda = det(&lambda, &one);
    let phi_u = det(&cb, &one).shift(m.saturating_sub(1));
    let e = if m % 2 == 0 { 1 } else { 0 };
    let root = if e == 1 { sqrt1pu(d) } else { one.clone() };
    let gamma_u = &root * &det_lambda;
    let uz = u_of_z(d);
    let gamma_z = gamma_u.compose(&uz)?;
    let alt = root.compose(&uz)?;
    let alt = &alt * &phi_u.compose(&uz)?;
    Ok(GammaResult {
        m,
        e,
        consistent: det_lambda == phi_u && alt == gamma_z,
        integral: gamma_z.is_integral(),
        lambda,
        phi_u,
        gamma_u,
        gamma_z,
    })
}

/// `Φ_S(u) = u^{m-1} det(c_ij)`.
pub fn phi_u(mu: &MuTable) -> Result<USeries, FactorError> {
    Ok(gamma(mu)?.phi_u)
}

/// `det(v_i ĉ_ij - δ_ij (τ_i - 1))` over `1 <= i,j <= m-1`.
pub fn phi_multi(chat: &CHatMatrix, link: &LinkingData) -> Result<MultiSeries, FactorError> {
    let m = chat.m;
    if link.m() != m {
        return Err(FactorError::Dimension(m, link.m()));
    }
    let d = chat.entries.first().and_then(|r| r.first()).map_or(0, |s| s.q()) + 1;
    let one = MultiSeries::one(m, d);
    let p: Vec<Vec<MultiSeries>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut x = MultiSeries::var(m, d, i).mul(&chat.entries[i][j].retruncate(d));
                    if i == j {
                        x = x.sub(&MultiSeries::t_monomial(m, d, link.tau(i)).sub(&one));
                    }
                    x
                })
                .collect()
        })
        .collect();
    Ok(det(&leading_block(&p), &one))
}

fn check_order(mu: &MuTable, k: usize) -> Result<(), FactorError> {
    if mu.q() < k {
        return Err(FactorError::TableTooShallow(mu.q(), k));
    }
    if let Some(key) = mu.entries().keys().find(|key| key.len() < k) {
        return Err(FactorError::Hypothesis(key.len(), k));
    }
    Ok(())
}

/// `det(a_ij)` with `a_ij = Σ μ̄_{i_1..i_{k-2}, j, i}`, the coefficient of
/// `z^{(k-1)(m-1)}` when every μ̄ of length below `k` vanishes.
pub fn lowest_coefficient(mu: &MuTable, k: usize) -> Result<BigInt, FactorError> {
    check_order(mu, k)?;
    let m = mu.m();
    let n = m.saturating_sub(1);
    let mut a = vec![vec![BigInt::zero(); n]; n];
    if k >= 2 {
        for (key, v) in mu.entries() {
            if key.len() == k {
                let (j, i) = (key[k - 2], key[k - 1]);
                if i < n && j < n {
                    a[i][j] += v;
                }
            }
        }
    }
    Ok(det(&a, &BigInt::one()))
}

/// The homogeneous polynomial `det(v_i Σ μ̄_{i_1..i_{k-2}, j, i} v_{i_1}..v_{i_{k-2}})`.
pub fn multi_lowest(mu: &MuTable, k: usize) -> Result<MultiSeries, FactorError> {
    check_order(mu, k)?;
    let m = mu.m();
    let n = m.saturating_sub(1);
    let d = k.saturating_sub(1) * n;
    let mut a = vec![vec![MultiSeries::zero(m, d); n]; n];
    if k >= 2 {
        for (key, v) in mu.entries() {
            if key.len() != k {
                continue;
            }
            let (j, i) = (key[k - 2], key[k - 1]);
            if i >= n || j >= n {
                continue;
            }
            let mut mono = MultiSeries::constant(m, d, Q::from_integer(v.clone())).mul(&MultiSeries::var(m, d, i));
            for &r in &key[..k - 2] {
                mono = mono.mul(&MultiSeries::var(m, d, r));
            }
            a[i][j] = a[i][j].add(&mono);
        }
    }
    Ok(det(&a, &MultiSeries::one(m, d)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaChecks {
    pub parity: bool,
    pub divisibility: bool,
    pub square: bool,
    /// Coefficient of `z^{2(m-1)}`, `None` when beyond the truncation.
    pub leading: Option<Q>,
}

impl GammaChecks {
    pub fn all(&self) -> bool {
        self.parity && self.divisibility && self.square
    }

    pub fn to_json(&self) -> Value {
        json!({
            "parity": self.parity,
            "divisibility": self.divisibility,
            "square": self.square,
            "leading": self.leading.as_ref().map(|c| c.to_string()),
        })
    }
}

/// Parity, `z^{2(m-1)}` divisibility and square leading value; needs a split link.
pub fn gamma_checks(g: &GammaResult, link: &LinkingData) -> Result<GammaChecks, FactorError> {
    if !link.is_split() {
        return Err(FactorError::NotSplit);
    }
    Ok(parity_checks(g))
}

/// The same three checks with no precondition.
pub fn parity_checks(g: &GammaResult) -> GammaChecks {
    let m = g.m;
    let c = g.gamma_z.coeffs();
    let want = (m + 1) % 2;
    let parity = c.iter().enumerate().all(|(k, x)| k % 2 == want || x.is_zero());
    let lead = 2 * m.saturating_sub(1);
    let divisibility = c.iter().take(lead).all(|x| x.is_zero());
    let leading = c.get(lead).cloned();
    let square = leading.as_ref().is_some_and(is_perfect_square);
    GammaChecks { parity, divisibility, square, leading }
}

/// `det(t A - t^{-1} A^t)` rewritten in `z`, plus whether `A - A^t` is unimodular.
pub fn conway_from_seifert(a: &[Vec<i64>]) -> Result<(ConwayPoly, bool), FactorError> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(FactorError::NotSquare);
    }
    let t = LaurentPoly::t_pow(1);
    let ti = LaurentPoly::t_pow(-1);
    let mut mat = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let x = t.scale(&BigInt::from(a[i][j]));
            let y = ti.scale(&BigInt::from(a[j][i]));
            row.push(crate::series::Ring::minus(&x, &y));
        }
        mat.push(row);
    }
    let omega = det(&mat, &LaurentPoly::one());
    let e: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| BigInt::from(a[i][j] - a[j][i])).collect()).collect();
    let unimodular = det(&e, &BigInt::one()).abs().is_one();
    Ok((conway_from_laurent(&omega)?, unimodular))
}

/// `(1 + u)^{1/2}` to the power `e` times `s`, then `u -> u(z)`.
pub fn to_z(s: &USeries, e: usize) -> Result<ZSeries, FactorError> {
    let d = s.q();
    let f = if e % 2 == 1 { &sqrt1pu(d) * s } else { s.clone() };
    Ok(f.compose(&u_of_z(d))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milnor::{chat_matrix, mu_table};
    use crate::series::qi;
    use crate::words::Word;

    fn hopf() -> Vec<Word> {
        vec![Word::parse("X1^-1 X2").unwrap(), Word::parse("X2^-1 X1").unwrap()]
    }

    #[test]
    fn hopf_gamma_is_minus_z() {
        let g = gamma(&mu_table(&hopf(), 9).unwrap()).unwrap();
        assert_eq!(g.gamma_z, ZSeries::from_ints(8, &[0, -1]));
        assert!(g.consistent && g.integral);
        let lam: Vec<Q> = (0..=8).map(|k| if k == 0 { qi(0) } else { qi(if k % 2 == 1 { -1 } else { 1 }) }).collect();
        assert_eq!(g.lambda[0][0], USeries::new(8, lam.clone()));
        assert_eq!(g.phi_u, USeries::new(8, lam));
        assert_eq!(g.rational_form().as_deref(), Some("-z"));
    }

    #[test]
    fn degenerate_sizes() {
        let g = gamma(&mu_table(&[Word::identity()], 5).unwrap()).unwrap();
        assert_eq!(g.gamma_z, ZSeries::one(4));
        assert_eq!(g.phi_u, USeries::one(4));
        let g = gamma(&mu_table(&[Word::identity(), Word::identity()], 5).unwrap()).unwrap();
        assert!(g.gamma_z.is_zero() && g.phi_u.is_zero());
    }

    #[test]
    fn hopf_phi_multi() {
        let lons = hopf();
        let link = LinkingData::from_longitudes(&lons);
        let p = phi_multi(&chat_matrix(&lons, 7).unwrap(), &link).unwrap();
        let expect = MultiSeries::var(2, 6, 1).mul(&MultiSeries::t_pow(2, 6, 0, -1)).neg();
        assert_eq!(p, expect);
        let triv = vec![Word::identity(); 2];
        let p = phi_multi(&chat_matrix(&triv, 5).unwrap(), &LinkingData::from_longitudes(&triv)).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn lowest_coefficient_hypothesis() {
        let mu = mu_table(&hopf(), 6).unwrap();
        assert_eq!(lowest_coefficient(&mu, 3), Err(FactorError::Hypothesis(2, 3)));
        assert_eq!(lowest_coefficient(&mu, 2).unwrap(), BigInt::from(-1));
        let triv = mu_table(&vec![Word::identity(); 3], 6).unwrap();
        assert!(lowest_coefficient(&triv, 3).unwrap().is_zero());
        assert!(multi_lowest(&triv, 3).unwrap().is_zero());
    }

    #[test]
    fn seifert_examples() {
        assert_eq!(conway_from_seifert(&[]).unwrap(), (ConwayPoly::one(), true));
        let (c, uni) = conway_from_seifert(&[vec![-1, 1], vec![0, -1]]).unwrap();
        assert_eq!(c, ConwayPoly::from_ints(&[1, 0, 1]));
        assert!(uni);
        assert_eq!(conway_from_seifert(&[vec![0, 1], vec![0, 0]]).unwrap().0, ConwayPoly::one());
        assert_eq!(conway_from_seifert(&[vec![1, 2]]), Err(FactorError::NotSquare));
    }

    #[test]
    fn checks_need_split() {
        let lons = hopf();
        let g = gamma(&mu_table(&lons, 5).unwrap()).unwrap();
        assert_eq!(gamma_checks(&g, &LinkingData::from_longitudes(&lons)), Err(FactorError::NotSplit));
        let triv = vec![Word::identity(); 2];
        let g = gamma(&mu_table(&triv, 5).unwrap()).unwrap();
        assert!(gamma_checks(&g, &LinkingData::from_longitudes(&triv)).unwrap().all());
    }
}
