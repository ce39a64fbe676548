//! μ̄-invariants, longitudinal matrices and the degeneracy identities.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::series::{magnus_expand, LaurentPoly, MultiLaurent, MultiSeries, Ring, USeries, Q};
use crate::words::Word;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MilnorError {
    #[error("longitude {0} has nonzero exponent sum {1}; normalize it first")]
    Unnormalized(usize, i64),
    #[error("truncation order must be at least 2, got {0}")]
    OrderTooSmall(usize),
    #[error("longitude {0} uses generator x{1} but there are only {2} strands")]
    GeneratorRange(usize, usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("non-integral Magnus coefficient at {0:?}")]
    NonIntegral(Vec<usize>),
}

fn check_longitudes(lons: &[Word], q: usize) -> Result<(), MilnorError> {
    if q < 2 {
        return Err(MilnorError::OrderTooSmall(q));
    }
    let m = lons.len();
    for (i, l) in lons.iter().enumerate() {
        if l.rank() > m {
            return Err(MilnorError::GeneratorRange(i + 1, l.rank(), m));
        }
        let e = l.exponent_sum();
        if e != 0 {
            return Err(MilnorError::Unnormalized(i + 1, e));
        }
    }
    Ok(())
}

/// μ̄ values keyed by 0-based index sequences `(i_1..i_r, i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuTable {
    m: usize,
    q: usize,
    entries: BTreeMap<Vec<usize>, BigInt>,
}

impl MuTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, BigInt> {
        &self.entries
    }

    pub fn get(&self, key: &[usize]) -> BigInt {
        self.entries.get(key).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Look up with 1-based indices.
    pub fn get1(&self, key: &[usize]) -> BigInt {
        let k: Vec<usize> = key.iter().map(|i| i - 1).collect();
        self.get(&k)
    }

    /// True when every entry of length below `k` is zero.
    pub fn vanishes_below(&self, k: usize) -> bool {
        self.entries.keys().all(|key| key.len() >= k)
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (k, v) in &self.entries {
            let key: Vec<String> = k.iter().map(|i| (i + 1).to_string()).collect();
            map.insert(key.join(","), Value::String(v.to_string()));
        }
        json!({"m": self.m, "q": self.q, "entries": Value::Object(map)})
    }
}

/// μ̄ of every index sequence of length at most `q`.
pub fn mu_table(lons: &[Word], q: usize) -> Result<MuTable, MilnorError> {
    check_longitudes(lons, q)?;
    let m = lons.len();
    let mut entries = BTreeMap::new();
    for (i, l) in lons.iter().enumerate() {
        let th = magnus_expand(l, m, q - 1);
        for (w, c) in th.terms() {
            if w.is_empty() {
                continue;
            }
            let mut key = w.clone();
            key.push(i);
            if !c.is_integer() {
                return Err(MilnorError::NonIntegral(key));
            }
            entries.insert(key, c.numer().clone());
        }
    }
    Ok(MuTable { m, q, entries })
}

/// `c_ij(u)` for `1 <= i,j <= m`, truncated at degree `q - 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMatrix {
    pub m: usize,
    pub entries: Vec<Vec<USeries>>,
}

impl CMatrix {
    pub fn degree(&self) -> usize {
        self.entries.first().and_then(|r| r.first()).map_or(0, |s| s.q())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.entries.iter().map(|r| Value::Array(r.iter().map(|s| s.to_json()).collect())).collect())
    }
}

/// `ĉ_ij(v)` for `1 <= i,j <= m`, truncated at total degree `q - 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CHatMatrix {
    pub m: usize,
    pub entries: Vec<Vec<MultiSeries>>,
}

impl CHatMatrix {
    /// `v_i -> u`.
    pub fn specialize(&self) -> CMatrix {
        CMatrix {
            m: self.m,
            entries: self.entries.iter().map(|r| r.iter().map(|s| s.specialize()).collect()).collect(),
        }
    }
}

pub fn c_matrix_from_mu(t: &MuTable) -> Result<CMatrix, MilnorError> {
    if t.q < 2 {
        return Err(MilnorError::OrderTooSmall(t.q));
    }
    let d = t.q - 2;
    let m = t.m;
    let mut acc = vec![vec![vec![Q::zero(); d + 1]; m]; m];
    for (key, v) in &t.entries {
        let n = key.len();
        if n < 2 {
            continue;
        }
        let (j, i) = (key[n - 2], key[n - 1]);
        acc[i][j][n - 2] += Q::from_integer(v.clone());
    }
    Ok(CMatrix {
        m,
        entries: acc.into_iter().map(|r| r.into_iter().map(|c| USeries::new(d, c)).collect()).collect(),
    })
}

pub fn chat_from_mu(t: &MuTable) -> Result<CHatMatrix, MilnorError> {
    if t.q < 2 {
        return Err(MilnorError::OrderTooSmall(t.q));
    }
    let d = t.q - 2;
    let m = t.m;
    let mut entries = vec![vec![MultiSeries::zero(m, d); m]; m];
    for (key, v) in &t.entries {
        let n = key.len();
        if n < 2 {
            continue;
        }
        let (j, i) = (key[n - 2], key[n - 1]);
        let mut mono = MultiSeries::constant(m, d, Q::from_integer(v.clone()));
        for &r in &key[..n - 2] {
            mono = mono.mul(&MultiSeries::var(m, d, r));
        }
        entries[i][j] = entries[i][j].add(&mono);
    }
    Ok(CHatMatrix { m, entries })
}

/// Abelianized Fox derivatives `∂w/∂x_j` with `x_j -> t_j`.
pub fn fox_multi(w: &Word, m: usize) -> Vec<MultiLaurent> {
    let mut out = vec![MultiLaurent::default(); m];
    let mut prefix = vec![0i64; m];
    for &(g, e) in w.letters() {
        if e > 0 {
            out[g].add_term(prefix.clone(), BigInt::one());
            prefix[g] += 1;
        } else {
            prefix[g] -= 1;
            out[g].add_term(prefix.clone(), -BigInt::one());
        }
    }
    out
}

/// Fox derivatives with every `x_j -> t`.
pub fn fox(w: &Word, m: usize) -> Vec<LaurentPoly> {
    fox_multi(w, m).iter().map(|p| p.specialize()).collect()
}

pub fn c_matrix_from_fox(lons: &[Word], q: usize) -> Result<CMatrix, MilnorError> {
    check_longitudes(lons, q)?;
    let m = lons.len();
    Ok(CMatrix {
        m,
        entries: lons.iter().map(|l| fox(l, m).iter().map(|a| a.to_useries(q - 2)).collect()).collect(),
    })
}

pub fn chat_matrix(lons: &[Word], q: usize) -> Result<CHatMatrix, MilnorError> {
    check_longitudes(lons, q)?;
    let m = lons.len();
    Ok(CHatMatrix {
        m,
        entries: lons
            .iter()
            .map(|l| fox_multi(l, m).iter().map(|a| a.to_multiseries(m, q - 2)).collect())
            .collect(),
    })
}

/// Linking numbers with the diagonal `l_ii = -Σ_{r≠i} l_ir`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkingData {
    pub l: Vec<Vec<i64>>,
}

impl LinkingData {
    /// From off-diagonal entries; the diagonal is overwritten.
    pub fn from_offdiagonal(mut l: Vec<Vec<i64>>) -> Self {
        let m = l.len();
        for i in 0..m {
            l[i][i] = -(0..m).filter(|&r| r != i).map(|r| l[i][r]).sum::<i64>();
        }
        LinkingData { l }
    }

    /// `l_ij` is the exponent sum of `x_j` in `λ_i`.
    pub fn from_longitudes(lons: &[Word]) -> Self {
        let m = lons.len();
        Self::from_offdiagonal(
            (0..m).map(|i| (0..m).map(|j| if i == j { 0 } else { lons[i].exponent_sum_of(j) }).collect()).collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.l.len()
    }

    /// Exponent vector of `τ_i = Π_j t_j^{l_ij}`.
    pub fn tau(&self, i: usize) -> &[i64] {
        &self.l[i]
    }

    pub fn is_split(&self) -> bool {
        let m = self.m();
        (0..m).all(|i| (0..m).all(|j| i == j || self.l[i][j] == 0))
    }

    pub fn to_json(&self) -> Value {
        json!(self.l)
    }
}

/// Unit factor `a_i` of the column identity, as an exponent vector.
pub fn unit_factor(link: &LinkingData, i: usize) -> Vec<i64> {
    let m = link.m();
    let mut e = vec![0i64; m];
    for (r, er) in e.iter_mut().enumerate().take(i) {
        // 1-based r+1: odd gives t_r^{-1}, even gives t_r
        *er += if r % 2 == 0 { -1 } else { 1 };
    }
    if i % 2 == 0 {
        for (r, er) in e.iter_mut().enumerate() {
            *er -= link.l[i][r];
        }
        e[i] -= 1;
    }
    e
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegeneracyReport {
    /// `Σ_j c_ij`, one per row.
    pub row_sums: Vec<USeries>,
    /// `Σ_i c_ij`, one per column.
    pub col_sums: Vec<USeries>,
    /// `τ_i - 1 - Σ_j (t_j - 1) ĉ_ij`.
    pub row_identity: Vec<MultiSeries>,
    /// `a_j (τ_j - 1) - Σ_i a_i (t_i - 1) ĉ_ij`.
    pub col_identity: Vec<MultiSeries>,
}

impl DegeneracyReport {
    pub fn sums_vanish(&self) -> bool {
        self.row_sums.iter().chain(&self.col_sums).all(|s| s.is_zero())
    }

    pub fn identities_vanish(&self) -> bool {
        self.row_identity.iter().chain(&self.col_identity).all(|s| s.is_zero())
    }
}

/// Residuals of the row/column sum identities (meaningful when split) and of
/// the two τ identities (always expected to vanish). The τ residuals are exact
/// through total degree `deg(ĉ) + 1`.
pub fn degeneracy_check(c: &CMatrix, chat: &CHatMatrix, link: &LinkingData) -> Result<DegeneracyReport, MilnorError> {
    let m = c.m;
    if chat.m != m {
        return Err(MilnorError::Dimension(m, chat.m));
    }
    if link.m() != m {
        return Err(MilnorError::Dimension(m, link.m()));
    }
    let d = c.degree();
    let row_sums = (0..m)
        .map(|i| (0..m).fold(USeries::zero(d), |acc, j| &acc + &c.entries[i][j]))
        .collect();
    let col_sums = (0..m)
        .map(|j| (0..m).fold(USeries::zero(d), |acc, i| &acc + &c.entries[i][j]))
        .collect();

    let dq = chat.entries.first().and_then(|r| r.first()).map_or(0, |s| s.q()) + 1;
    let ch: Vec<Vec<MultiSeries>> = chat.entries.iter().map(|r| r.iter().map(|s| s.retruncate(dq)).collect()).collect();
    let one = MultiSeries::one(m, dq);
    let v: Vec<MultiSeries> = (0..m).map(|j| MultiSeries::var(m, dq, j)).collect();
    let tau1: Vec<MultiSeries> = (0..m).map(|i| MultiSeries::t_monomial(m, dq, link.tau(i)).sub(&one)).collect();
    let a: Vec<MultiSeries> = (0..m).map(|i| MultiSeries::t_monomial(m, dq, &unit_factor(link, i))).collect();

    let row_identity = (0..m)
        .map(|i| (0..m).fold(tau1[i].clone(), |acc, j| acc.sub(&v[j].mul(&ch[i][j]))))
        .collect();
    let col_identity = (0..m)
        .map(|j| (0..m).fold(a[j].mul(&tau1[j]), |acc, i| acc.sub(&a[i].mul(&v[i]).mul(&ch[i][j]))))
        .collect();
    Ok(DegeneracyReport { row_sums, col_sums, row_identity, col_identity })
}

/// Leading `(m-1)×(m-1)` block, the one every determinant formula uses.
pub fn leading_block<R: Ring>(a: &[Vec<R>]) -> Vec<Vec<R>> {
    let n = a.len().saturating_sub(1);
    a.iter().take(n).map(|r| r.iter().take(n).cloned().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::qi;

    fn hopf() -> Vec<Word> {
        vec![Word::parse("X1^-1 X2").unwrap(), Word::parse("X2^-1 X1").unwrap()]
    }

    fn alt(d: usize, sign: i64) -> USeries {
        USeries::new(d, (0..=d).map(|k| qi(if k % 2 == 0 { sign } else { -sign })).collect())
    }

    #[test]
    fn hopf_mu_pattern() {
        let t = mu_table(&hopf(), 8).unwrap();
        // μ̄_{i_1..i_r,1,1} with every i_k = 1 is (-1)^{r+1}
        for r in 0..=6 {
            let key = vec![0; r + 2];
            let expect = if r % 2 == 1 { 1 } else { -1 };
            assert_eq!(t.get(&key), BigInt::from(expect), "r = {r}");
        }
        assert_eq!(t.get1(&[2, 1]), BigInt::one());
        // θ(x1^-1 x2) = (1 - u1 + u1^2 - ...)(1 + u2)
        for (k, v) in t.entries() {
            if *k.last().unwrap() == 0 {
                let n = k.len() - 1;
                let ones = k[..n].iter().take_while(|&&i| i == 0).count();
                let tail_ok = ones == n || (ones == n - 1 && k[n - 1] == 1);
                assert!(tail_ok, "{k:?}");
                let r = if ones == n { n } else { n - 1 };
                assert_eq!(*v, BigInt::from(if r % 2 == 0 { 1 } else { -1 }), "{k:?}");
            }
        }
    }

    #[test]
    fn trivial_longitudes() {
        let lons = vec![Word::identity(); 3];
        let t = mu_table(&lons, 5).unwrap();
        assert!(t.entries().is_empty());
        let c = c_matrix_from_mu(&t).unwrap();
        assert!(c.entries.iter().flatten().all(|s| s.is_zero()));
        assert!(chat_matrix(&lons, 5).unwrap().entries.iter().flatten().all(|s| s.is_zero()));
    }

    #[test]
    fn unnormalized_rejected() {
        let lons = vec![Word::parse("X1 X2").unwrap(), Word::identity()];
        assert_eq!(mu_table(&lons, 4), Err(MilnorError::Unnormalized(1, 2)));
        assert_eq!(mu_table(&hopf(), 1), Err(MilnorError::OrderTooSmall(1)));
    }

    #[test]
    fn hopf_c_matrix() {
        let t = mu_table(&hopf(), 10).unwrap();
        let c = c_matrix_from_mu(&t).unwrap();
        assert_eq!(c.entries[0][0], alt(8, -1));
        assert_eq!(c.entries[0][1], alt(8, 1));
        assert_eq!(c, c_matrix_from_fox(&hopf(), 10).unwrap());
    }

    #[test]
    fn fox_examples() {
        let d = fox(&Word::parse("X2").unwrap(), 2);
        assert_eq!(d[1], LaurentPoly::one());
        assert!(d[0].is_zero());
        let d = fox(&Word::parse("X1 X2").unwrap(), 2);
        assert_eq!(d[0], LaurentPoly::one());
        assert_eq!(d[1], LaurentPoly::t_pow(1));
        assert_eq!(d[1].to_useries(3), USeries::from_ints(3, &[1, 1]));
    }

    #[test]
    fn hopf_chat() {
        let ch = chat_matrix(&hopf(), 6).unwrap();
        let inv = MultiSeries::t_pow(2, 4, 0, -1);
        assert_eq!(ch.entries[0][0], inv.neg());
        assert_eq!(ch.entries[0][1], inv);
        assert_eq!(ch, chat_from_mu(&mu_table(&hopf(), 6).unwrap()).unwrap());
        assert_eq!(ch.specialize(), c_matrix_from_fox(&hopf(), 6).unwrap());
    }

    #[test]
    fn hopf_linking_and_identities() {
        let link = LinkingData::from_longitudes(&hopf());
        assert_eq!(link.l, vec![vec![-1, 1], vec![1, -1]]);
        assert_eq!(link.tau(0), &[-1, 1]);
        let lons = hopf();
        let rep = degeneracy_check(
            &c_matrix_from_fox(&lons, 7).unwrap(),
            &chat_matrix(&lons, 7).unwrap(),
            &link,
        )
        .unwrap();
        assert!(rep.identities_vanish());
        // c_11 = -c_12 = -c_21 = c_22 = -t^{-1}
        assert!(rep.sums_vanish());
    }
}
